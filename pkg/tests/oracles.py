"""Independent reference computations used to cross-check the library.

Everything here is deliberately built on different code paths from the
package: cvxpy models instead of the in-house conic lowering, direct
eigendecompositions, and closed-form pure-state formulas.
"""

import cvxpy as cp
import numpy as np


def ptranspose_b(mat, da, db):
    return mat.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def negativity_norm(rho, da, db):
    """Trace norm of the partial transpose."""
    return float(np.abs(np.linalg.eigvalsh(ptranspose_b(rho, da, db))).sum())


def schmidt_sum_squared(vec, da, db):
    """Pure-state robustness: squared sum of Schmidt coefficients."""
    s = np.linalg.svd(np.asarray(vec).reshape(da, db), compute_uv=False)
    return float(s.sum() ** 2)


def cvxpy_gen_robustness(rho, da, db):
    w = cp.Variable((da * db, da * db), hermitian=True)
    cons = [w - rho >> 0,
            cp.partial_transpose(w, dims=(da, db), axis=1) >> 0]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(w))), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def cvxpy_std_robustness(rho, da, db):
    y = cp.Variable((da * db, da * db), hermitian=True)
    pt = lambda x: cp.partial_transpose(x, dims=(da, db), axis=1)
    cons = [y >> 0, pt(y) >> 0, pt(rho + y) >> 0]
    prob = cp.Problem(cp.Minimize(cp.real(1 + cp.trace(y))), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def cvxpy_half_diamond(choi_a, choi_b, din, dout):
    """Watrous-style primal maximization, a different program from the library's."""
    delta = din * (choi_a - choi_b)
    w = cp.Variable((din * dout, din * dout), hermitian=True)
    rho = cp.Variable((din, din), hermitian=True)
    cons = [w >> 0, cp.kron(rho, np.eye(dout)) - w >> 0,
            rho >> 0, cp.trace(rho) == 1]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(delta @ w))), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def kraus_apply(kraus, rho):
    return sum(k @ rho @ k.conj().T for k in kraus)


def depolarizing_kraus(p):
    i2 = np.eye(2, dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return [np.sqrt(1 - 3 * p / 4) * i2, np.sqrt(p / 4) * x,
            np.sqrt(p / 4) * y, np.sqrt(p / 4) * z]


def haar_unitary(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(d, rng, rank=None):
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real
