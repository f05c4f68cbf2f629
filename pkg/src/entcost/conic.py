"""Complex Hermitian SDP assembly over a real-symmetric conic backend.

Problems are modelled with complex Hermitian matrix variables and affine
expressions; the complex-to-real embedding happens once, at the solver
boundary.  The backend contract is a standard conic form (min q'x subject to
Ax + s = b with s in a product of zero / nonnegative / PSD-triangle cones);
Clarabel fulfils it here.  Every accepted solution is re-verified against the
declared tolerances, so ``status == "optimal"`` is a checked claim, not a
solver report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

import clarabel

DEFAULT_GAP_TOL = 1e-7
DEFAULT_FEAS_TOL = 1e-8

#: module-wide solver chatter switch (the CLI toggles it from the environment)
VERBOSE = False


class SolverFailure(RuntimeError):
    """Raised when a solve cannot produce a usable (even inaccurate) solution."""


def embed_hermitian(h) -> np.ndarray:
    """Real symmetric [[Re, -Im], [Im, Re]] embedding of a Hermitian matrix.

    The embedding is linear and spectrum preserving: each eigenvalue of the
    input appears twice.
    """
    m = h.mat if hasattr(h, "mat") else np.asarray(h, dtype=complex)
    asym = np.abs(m - m.conj().T).max() if m.size else 0.0
    if asym > 1e-8:
        raise ValueError(f"embed_hermitian expects a Hermitian matrix (asymmetry {asym:.3e})")
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


_SVEC_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _svec_indices(n: int):
    """Row/column indices and sqrt(2) scaling of the PSD-triangle vectorisation.

    The cone expects the upper triangle in column-major order with
    off-diagonal entries scaled by sqrt(2).
    """
    if n not in _SVEC_CACHE:
        ii = np.concatenate([np.arange(j + 1) for j in range(n)])
        jj = np.concatenate([np.full(j + 1, j) for j in range(n)])
        scale = np.where(ii < jj, np.sqrt(2.0), 1.0)
        _SVEC_CACHE[n] = (ii, jj, scale)
    return _SVEC_CACHE[n]


def _svec(s: np.ndarray) -> np.ndarray:
    ii, jj, scale = _svec_indices(s.shape[0])
    return s[ii, jj] * scale


def _svec_batch(e: np.ndarray) -> np.ndarray:
    """Batched svec: (p, n, n) -> (p, n(n+1)/2)."""
    ii, jj, scale = _svec_indices(e.shape[1])
    return e[:, ii, jj] * scale


def _smat(v: np.ndarray, n: int) -> np.ndarray:
    ii, jj, scale = _svec_indices(n)
    out = np.zeros((n, n))
    out[ii, jj] = v / scale
    out[jj, ii] = v / scale
    return out


def _embed_batch(ms: np.ndarray) -> np.ndarray:
    """Batched embedding: (p, n, n) complex -> (p, 2n, 2n) real."""
    p, n, _ = ms.shape
    out = np.empty((p, 2 * n, 2 * n))
    out[:, :n, :n] = ms.real
    out[:, :n, n:] = -ms.imag
    out[:, n:, :n] = ms.imag
    out[:, n:, n:] = ms.real
    return out


def _unembed(z: np.ndarray) -> np.ndarray:
    """Adjoint of ``embed_hermitian``: real symmetric 2n x 2n -> complex Hermitian."""
    n = z.shape[0] // 2
    p, q = z[:n, :n], z[:n, n:]
    s = z[n:, n:]
    return (p + s) / 2 + 1j * (q.T - q) / 2


def _herm_basis(n: int) -> np.ndarray:
    """Columns vec(B_k) of the real parametrisation X = sum_k x_k B_k."""
    cols = []
    for i in range(n):
        b = np.zeros((n, n), dtype=complex)
        b[i, i] = 1.0
        cols.append(b.reshape(-1))
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = b[j, i] = 1.0
            cols.append(b.reshape(-1))
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = 1j
            b[j, i] = -1j
            cols.append(b.reshape(-1))
    return np.stack(cols, axis=1)


_BASIS_CACHE: dict[int, np.ndarray] = {}


def herm_basis(n: int) -> np.ndarray:
    if n not in _BASIS_CACHE:
        _BASIS_CACHE[n] = _herm_basis(n)
    return _BASIS_CACHE[n]


class MatExpr:
    """Matrix-valued affine expression in the problem variables.

    ``coeffs[name]`` maps the real parameter vector of a variable to the
    (complex, row-major) vectorised contribution; ``const`` is the constant
    term.  Scalar expressions are the 1 x 1 case.
    """

    __slots__ = ("dim", "const", "coeffs")

    def __init__(self, dim: int, const: np.ndarray, coeffs: dict[str, np.ndarray]):
        self.dim = dim
        self.const = const
        self.coeffs = coeffs

    @classmethod
    def constant(cls, mat) -> "MatExpr":
        m = np.asarray(mat, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        return cls(m.shape[0], m.reshape(-1).copy(), {})

    def _zip(self, other, f):
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = f(coeffs.get(k, 0), v)
        return coeffs

    def __add__(self, other) -> "MatExpr":
        other = other if isinstance(other, MatExpr) else MatExpr.constant(other)
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        return MatExpr(self.dim, self.const + other.const,
                       self._zip(other, lambda a, b: a + b))

    __radd__ = __add__

    def __sub__(self, other) -> "MatExpr":
        other = other if isinstance(other, MatExpr) else MatExpr.constant(other)
        return self + (other * -1.0)

    def __rsub__(self, other) -> "MatExpr":
        return MatExpr.constant(other) - self

    def __mul__(self, a: float) -> "MatExpr":
        return MatExpr(self.dim, self.const * a,
                       {k: v * a for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def apply(self, superop: np.ndarray, out_dim: int) -> "MatExpr":
        """Push the expression through a linear map given by its vec-matrix."""
        return MatExpr(out_dim, superop @ self.const,
                       {k: superop @ v for k, v in self.coeffs.items()})

    def trace(self) -> "MatExpr":
        tr = np.eye(self.dim, dtype=complex).reshape(1, -1)
        return self.apply(tr, 1)

    def as_matrices(self):
        """Constant matrix and, per variable, the matrix slice of each real parameter."""
        c = self.const.reshape(self.dim, self.dim)
        slices = {k: v.T.reshape(-1, self.dim, self.dim)
                  for k, v in self.coeffs.items()}
        return c, slices

    def value(self, variables: dict[str, np.ndarray | float]) -> np.ndarray:
        out = self.const.copy()
        for name, c in self.coeffs.items():
            x = variables[name]
            if np.isscalar(x):
                xv = np.array([float(x)])
            else:
                xv = _herm_params(np.asarray(x))
            out = out + c @ xv
        return out.reshape(self.dim, self.dim)


def _herm_params(x: np.ndarray) -> np.ndarray:
    """Inverse of the Hermitian parametrisation (matrix -> real coordinates)."""
    n = x.shape[0]
    parts = [x.diagonal().real]
    iu = [(i, j) for i in range(n) for j in range(i + 1, n)]
    parts.append(np.array([x[i, j].real for i, j in iu]))
    parts.append(np.array([x[i, j].imag for i, j in iu]))
    return np.concatenate(parts) if n > 1 else parts[0]


@dataclass
class SdpSolution:
    """Verified outcome of a conic solve."""

    status: str                      # optimal | infeasible | unbounded | inaccurate
    primal_value: float | None
    dual_value: float | None
    duality_gap: float | None
    variables: dict[str, np.ndarray | float] = field(default_factory=dict)
    psd_duals: dict[str, np.ndarray] = field(default_factory=dict)
    worst_psd_violation: float = 0.0
    worst_eq_residual: float = 0.0
    iterations: int = 0
    solve_time: float = 0.0
    message: str = ""

    def require_optimal(self):
        if self.status != "optimal":
            raise SolverFailure(f"solver returned {self.status}: {self.message}")
        return self


class SdpProblem:
    """Declarative SDP: Hermitian/scalar variables, affine equalities, PSD cones."""

    def __init__(self):
        self._vars: dict[str, tuple[str, int]] = {}
        self._order: list[str] = []
        self._psd: list[tuple[str, MatExpr]] = []
        self._eq: list[MatExpr] = []
        self._nonneg: list[MatExpr] = []
        self._objective: MatExpr | None = None

    def herm_var(self, name: str, dim: int) -> MatExpr:
        if name in self._vars:
            raise ValueError(f"variable {name!r} already declared")
        self._vars[name] = ("herm", dim)
        self._order.append(name)
        return MatExpr(dim, np.zeros(dim * dim, dtype=complex),
                       {name: herm_basis(dim)})

    def scalar_var(self, name: str) -> MatExpr:
        if name in self._vars:
            raise ValueError(f"variable {name!r} already declared")
        self._vars[name] = ("scalar", 1)
        self._order.append(name)
        return MatExpr(1, np.zeros(1, dtype=complex),
                       {name: np.ones((1, 1), dtype=complex)})

    def add_psd(self, expr: MatExpr, tag: str | None = None):
        self._psd.append((tag or f"psd{len(self._psd)}", expr))

    def add_eq(self, expr: MatExpr):
        self._eq.append(expr)

    def add_nonneg(self, expr: MatExpr):
        if expr.dim != 1:
            raise ValueError("nonneg constraints are scalar")
        self._nonneg.append(expr)

    def minimize(self, expr: MatExpr):
        if expr.dim != 1:
            raise ValueError("objective must be scalar")
        self._objective = expr

    # -- lowering ----------------------------------------------------------

    def _nparams(self, name: str) -> int:
        kind, dim = self._vars[name]
        return dim * dim if kind == "herm" else 1

    def _offsets(self):
        off, total = {}, 0
        for name in self._order:
            off[name] = total
            total += self._nparams(name)
        return off, total

    def _real_rows(self, expr: MatExpr, off, total):
        """Real (row, rhs) pairs for expr == 0, skipping redundant Hermitian halves."""
        c, slices = expr.as_matrices()
        herm = np.abs(c - c.conj().T).max() <= 1e-11 if c.size else True
        for s in slices.values():
            if herm:
                herm = np.abs(s - np.conj(np.swapaxes(s, 1, 2))).max() <= 1e-11
        n = expr.dim
        if herm:
            entries = [(i, i, "re") for i in range(n)]
            entries += [(i, j, p) for i in range(n) for j in range(i + 1, n)
                        for p in ("re", "im")]
        else:
            entries = [(i, j, p) for i in range(n) for j in range(n)
                       for p in ("re", "im")]
        rows, rhs = [], []
        for i, j, part in entries:
            row = np.zeros(total)
            for name, s in slices.items():
                col = s[:, i, j]
                row[off[name]:off[name] + len(col)] = col.real if part == "re" else col.imag
            cval = c[i, j].real if part == "re" else c[i, j].imag
            if np.abs(row).max(initial=0.0) < 1e-14 and abs(cval) < 1e-14:
                continue
            rows.append(row)
            rhs.append(-cval)
        return rows, rhs

    def lower(self):
        off, total = self._offsets()
        if self._objective is None:
            self._objective = MatExpr.constant(np.zeros((1, 1)))
        q = np.zeros(total)
        for name, c in self._objective.coeffs.items():
            col = c[0, :] if c.ndim == 2 else c
            if np.abs(col.imag).max(initial=0.0) > 1e-10:
                raise ValueError("objective must be real")
            q[off[name]:off[name] + len(col)] = col.real
        q_off = float(self._objective.const[0].real)

        a_rows, b_vals, cones = [], [], []
        for expr in self._eq:
            rows, rhs = self._real_rows(expr, off, total)
            a_rows.extend(rows)
            b_vals.extend(rhs)
        if a_rows:
            cones.append(clarabel.ZeroConeT(len(a_rows)))

        for expr in self._nonneg:
            c, slices = expr.as_matrices()
            row = np.zeros(total)
            for name, s in slices.items():
                col = s[:, 0, 0]
                row[off[name]:off[name] + len(col)] = col.real
            a_rows.append(-row)
            b_vals.append(c[0, 0].real)
        if self._nonneg:
            cones.append(clarabel.NonnegativeConeT(len(self._nonneg)))

        psd_meta = []
        for tag, expr in self._psd:
            c, slices = expr.as_matrices()
            m = 2 * expr.dim
            b_vals.extend(_svec(embed_hermitian(c)))
            block = np.zeros((m * (m + 1) // 2, total))
            for name, s in slices.items():
                s = (s + np.conj(np.swapaxes(s, 1, 2))) / 2
                block[:, off[name]:off[name] + s.shape[0]] = -_svec_batch(_embed_batch(s)).T
            a_rows.extend(block)
            cones.append(clarabel.PSDTriangleConeT(m))
            psd_meta.append((tag, expr))

        a = sparse.csc_matrix(np.asarray(a_rows)) if a_rows else sparse.csc_matrix((0, total))
        return a, np.asarray(b_vals, dtype=float), q, q_off, cones, off, total, psd_meta


_STATUS_MAP = {
    "Solved": "optimal",
    "AlmostSolved": "optimal",          # subject to re-verification below
    "PrimalInfeasible": "infeasible",
    "AlmostPrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    "AlmostDualInfeasible": "unbounded",
}

def _settings(gap_tol: float, feas_tol: float, verbose: bool, attempt: int):
    s = clarabel.DefaultSettings()
    s.verbose = verbose or VERBOSE
    s.max_threads = 1
    s.tol_gap_abs = max(min(gap_tol * 1e-2, 1e-9), 1e-12)
    s.tol_gap_rel = s.tol_gap_abs
    s.tol_feas = max(min(feas_tol * 1e-2, 1e-9), 1e-12)
    if attempt == 1:
        # a touch of static regularisation helps degenerate complementarity
        s.static_regularization_constant = 1e-7
        s.max_iter = 400
    elif attempt == 2:
        s.direct_solve_method = "qdldl"
        s.max_step_fraction = 0.95
        s.max_iter = 400
    return s


def solve(problem: SdpProblem, *, gap_tol: float = DEFAULT_GAP_TOL,
          feas_tol: float = DEFAULT_FEAS_TOL, verbose: bool = False) -> SdpSolution:
    """Solve an assembled problem and verify the solution against the tolerances.

    ``status == "optimal"`` guarantees the primal/dual gap is at most
    ``gap_tol`` and every PSD constraint holds to ``-feas_tol``; anything the
    verification cannot confirm is reported as ``inaccurate`` together with
    diagnostics, never as a silent wrong answer.  Marginal solves are retried
    with a fixed ladder of alternative settings, so results stay deterministic.
    """
    lowered = problem.lower()
    a, b, q, q_off, cones, off, total, psd_meta = lowered
    best: SdpSolution | None = None
    for attempt in range(3):
        try:
            solver = clarabel.DefaultSolver(sparse.csc_matrix((total, total)), q,
                                            a, b, cones,
                                            _settings(gap_tol, feas_tol, verbose, attempt))
            raw = solver.solve()
        except BaseException as exc:  # the backend is a rust extension
            raise SolverFailure(f"conic backend failed: {exc}") from exc
        sol = _verify(problem, lowered, raw, gap_tol, feas_tol)
        if sol.status in ("optimal", "infeasible", "unbounded"):
            return sol
        if best is None or (sol.duality_gap or np.inf) < (best.duality_gap or np.inf):
            best = sol
    return best


def _verify(problem: SdpProblem, lowered, raw, gap_tol: float,
            feas_tol: float) -> SdpSolution:
    a, b, q, q_off, cones, off, total, psd_meta = lowered
    status = _STATUS_MAP.get(str(raw.status), "inaccurate")
    if status in ("infeasible", "unbounded"):
        return SdpSolution(status=status, primal_value=None, dual_value=None,
                           duality_gap=None, iterations=raw.iterations,
                           solve_time=raw.solve_time, message=str(raw.status))

    x = np.asarray(raw.x)
    z = np.asarray(raw.z)
    variables: dict[str, np.ndarray | float] = {}
    for name in problem._order:
        kind, dim = problem._vars[name]
        xs = x[off[name]:off[name] + problem._nparams(name)]
        if kind == "scalar":
            variables[name] = float(xs[0])
        else:
            variables[name] = (herm_basis(dim) @ xs).reshape(dim, dim)

    primal = float(q @ x) + q_off
    dual = float(-b @ z) + q_off
    gap = abs(primal - dual)

    worst_psd = 0.0
    psd_duals = {}
    row = a.shape[0]
    for tag, expr in reversed(psd_meta):
        m = 2 * expr.dim
        nn = m * (m + 1) // 2
        row -= nn
        psd_duals[tag] = _unembed(_smat(z[row:row + nn], m))
    for tag, expr in psd_meta:
        val = expr.value(variables)
        worst_psd = min(worst_psd, float(np.linalg.eigvalsh((val + val.conj().T) / 2)[0]))

    worst_eq = 0.0
    if problem._eq:
        res = a @ x - b  # zero-cone rows sit first in the lowering
        n_zero = len(b) - sum(2 * e.dim * (2 * e.dim + 1) // 2 for _, e in psd_meta) \
            - len(problem._nonneg)
        worst_eq = float(np.abs(res[:n_zero]).max(initial=0.0))

    verified = (gap <= gap_tol and worst_psd >= -feas_tol
                and worst_eq <= max(feas_tol, 1e-7))
    final = "optimal" if verified else "inaccurate"
    return SdpSolution(status=final, primal_value=primal, dual_value=dual,
                       duality_gap=gap, variables=variables, psd_duals=psd_duals,
                       worst_psd_violation=worst_psd, worst_eq_residual=worst_eq,
                       iterations=raw.iterations, solve_time=raw.solve_time,
                       message=str(raw.status))
