"""Entanglement monotones as conic programs with explicit bound directions.

Exact separability-based quantities are intractable, so every computed value
carries the relaxation it was computed under and the direction in which it
bounds the exact quantity.  All three relaxations are outer approximations of
the separability-based free sets, hence the reported values are lower bounds;
the PPT relaxation of state quantities is exact at 2x2 and 2x3 where the
positive-partial-transpose criterion characterises separability.

Bipartite channels follow the positional side convention: the first half of
the input (and output) subsystems belongs to the A side, the second half to
the B side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic, metrics, tensorcore as tc
from .conic import MatExpr, SdpProblem
from .tensorcore import ChoiChannel, DensityMatrix, DimensionError

PPT_STATE = "ppt-state"
PPT_CHOI = "ppt-choi"
SEPP_SAMPLED = "sepp-sampled"

#: dimensions at which the PPT cone coincides with the separable cone
_PPT_EXACT_DIMS = {(2, 2), (2, 3)}


@dataclass(frozen=True)
class FreeSetRelaxation:
    """A tractable outer relaxation of a separability-based free set.

    ``ppt-state``    states whose partial transpose across the cut is PSD;
                     exact at 2x2 / 2x3, otherwise an outer relaxation.
    ``ppt-choi``     channels whose Choi state is PPT across the side cut
                     (and trace preserving).
    ``sepp-sampled`` CP trace-preserving maps whose outputs on a seeded batch
                     of product pure inputs are PPT; the samples are separable
                     by construction, so the cone contains every
                     separability-preserving channel.
    """

    kind: str
    sample_count: int = 64
    sample_seed: int = 0

    @classmethod
    def ppt_state(cls) -> "FreeSetRelaxation":
        return cls(PPT_STATE)

    @classmethod
    def ppt_choi(cls) -> "FreeSetRelaxation":
        return cls(PPT_CHOI)

    @classmethod
    def sepp_sampled(cls, count: int = 64, seed: int = 0) -> "FreeSetRelaxation":
        if count < 1:
            raise ValueError("sample count must be >= 1")
        return cls(SEPP_SAMPLED, sample_count=count, sample_seed=seed)

    def samples_for(self, in_dims) -> list[DensityMatrix]:
        """Product pure input states for the sampled cone, seeded and reproducible."""
        rng = np.random.default_rng(self.sample_seed)
        return [tc.random_product_pure(in_dims, rng) for _ in range(self.sample_count)]


@dataclass(frozen=True)
class BoundedValue:
    """A computed monotone value with its bound direction and certificate."""

    value: float
    direction: str            # "lower" | "upper" | "exact"
    certificate: object
    relaxation: str | None
    epsilon: float = 0.0

    def __post_init__(self):
        if self.direction not in ("lower", "upper", "exact"):
            raise ValueError(f"invalid direction {self.direction!r}")


# ---------------------------------------------------------------------------
# cut / side handling
# ---------------------------------------------------------------------------

def _state_cut(rho: DensityMatrix, cut):
    """Positions of the two sides of a state cut; ``cut`` names one side."""
    cut = tuple(cut)
    side1 = rho.dims.indices(cut)
    side2 = tuple(i for i in range(len(rho.dims)) if i not in side1)
    if not side1 or not side2:
        raise DimensionError("cut must split the subsystems into two nonempty groups")
    d1 = int(np.prod([rho.dims.dims[i] for i in side1]))
    d2 = int(np.prod([rho.dims.dims[i] for i in side2]))
    return side1, side2, (d1, d2)


def _ppt_exact(side_dims) -> bool:
    return tuple(sorted(side_dims)) in _PPT_EXACT_DIMS


def side_positions(ch: ChoiChannel):
    """A-side and B-side subsystem positions in the joint Choi index.

    Uses the positional convention: the first half of the input (and of the
    output) subsystems is the A side.
    """
    n_in, n_out = len(ch.in_dims), len(ch.out_dims)
    if n_in % 2 or n_out % 2:
        raise DimensionError("side split needs an even number of subsystems "
                             f"(got {n_in} inputs, {n_out} outputs)")
    a = list(range(n_in // 2)) + [n_in + k for k in range(n_out // 2)]
    b = [k for k in range(n_in + n_out) if k not in a]
    return tuple(a), tuple(b)


def _choi_ppt_superop(ch: ChoiChannel) -> np.ndarray:
    _, b_side = side_positions(ch)
    joint = ch.joint.dims
    d = int(np.prod(joint))
    return tc.linmap_matrix(lambda m: tc.ptranspose(m, joint, b_side), d)


def _trace_out_superop(ch: ChoiChannel) -> np.ndarray:
    joint = ch.joint.dims
    d = int(np.prod(joint))
    keep = range(len(ch.in_dims))
    return tc.linmap_matrix(lambda m: tc.ptrace(m, joint, keep), d)


def _apply_superop_for_input(ch: ChoiChannel, sigma: np.ndarray) -> np.ndarray:
    """vec(J~) -> vec(output on ``sigma``) for an unnormalised Choi variable."""
    din, dout = ch.d_in, ch.d_out

    def act(j):
        jt = j.reshape(din, dout, din, dout)
        return np.einsum("irjs,ij->rs", jt, sigma)

    return tc.linmap_matrix(act, din * dout)


def _out_ppt_superop(ch: ChoiChannel) -> np.ndarray:
    n_out = len(ch.out_dims)
    b_out = tuple(range(n_out // 2, n_out))
    return tc.linmap_matrix(lambda m: tc.ptranspose(m, ch.out_dims.dims, b_out), ch.d_out)


# ---------------------------------------------------------------------------
# max relative entropy (exact, spectral)
# ---------------------------------------------------------------------------

def dmax_channels(n: ChoiChannel, m: ChoiChannel, *, support_rtol: float = 1e-10,
                  support_atol: float = 1e-9) -> BoundedValue:
    """log2 of the least lambda with lambda * J_m >= J_n; exact, no relaxation.

    Returns +inf when the support of J_n is not contained in the support of
    J_m.  Computed by a generalized eigenvalue problem on the support.
    """
    metrics._check_same_dims(n, m)
    jn, jm = n.choi.mat, m.choi.mat
    w, v = np.linalg.eigh(jm)
    cut = max(w.max(), 0.0) * support_rtol
    on = w > cut
    vs = v[:, on]
    proj = vs @ vs.conj().T
    resid = float(np.abs(jn - proj @ jn @ proj).max())
    if resid > support_atol:
        return BoundedValue(math.inf, "exact",
                            {"support_dim": int(on.sum()), "support_residual": resid},
                            relaxation=None)
    core = (vs.conj().T @ jn @ vs) / np.sqrt(w[on])[None, :] / np.sqrt(w[on])[:, None]
    lam = float(np.linalg.eigvalsh((core + core.conj().T) / 2)[-1])
    bits = max(math.log2(lam), 0.0) if lam > 0 else 0.0
    return BoundedValue(bits, "exact",
                        {"lambda": lam, "support_dim": int(on.sum()),
                         "support_residual": resid},
                        relaxation=None)


# ---------------------------------------------------------------------------
# state robustness
# ---------------------------------------------------------------------------

def gen_robustness_state(rho: DensityMatrix, cut, relax: FreeSetRelaxation, *,
                         gap_tol: float = conic.DEFAULT_GAP_TOL,
                         feas_tol: float = conic.DEFAULT_FEAS_TOL) -> BoundedValue:
    """Least lambda with rho <= lambda * omega for omega in the relaxed free set.

    Linear scale; a separable state gives 1.
    """
    if relax.kind != PPT_STATE:
        raise ValueError(f"state robustness expects the {PPT_STATE!r} relaxation")
    _, side2, side_dims = _state_cut(rho, cut)
    d = rho.dims.total_dim
    pt = tc.linmap_matrix(lambda m: tc.ptranspose(m, rho.dims.dims, side2), d)

    p = SdpProblem()
    w = p.herm_var("W", d)
    p.add_psd(w - rho.mat, tag="dominates")
    p.add_psd(w.apply(pt, d), tag="ppt")
    p.minimize(w.trace())
    sol = conic.solve(p, gap_tol=gap_tol, feas_tol=feas_tol).require_optimal()
    direction = "exact" if _ppt_exact(side_dims) else "lower"
    return BoundedValue(max(sol.primal_value, 1.0 - gap_tol), direction, sol, relax.kind)


def std_robustness_state(rho: DensityMatrix, cut, relax: FreeSetRelaxation, *,
                         gap_tol: float = conic.DEFAULT_GAP_TOL,
                         feas_tol: float = conic.DEFAULT_FEAS_TOL) -> BoundedValue:
    """Least lambda with (rho + (lambda-1) omega') / lambda free and omega' free.

    Linear scale; always at least the generalized robustness.
    """
    if relax.kind != PPT_STATE:
        raise ValueError(f"state robustness expects the {PPT_STATE!r} relaxation")
    _, side2, side_dims = _state_cut(rho, cut)
    d = rho.dims.total_dim
    pt = tc.linmap_matrix(lambda m: tc.ptranspose(m, rho.dims.dims, side2), d)

    p = SdpProblem()
    y = p.herm_var("Y", d)
    p.add_psd(y, tag="mix_psd")
    p.add_psd(y.apply(pt, d), tag="mix_ppt")
    p.add_psd((y + rho.mat).apply(pt, d), tag="sum_ppt")
    p.minimize(y.trace() + 1.0)
    sol = conic.solve(p, gap_tol=gap_tol, feas_tol=feas_tol).require_optimal()
    direction = "exact" if _ppt_exact(side_dims) else "lower"
    return BoundedValue(max(sol.primal_value, 1.0 - gap_tol), direction, sol, relax.kind)


# ---------------------------------------------------------------------------
# channel robustness (smoothed)
# ---------------------------------------------------------------------------

def _add_free_cone(p: SdpProblem, expr: MatExpr, ch: ChoiChannel,
                   relax: FreeSetRelaxation, samples, tag: str):
    """PSD blocks stating that a (scaled) Choi expression lies in the free cone."""
    if relax.kind == PPT_CHOI:
        p.add_psd(expr.apply(_choi_ppt_superop(ch), ch.d_in * ch.d_out), tag=f"{tag}_ppt")
    elif relax.kind == SEPP_SAMPLED:
        out_pt = _out_ppt_superop(ch)
        for i, s in enumerate(samples):
            act = _apply_superop_for_input(ch, s.mat)
            p.add_psd(expr.apply(out_pt @ act, ch.d_out), tag=f"{tag}_sample{i}")
    else:
        raise ValueError(f"channel robustness expects {PPT_CHOI!r} or {SEPP_SAMPLED!r}")


def _channel_robustness(n: ChoiChannel, relax: FreeSetRelaxation, epsilon: float,
                        standard: bool, gap_tol: float, feas_tol: float):
    # All Choi-valued variables are kept in unnormalised scale (d_in times the
    # Choi state): trace preservation then reads tr_out = I, which conditions
    # the solve much better.  Conversions back happen where variables are read.
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    d = n.d_in * n.d_out
    din = n.d_in
    trout = _trace_out_superop(n)
    samples = relax.samples_for(n.in_dims) if relax.kind == SEPP_SAMPLED else None
    eye_in = np.eye(din, dtype=complex)

    p = SdpProblem()
    if epsilon == 0.0:
        jp = MatExpr.constant(din * n.choi.mat)
    else:
        jp = p.herm_var("Jp", d)
        p.add_psd(jp, tag="jp_psd")
        p.add_eq(jp.apply(trout, din) - eye_in)
        metrics.diamond_ball_constraints(p, jp, n, epsilon, jp_scale=din)

    lam = p.scalar_var("lam")
    lam_eye = lam.apply(eye_in.reshape(-1, 1), din)
    if standard:
        v = p.herm_var("V", d)
        p.add_psd(v, tag="mix_psd")
        p.add_eq(v.apply(trout, din) - lam_eye + eye_in)
        _add_free_cone(p, v, n, relax, samples, tag="mix")
        _add_free_cone(p, jp + v, n, relax, samples, tag="total")
    else:
        # W >= Jp >= 0 already makes W PSD; stating it again degrades the solve
        w = p.herm_var("W", d)
        p.add_psd(w - jp, tag="dominates")
        p.add_eq(w.apply(trout, din) - lam_eye)
        _add_free_cone(p, w, n, relax, samples, tag="free")
    p.minimize(lam)
    sol = conic.solve(p, gap_tol=gap_tol, feas_tol=feas_tol).require_optimal()
    bits = max(math.log2(max(sol.primal_value, 1e-300)), 0.0)
    return bits, sol


def gen_log_robustness_channel(n: ChoiChannel, relax: FreeSetRelaxation,
                               epsilon: float = 0.0, *,
                               gap_tol: float = conic.DEFAULT_GAP_TOL,
                               feas_tol: float = conic.DEFAULT_FEAS_TOL) -> BoundedValue:
    """Smoothed generalized log-robustness of a channel (base-2), as one joint SDP.

    Minimises log2(lambda) such that some channel within half-diamond distance
    ``epsilon`` of ``n`` is dominated by lambda times a channel in the relaxed
    free cone.  The relaxations are outer, so the value is a lower bound on
    the exact separability-based quantity.
    """
    bits, sol = _channel_robustness(n, relax, epsilon, False, gap_tol, feas_tol)
    return BoundedValue(bits, "lower", sol, relax.kind, epsilon)


def std_log_robustness_channel(n: ChoiChannel, relax: FreeSetRelaxation,
                               epsilon: float = 0.0, *,
                               gap_tol: float = conic.DEFAULT_GAP_TOL,
                               feas_tol: float = conic.DEFAULT_FEAS_TOL) -> BoundedValue:
    """Smoothed standard log-robustness of a channel (base-2).

    As the generalized version but the subtracted mixing channel must itself
    lie in the free cone; the value always dominates the generalized one.
    """
    bits, sol = _channel_robustness(n, relax, epsilon, True, gap_tol, feas_tol)
    return BoundedValue(bits, "lower", sol, relax.kind, epsilon)


# ---------------------------------------------------------------------------
# multistart search over product pure states
# ---------------------------------------------------------------------------

def _ascend_product(dims, objective, rng, *, steps: int, step0: float,
                    init=None, shrink: float = 0.6, patience: int = 5):
    """Seeded random-direction hill climb over a product of unit spheres."""
    vecs = [v.copy() for v in init] if init is not None else \
        [tc.random_pure_vec(d, rng) for d in dims]
    best = objective(vecs)
    step, fails = step0, 0
    for _ in range(steps):
        k = int(rng.integers(len(vecs)))
        d = len(vecs[k])
        cand = list(vecs)
        v = vecs[k] + step * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
        cand[k] = v / np.linalg.norm(v)
        val = objective(cand)
        if val > best + 1e-14:
            vecs, best, fails = cand, val, 0
        else:
            fails += 1
            if fails >= patience:
                step *= shrink
                fails = 0
                if step < 1e-5:
                    break
    return best, vecs


def _product_mat(vecs) -> np.ndarray:
    v = vecs[0]
    for w in vecs[1:]:
        v = np.kron(v, w)
    return np.outer(v, v.conj())


def rob_gen_power(n: ChoiChannel, restarts: int = 32, seed: int = 0, *,
                  gap_tol: float = conic.DEFAULT_GAP_TOL,
                  feas_tol: float = conic.DEFAULT_FEAS_TOL) -> BoundedValue:
    """Largest output robustness found over product pure inputs (linear scale).

    The exact quantity maximises over all separable inputs, but the objective
    is convex in the input state, so pure products suffice.  Multistart local
    ascent guided by output negativity, polished against the SDP objective;
    the returned value is a certified lower bound (the best input found is
    part of the certificate).
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if len(n.in_dims) != 2 or len(n.out_dims) != 2:
        raise DimensionError("robustness-generating power expects a bipartite channel")
    rng = np.random.default_rng(seed)
    out_dims = n.out_dims
    cut = [out_dims.labels[0]]
    relax = FreeSetRelaxation.ppt_state()
    b_out = (1,)

    def negativity(vecs) -> float:
        out = tc.apply_mat(n, _product_mat(vecs))
        pt = tc.ptranspose(out, out_dims.dims, b_out)
        return float(np.abs(np.linalg.eigvalsh(pt)).sum())

    def score(vecs) -> float:
        out = DensityMatrix(out_dims, tc.apply_mat(n, _product_mat(vecs)))
        return gen_robustness_state(out, cut, relax,
                                    gap_tol=gap_tol, feas_tol=feas_tol).value

    candidates = []
    for _ in range(restarts):
        _, vecs = _ascend_product(n.in_dims.dims, negativity, rng, steps=120, step0=0.5)
        candidates.append((score(vecs), vecs))
    candidates.sort(key=lambda t: -t[0])

    best_val, best_vecs = candidates[0]
    for val, vecs in candidates[:3]:
        polished, pvecs = _ascend_product(n.in_dims.dims, score, rng,
                                          steps=40, step0=0.05, init=vecs)
        if polished > best_val:
            best_val, best_vecs = polished, pvecs
    cert = {"input_vectors": [v.copy() for v in best_vecs],
            "restart_values": [v for v, _ in candidates]}
    return BoundedValue(best_val, "lower", cert, relax.kind)


def max_product_overlap(target: DensityMatrix, restarts: int = 32, seed: int = 0) -> float:
    """Multistart maximum of tr(target * product pure state) over product inputs."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    t = target.mat

    def overlap(vecs) -> float:
        v = vecs[0]
        for w in vecs[1:]:
            v = np.kron(v, w)
        return float(np.real(v.conj() @ t @ v))

    best = 0.0
    for _ in range(restarts):
        val, _ = _ascend_product(target.dims.dims, overlap, rng, steps=150, step0=0.5)
        best = max(best, val)
    return best
