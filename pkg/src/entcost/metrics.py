"""Diamond-norm distance between channels, as a value and as an SDP constraint block.

The formulation used for a difference of trace-preserving maps is: half the
diamond norm equals the least operator norm of the input marginal of a PSD
majorant of the (unnormalised) difference Choi matrix,

    (1/2) ||A - B||_diamond = min { ||tr_out Z||_inf : Z >= J_A - J_B, Z >= 0 }.

The formulation is validated in-suite rather than taken on faith: every solve
extracts the dual witness (an input state and a measurement effect) and checks
that it reproduces the primal value.  Unnormalised Choi matrices (scale
``d_in``) are used inside this module only; conversions happen at the
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic, tensorcore as tc
from .conic import MatExpr, SdpProblem
from .tensorcore import ChoiChannel, DensityMatrix, DimSpec, DimensionError


@dataclass
class DiamondResult:
    """Half diamond distance with its certificate."""

    half_distance: float
    duality_gap: float
    witness_state: DensityMatrix     # pure input on reference (x) channel input
    witness_effect: np.ndarray       # POVM element on reference (x) channel output
    witness_value: float             # value reproduced through the witness
    status: str
    solution: conic.SdpSolution


def _check_same_dims(a: ChoiChannel, b: ChoiChannel):
    if a.in_dims.dims != b.in_dims.dims or a.out_dims.dims != b.out_dims.dims:
        raise DimensionError(
            f"channel dimensions differ: {a.in_dims.dims}->{a.out_dims.dims} vs "
            f"{b.in_dims.dims}->{b.out_dims.dims}")


def _trace_out_superop(ch_like_in: DimSpec, ch_like_out: DimSpec) -> np.ndarray:
    joint = ch_like_in.dims + ch_like_out.dims
    keep = range(len(ch_like_in))
    d = int(np.prod(joint))
    return tc.linmap_matrix(lambda m: tc.ptrace(m, joint, keep), d)


def diamond_distance(a: ChoiChannel, b: ChoiChannel, *,
                     gap_tol: float = conic.DEFAULT_GAP_TOL,
                     feas_tol: float = conic.DEFAULT_FEAS_TOL) -> DiamondResult:
    """Half the diamond distance between two channels, with a dual witness."""
    _check_same_dims(a, b)
    din = a.d_in
    delta = din * (a.choi.mat - b.choi.mat)

    p = SdpProblem()
    z = p.herm_var("Z", delta.shape[0])
    mu = p.scalar_var("mu")
    trout = _trace_out_superop(a.in_dims, a.out_dims)
    eye_in = np.eye(din, dtype=complex)
    p.add_psd(z, tag="psd")
    p.add_psd(z - delta, tag="majorant")
    p.add_psd(mu.apply(eye_in.reshape(-1, 1), din) - z.apply(trout, din), tag="marginal")
    p.minimize(mu)
    sol = conic.solve(p, gap_tol=gap_tol, feas_tol=feas_tol)
    if sol.status in ("infeasible", "unbounded"):
        sol.require_optimal()

    # clip solver round-off into the valid range for differences of channels
    half = min(max(float(sol.primal_value), 0.0), 1.0)
    state, effect, wval = _extract_witness(a, b, delta, sol)
    return DiamondResult(half_distance=half, duality_gap=sol.duality_gap,
                         witness_state=state, witness_effect=effect,
                         witness_value=wval, status=sol.status, solution=sol)


def _extract_witness(a: ChoiChannel, b: ChoiChannel, delta: np.ndarray,
                     sol: conic.SdpSolution):
    """Input state and effect certifying the distance, from the cone duals.

    The dual pair is sigma (input marginal dual) and X with
    0 <= X <= sigma (x) I; the operational witness is the purification of
    sigma on a reference copy and the effect sigma^{-1/2} X sigma^{-1/2}.
    """
    din, dout = a.d_in, a.d_out
    sigma = sol.psd_duals["marginal"]
    x = sol.psd_duals["majorant"]
    tr_sigma = float(np.trace(sigma).real)
    if tr_sigma <= 1e-14:
        # distance is (numerically) zero; any state with a zero effect certifies it
        sigma = np.eye(din) / din
        x = np.zeros((din * dout, din * dout), dtype=complex)
    else:
        sigma = sigma / tr_sigma
        x = x / tr_sigma

    w, v = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    sq = (v * np.sqrt(w)) @ v.conj().T
    inv_sq = (v * np.where(w > 1e-12, 1.0 / np.sqrt(np.where(w > 1e-12, w, 1.0)), 0.0)) @ v.conj().T

    omega = np.zeros(din * din, dtype=complex)
    omega[[i * din + i for i in range(din)]] = 1.0
    psi_vec = np.kron(sq, np.eye(din)) @ omega
    psi_vec = psi_vec / np.linalg.norm(psi_vec)
    ref = DimSpec.of(("R", din))
    state = DensityMatrix(ref.tensor(a.in_dims), np.outer(psi_vec, psi_vec.conj()))

    effect = np.kron(inv_sq, np.eye(dout)) @ x @ np.kron(inv_sq, np.eye(dout))
    effect = (effect + effect.conj().T) / 2
    ew, ev = np.linalg.eigh(effect)
    effect = (ev * np.clip(ew, 0.0, 1.0)) @ ev.conj().T

    out_a = _extend_and_apply(a, state.mat, din)
    out_b = _extend_and_apply(b, state.mat, din)
    wval = float(np.trace(effect @ (out_a - out_b)).real)
    return state, effect, wval


def _extend_and_apply(ch: ChoiChannel, psi: np.ndarray, ref_dim: int) -> np.ndarray:
    """(id_ref (x) channel) applied to a state on reference (x) input."""
    din, dout = ch.d_in, ch.d_out
    s = tc.channel_superop(ch).reshape(dout, dout, din, din)
    t = psi.reshape(ref_dim, din, ref_dim, din)
    out = np.einsum("xyij,rilj->rxly", s, t)
    return out.reshape(ref_dim * dout, ref_dim * dout)


def diamond_ball_constraints(problem: SdpProblem, jp: MatExpr, center: ChoiChannel,
                             epsilon: float, tag: str = "ball",
                             jp_scale: float = 1.0) -> MatExpr:
    """Constrain the Choi variable ``jp`` to the half-diamond ball around ``center``.

    Emits a majorant variable and three PSD blocks so that every feasible
    ``jp`` is (``jp_scale`` times) the Choi state of a channel within
    half-diamond distance ``epsilon`` of the centre.  ``jp_scale = d_in``
    corresponds to an unnormalised Choi variable, which conditions the solve
    better.  Returns the majorant variable expression.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    din = center.d_in
    d = center.d_in * center.d_out
    z = problem.herm_var(f"{tag}_Z", d)
    trout = _trace_out_superop(center.in_dims, center.out_dims)
    # the majorant bounds the unnormalised difference Choi, d_in * (J' - J_c)
    delta = (jp - jp_scale * center.choi.mat) * (din / jp_scale)
    problem.add_psd(z, tag=f"{tag}_psd")
    problem.add_psd(z - delta, tag=f"{tag}_majorant")
    problem.add_psd(MatExpr.constant(epsilon * np.eye(din)) - z.apply(trout, din),
                    tag=f"{tag}_marginal")
    return z
