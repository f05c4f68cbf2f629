"""Tests for the diamond-norm distance and the smoothing constraint block."""

import numpy as np
import pytest

import oracles
from entcost import conic, metrics, tensorcore as tc
from entcost.tensorcore import DimSpec, DimensionError

QUBIT = DimSpec.of(("A", 2))
PAIR = DimSpec.of(("A", 2), ("B", 2))


def test_identical_channels_have_zero_distance(identity2):
    r = metrics.diamond_distance(identity2, identity2)
    assert r.status == "optimal"
    assert r.half_distance < 1e-9


def test_identity_vs_bit_flip_is_one():
    ident = tc.identity_channel(QUBIT)
    flip = tc.unitary_channel(np.array([[0, 1], [1, 0]]), QUBIT)
    r = metrics.diamond_distance(ident, flip)
    assert abs(r.half_distance - 1.0) < 1e-6
    # the |0> input already distinguishes the two perfectly
    out_i = np.diag([1.0, 0.0])
    out_x = np.diag([0.0, 1.0])
    assert abs(np.trace(out_i @ (out_i - out_x)).real - 1.0) < 1e-12
    assert abs(r.witness_value - r.half_distance) < 1e-6


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_depolarizing_matches_independent_oracle(p):
    ident = tc.identity_channel(QUBIT)
    dep = tc.choi_from_kraus(oracles.depolarizing_kraus(p), QUBIT, QUBIT)
    r = metrics.diamond_distance(ident, dep)
    expected = oracles.cvxpy_half_diamond(ident.choi.mat, dep.choi.mat, 2, 2)
    assert abs(r.half_distance - expected) < 1e-5
    assert abs(r.half_distance - 3 * p / 4) < 1e-6
    assert r.duality_gap <= 1e-7


def test_symmetry_and_triangle_inequality():
    chans = [tc.random_channel(PAIR, PAIR, 2, seed=s) for s in (1, 2, 3)]
    d = {}
    for i in range(3):
        for j in range(3):
            if i < j:
                d[i, j] = metrics.diamond_distance(chans[i], chans[j]).half_distance
                d[j, i] = metrics.diamond_distance(chans[j], chans[i]).half_distance
                assert abs(d[i, j] - d[j, i]) < 1e-7
    assert d[0, 2] <= d[0, 1] + d[1, 2] + 1e-7


def test_zero_distance_iff_equal_choi():
    a = tc.random_channel(PAIR, PAIR, 2, seed=5)
    b = tc.random_channel(PAIR, PAIR, 2, seed=6)
    assert metrics.diamond_distance(a, a).half_distance < 1e-9
    r = metrics.diamond_distance(a, b)
    gap = np.abs(a.choi.mat - b.choi.mat).max()
    assert r.half_distance > 1e-3 or gap < 1e-9


def test_witness_reproduces_value_on_random_instances():
    for s in range(4):
        a = tc.random_channel(PAIR, PAIR, 2, seed=10 + s)
        b = tc.random_channel(PAIR, PAIR, 3, seed=20 + s)
        r = metrics.diamond_distance(a, b)
        assert abs(r.witness_value - r.half_distance) < 1e-6
        # the witness is a valid state / effect pair
        assert abs(np.trace(r.witness_state.mat).real - 1.0) < 1e-10
        evals = np.linalg.eigvalsh(r.witness_effect)
        assert evals[0] > -1e-9 and evals[-1] < 1 + 1e-9


def test_dimension_mismatch_rejected():
    a = tc.identity_channel(QUBIT)
    b = tc.identity_channel(DimSpec.of(("A", 3)))
    with pytest.raises(DimensionError):
        metrics.diamond_distance(a, b)


# ---------------------------------------------------------------------------
# ball constraints
# ---------------------------------------------------------------------------

def _feasible_choi_in_ball(center, epsilon, objective_mat=None):
    """Solve a small feasibility/pushing problem inside the ball."""
    d = center.d_in * center.d_out
    din = center.d_in
    p = conic.SdpProblem()
    jp = p.herm_var("Jp", d)
    trout = np.zeros((din * din, d * d), dtype=complex)
    joint = center.joint.dims
    trout = tc.linmap_matrix(lambda m: tc.ptrace(m, joint, range(len(center.in_dims))), d)
    p.add_psd(jp, tag="psd")
    p.add_eq(jp.apply(trout, din) - np.eye(din) / din)
    metrics.diamond_ball_constraints(p, jp, center, epsilon)
    if objective_mat is None:
        p.minimize(conic.MatExpr.constant(0.0))
    else:
        p.minimize(jp.apply(objective_mat.T.reshape(1, -1), 1))
    sol = conic.solve(p)
    return sol


def test_ball_epsilon_zero_pins_the_center():
    center = tc.random_channel(QUBIT, QUBIT, 2, seed=9)
    sol = _feasible_choi_in_ball(center, 0.0, objective_mat=center.choi.mat)
    assert sol.status == "optimal"
    assert np.abs(sol.variables["Jp"] - center.choi.mat).max() < 1e-7
    back = tc.project_to_channel(sol.variables["Jp"], QUBIT, QUBIT)
    assert metrics.diamond_distance(back, center).half_distance < 1e-6


def test_ball_epsilon_one_admits_any_channel():
    center = tc.identity_channel(QUBIT)
    target = tc.unitary_channel(np.array([[0, 1], [1, 0]]), QUBIT)
    d = 4
    p = conic.SdpProblem()
    jp = p.herm_var("Jp", d)
    p.add_eq(jp - target.choi.mat)   # force the antipodal channel
    metrics.diamond_ball_constraints(p, jp, center, 1.0)
    p.minimize(conic.MatExpr.constant(0.0))
    sol = conic.solve(p)
    assert sol.status == "optimal"


def test_ball_feasible_points_reverify():
    center = tc.identity_channel(QUBIT)
    eps = 0.05
    sol = _feasible_choi_in_ball(center, eps, objective_mat=center.choi.mat)
    assert sol.status == "optimal"
    back = tc.project_to_channel(sol.variables["Jp"], QUBIT, QUBIT)
    assert metrics.diamond_distance(back, center).half_distance <= eps + 1e-6


def test_ball_rejects_negative_epsilon():
    center = tc.identity_channel(QUBIT)
    p = conic.SdpProblem()
    jp = p.herm_var("Jp", 4)
    with pytest.raises(ValueError):
        metrics.diamond_ball_constraints(p, jp, center, -0.1)
