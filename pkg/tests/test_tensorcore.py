"""Tests for the tensor and Choi-matrix calculus."""

import numpy as np
import pytest

import oracles
from entcost import tensorcore as tc
from entcost.tensorcore import DimSpec, DimensionError


def test_dimspec_rejects_duplicate_labels():
    with pytest.raises(DimensionError):
        DimSpec.of(("A", 2), ("A", 3))


def test_dimspec_rejects_bad_dimension():
    with pytest.raises(DimensionError):
        DimSpec.of(("A", 0))


def test_hermitian_symmetrizes_roundoff():
    m = np.array([[1.0, 1e-10 + 1j], [0.0 - 1j, 2.0]])
    h = tc.HermMatrix(m)
    assert np.abs(h.mat - h.mat.conj().T).max() == 0.0


def test_hermitian_rejects_genuine_asymmetry():
    with pytest.raises(ValueError):
        tc.HermMatrix(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_density_matrix_validates_trace_and_psd():
    ds = DimSpec.of(("A", 2))
    with pytest.raises(ValueError):
        tc.DensityMatrix(ds, np.eye(2))           # trace 2
    with pytest.raises(ValueError):
        tc.DensityMatrix(ds, np.diag([1.5, -0.5]))


# ---------------------------------------------------------------------------
# partial trace / partial transpose
# ---------------------------------------------------------------------------

def test_partial_trace_of_max_entangled_is_maximally_mixed():
    phi = tc.max_entangled(2)
    red = tc.partial_trace(phi.matrix, phi.dims, ["A"])
    assert np.abs(red.mat - np.eye(2) / 2).max() < 1e-14


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(0)
    a = oracles.random_density(2, rng)
    b = oracles.random_density(3, rng)
    ds = DimSpec.of(("A", 2), ("B", 3))
    rho = tc.DensityMatrix(ds, np.kron(a, b))
    kept = tc.partial_trace(rho.matrix, ds, ["A"])
    assert np.abs(kept.mat - a).max() < 1e-12


def test_partial_trace_unknown_label():
    phi = tc.max_entangled(2)
    with pytest.raises(DimensionError):
        tc.partial_trace(phi.matrix, phi.dims, ["C"])


def test_partial_trace_choi_of_identity_gives_maximally_mixed():
    ch = tc.identity_channel(DimSpec.of(("A", 2)))
    red = tc.partial_trace(ch.choi.matrix, ch.joint, ["A"])
    assert np.abs(red.mat - np.eye(2) / 2).max() < 1e-12


def test_partial_transpose_min_eigenvalue_of_bell():
    # direct 4x4 eigendecomposition gives -1/2
    phi = tc.max_entangled(2)
    pt = tc.partial_transpose(phi.matrix, phi.dims, ["B"])
    assert abs(np.linalg.eigvalsh(pt.mat)[0] - (-0.5)) < 1e-12


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(1)
    ds = DimSpec.of(("A", 2), ("B", 3))
    for _ in range(10):
        rho = oracles.random_density(6, rng)
        h = tc.HermMatrix(rho)
        twice = tc.partial_transpose(tc.partial_transpose(h, ds, ["B"]), ds, ["B"])
        assert np.abs(twice.mat - h.mat).max() < 1e-14


def test_partial_transpose_preserves_product_spectrum():
    rng = np.random.default_rng(2)
    ds = DimSpec.of(("A", 2), ("B", 2))
    for _ in range(10):
        rho = np.kron(oracles.random_density(2, rng), oracles.random_density(2, rng))
        pt = tc.partial_transpose(tc.HermMatrix(rho), ds, ["B"])
        before = np.sort(np.linalg.eigvalsh(rho))
        after = np.sort(np.linalg.eigvalsh(pt.mat))
        assert np.abs(before - after).max() < 1e-12
        assert after[0] > -1e-12


# ---------------------------------------------------------------------------
# Choi construction and application
# ---------------------------------------------------------------------------

def test_choi_of_identity_is_max_entangled():
    ds = DimSpec.of(("A", 3))
    ch = tc.identity_channel(ds)
    assert np.abs(ch.choi.mat - tc.max_entangled(3).mat).max() < 1e-14


def test_choi_of_qubit_dephasing():
    ch = tc.dephasing_channel(DimSpec.of(("A", 2)))
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert np.abs(ch.choi.mat - expected).max() < 1e-14


def test_choi_of_replacer_channel():
    rng = np.random.default_rng(3)
    ds = DimSpec.of(("A", 2), ("B", 2))
    sigma = tc.DensityMatrix(ds, oracles.random_density(4, rng))
    ch = tc.replacer_channel(ds, sigma)
    assert np.abs(ch.choi.mat - np.kron(np.eye(4) / 4, sigma.mat)).max() < 1e-14


def test_incomplete_kraus_set_rejected():
    ds = DimSpec.of(("A", 2))
    with pytest.raises(ValueError):
        tc.choi_from_kraus([0.5 * np.eye(2)], ds, ds)


def test_apply_identity():
    rng = np.random.default_rng(4)
    ds = DimSpec.of(("A", 2), ("B", 2))
    rho = tc.DensityMatrix(ds, oracles.random_density(4, rng))
    out = tc.apply(tc.identity_channel(ds), rho)
    assert np.abs(out.mat - rho.mat).max() < 1e-14


def test_apply_dephasing_on_half_of_bell():
    # dephasing the A half of the maximally entangled state leaves the
    # classically correlated mixture (|00><00| + |11><11|) / 2
    ds = DimSpec.of(("A", 2), ("B", 2))
    kraus = [np.kron(np.diag([1.0, 0.0]), np.eye(2)),
             np.kron(np.diag([0.0, 1.0]), np.eye(2))]
    deph_a = tc.choi_from_kraus(kraus, ds, ds)
    out = tc.apply(deph_a, tc.max_entangled(2))
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert np.abs(out.mat - expected).max() < 1e-12


def test_apply_dimension_mismatch():
    ds = DimSpec.of(("A", 2))
    rho = tc.DensityMatrix(DimSpec.of(("A", 3)), np.eye(3) / 3)
    with pytest.raises(DimensionError):
        tc.apply(tc.identity_channel(ds), rho)


def test_apply_matches_kraus_sum_on_random_pairs():
    rng = np.random.default_rng(5)
    ds = DimSpec.of(("A", 2), ("B", 2))
    for trial in range(100):
        env = int(rng.integers(1, 5))
        ch = tc.random_channel(ds, ds, env, seed=1000 + trial)
        kraus = tc.kraus_from_choi(ch)
        rho = oracles.random_density(4, rng)
        direct = oracles.kraus_apply(kraus, rho)
        assert np.abs(tc.apply_mat(ch, rho) - direct).max() < 1e-10


def test_choi_kraus_round_trip():
    ds = DimSpec.of(("A", 2), ("B", 2))
    ch = tc.random_channel(ds, ds, 3, seed=7)
    back = tc.choi_from_kraus(tc.kraus_from_choi(ch), ch.in_dims, ch.out_dims)
    assert np.abs(back.choi.mat - ch.choi.mat).max() < 1e-12


# ---------------------------------------------------------------------------
# random channels
# ---------------------------------------------------------------------------

def test_random_channel_trace_preserving():
    ds = DimSpec.of(("A", 2), ("B", 2))
    for seed in range(5):
        ch = tc.random_channel(ds, ds, 3, seed=seed)
        marg = tc.partial_trace(ch.choi.matrix, ch.joint, ["A", "B"])
        assert np.abs(marg.mat - np.eye(4) / 4).max() < 1e-9


def test_random_channel_env_one_is_unitary():
    ds = DimSpec.of(("A", 3))
    ch = tc.random_channel(ds, ds, 1, seed=2)
    evals = np.linalg.eigvalsh(ch.choi.mat)
    assert (evals > 1e-10).sum() == 1


def test_random_channel_deterministic():
    ds = DimSpec.of(("A", 2), ("B", 2))
    a = tc.random_channel(ds, ds, 2, seed=42)
    b = tc.random_channel(ds, ds, 2, seed=42)
    assert np.array_equal(a.choi.mat, b.choi.mat)


def test_random_channel_env_must_be_positive():
    ds = DimSpec.of(("A", 2))
    with pytest.raises(ValueError):
        tc.random_channel(ds, ds, 0, seed=0)


def test_max_entangled_marginals_are_exact():
    for k in (2, 3, 4, 5):
        phi = tc.max_entangled(k)
        for side in ("A", "B"):
            red = tc.partial_trace(phi.matrix, phi.dims, [side])
            assert np.abs(red.mat - np.eye(k) / k).max() < 1e-12


def test_permutation_matrix_reorders_product_vectors():
    ds = DimSpec.of(("A", 2), ("Ap", 3), ("B", 2), ("Bp", 3))
    p = tc.permutation_matrix(ds, ["A", "B", "Ap", "Bp"])
    va, vap = np.arange(2), np.arange(3) + 10
    vb, vbp = np.arange(2) + 100, np.arange(3) + 1000
    original = np.kron(np.kron(va, vap), np.kron(vb, vbp)).astype(float)
    reordered = np.kron(np.kron(va, vb), np.kron(vap, vbp)).astype(float)
    assert np.abs(p @ original - reordered).max() == 0.0


def test_compose_channels():
    ds = DimSpec.of(("A", 2))
    deph = tc.dephasing_channel(ds)
    assert np.abs(tc.compose(deph, deph).choi.mat - deph.choi.mat).max() < 1e-12
