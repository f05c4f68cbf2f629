"""Dense Hermitian linear algebra and Choi-matrix calculus for small multipartite systems.

Everything is a plain complex ndarray underneath.  Subsystem structure is
carried by a ``DimSpec`` (ordered labels with dimensions); the tensor order is
always the listed order and all reorderings go through ``permutation_matrix``
so that no implicit index convention can creep in.

Choi matrices follow the trace-one state convention: for a channel with input
dimension ``d`` the Choi state is ``(1/d) * sum_ij |i><j| (x) N(|i><j|)``,
i.e. the (untouched) input copy is the *first* tensor factor and the channel
output the second.  Vectorisation of matrices is row-major (C order)
throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_REJECT_ATOL = 1e-8     # construction rejects anything more asymmetric
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
TP_ATOL = 1e-9
KRAUS_COMPLETE_ATOL = 1e-9


class DimensionError(ValueError):
    """Raised when labels or dimensions do not match an operation's contract."""


# ---------------------------------------------------------------------------
# dimension bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimSpec:
    """Ordered subsystem labels and dimensions; fixes the tensor order."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [l for l, _ in self.subsystems]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate subsystem labels: {labels}")
        for l, d in self.subsystems:
            if not isinstance(d, int) or d < 1:
                raise DimensionError(f"subsystem {l!r} has invalid dimension {d!r}")

    @classmethod
    def of(cls, *subsystems) -> "DimSpec":
        return cls(tuple((str(l), int(d)) for l, d in subsystems))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def __len__(self):
        return len(self.subsystems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"unknown subsystem label {label!r}; have {self.labels}")

    def indices(self, labels) -> tuple[int, ...]:
        return tuple(self.index(l) for l in labels)

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def keep(self, labels) -> "DimSpec":
        """Sub-spec of the given labels, preserving the original order."""
        wanted = set(labels)
        for l in labels:
            self.index(l)
        return DimSpec(tuple(s for s in self.subsystems if s[0] in wanted))

    def drop(self, labels) -> "DimSpec":
        for l in labels:
            self.index(l)
        unwanted = set(labels)
        return DimSpec(tuple(s for s in self.subsystems if s[0] not in unwanted))

    def tensor(self, other: "DimSpec") -> "DimSpec":
        return DimSpec(self.subsystems + other.subsystems)

    def permuted(self, order) -> "DimSpec":
        if sorted(order) != sorted(self.labels):
            raise DimensionError(f"{order} is not a permutation of {self.labels}")
        return DimSpec(tuple(self.subsystems[self.index(l)] for l in order))

    def relabeled(self, mapping) -> "DimSpec":
        return DimSpec(tuple((mapping.get(l, l), d) for l, d in self.subsystems))


# ---------------------------------------------------------------------------
# matrix wrappers
# ---------------------------------------------------------------------------

def _as_array(m) -> np.ndarray:
    return m.mat if hasattr(m, "mat") else np.asarray(m, dtype=complex)


class HermMatrix:
    """Hermitian matrix, symmetrised at construction.

    Inputs more asymmetric than ``HERM_REJECT_ATOL`` are rejected as genuine
    errors; anything below is treated as round-off and symmetrised away.
    """

    __slots__ = ("mat",)

    def __init__(self, mat, *, reject_atol: float = HERM_REJECT_ATOL):
        a = np.asarray(mat, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        asym = np.abs(a - a.conj().T).max() if a.size else 0.0
        if asym > reject_atol:
            raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
        h = (a + a.conj().T) / 2
        h.setflags(write=False)
        self.mat = h

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __repr__(self):
        return f"HermMatrix(dim={self.dim})"


class DensityMatrix:
    """Trace-one positive semidefinite Hermitian matrix on labelled subsystems."""

    __slots__ = ("dims", "matrix")

    def __init__(self, dims: DimSpec, matrix):
        h = matrix if isinstance(matrix, HermMatrix) else HermMatrix(matrix)
        if h.dim != dims.total_dim:
            raise DimensionError(f"matrix dim {h.dim} != product of {dims.dims}")
        tr = np.trace(h.mat).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr!r} is not 1 within {TRACE_ATOL}")
        lo = float(np.linalg.eigvalsh(h.mat)[0])
        if lo < -PSD_ATOL:
            raise ValueError(f"matrix is not PSD (min eigenvalue {lo:.3e})")
        self.dims = dims
        self.matrix = h

    @property
    def mat(self) -> np.ndarray:
        return self.matrix.mat

    def permuted(self, order) -> "DensityMatrix":
        p = permutation_matrix(self.dims, order)
        return DensityMatrix(self.dims.permuted(order), p @ self.mat @ p.T)

    def __repr__(self):
        return f"DensityMatrix({self.dims.labels}, dims={self.dims.dims})"


class ChoiChannel:
    """A channel represented by its trace-one Choi state.

    ``choi`` lives on ``in_dims (x) out_dims`` with the input copy first.
    Construction enforces PSD and trace preservation (the output marginal of
    the Choi state equals the maximally mixed state on the input).
    """

    __slots__ = ("in_dims", "out_dims", "choi")

    def __init__(self, in_dims: DimSpec, out_dims: DimSpec, choi: DensityMatrix):
        joint = joint_dims(in_dims, out_dims)
        if choi.dims.dims != joint.dims:
            raise DimensionError(
                f"Choi dims {choi.dims.dims} do not match in (x) out {joint.dims}")
        if choi.dims.labels != joint.labels:
            choi = DensityMatrix(joint, choi.mat)
        din = in_dims.total_dim
        marginal = ptrace(choi.mat, joint.dims, keep=range(len(in_dims)))
        if np.abs(marginal - np.eye(din) / din).max() > TP_ATOL:
            raise ValueError("Choi state is not trace preserving "
                             f"(output marginal deviates by "
                             f"{np.abs(marginal - np.eye(din)/din).max():.3e})")
        self.in_dims = in_dims
        self.out_dims = out_dims
        self.choi = choi

    @property
    def d_in(self) -> int:
        return self.in_dims.total_dim

    @property
    def d_out(self) -> int:
        return self.out_dims.total_dim

    @property
    def joint(self) -> DimSpec:
        return self.choi.dims

    def __repr__(self):
        return (f"ChoiChannel({self.in_dims.labels}->{self.out_dims.labels}, "
                f"{self.d_in}->{self.d_out})")


def joint_dims(in_dims: DimSpec, out_dims: DimSpec) -> DimSpec:
    """Input-first DimSpec for a Choi matrix, renaming clashing output labels."""
    taken = set(in_dims.labels)
    renamed = []
    for l, d in out_dims.subsystems:
        name = l if l not in taken else l + "_out"
        if name in taken:
            raise DimensionError(f"cannot derive a unique output label for {l!r}")
        taken.add(name)
        renamed.append((name, d))
    return in_dims.tensor(DimSpec(tuple(renamed)))


# ---------------------------------------------------------------------------
# raw-array tensor operations
# ---------------------------------------------------------------------------

def ptrace(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace keeping the subsystems at positions ``keep`` (array level)."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(keep)
    t = np.asarray(mat).reshape(dims + dims)
    traced = 0
    for ax in range(n):
        if ax in keep:
            continue
        pos = ax - traced  # row axis; matching column axis sits n - traced later
        t = np.trace(t, axis1=pos, axis2=pos + n - traced)
        traced += 1
    d = int(np.prod([dims[i] for i in keep], dtype=np.int64)) if keep else 1
    return t.reshape(d, d)


def ptranspose(mat: np.ndarray, dims, flip) -> np.ndarray:
    """Partial transpose on the subsystems at positions ``flip`` (array level)."""
    dims = tuple(dims)
    n = len(dims)
    t = np.asarray(mat).reshape(dims + dims)
    axes = list(range(2 * n))
    for ax in flip:
        axes[ax], axes[ax + n] = axes[ax + n], axes[ax]
    d = int(np.prod(dims, dtype=np.int64))
    return t.transpose(axes).reshape(d, d)


def permutation_matrix(dims: DimSpec, order) -> np.ndarray:
    """Real orthogonal P with (P psi) ordered by ``order`` when psi is ordered by ``dims``."""
    perm = dims.indices(order)
    d = dims.total_dim
    src = np.arange(d).reshape(dims.dims)
    dest = src.transpose(perm).reshape(-1)
    p = np.zeros((d, d))
    p[np.arange(d), dest] = 1.0
    return p


# ---------------------------------------------------------------------------
# public spec operations
# ---------------------------------------------------------------------------

def partial_trace(m: HermMatrix, dims: DimSpec, keep) -> HermMatrix:
    """Trace out everything except the subsystems named in ``keep``."""
    keep_idx = dims.indices(keep)
    return HermMatrix(ptrace(_as_array(m), dims.dims, keep_idx))


def partial_transpose(m: HermMatrix, dims: DimSpec, flip) -> HermMatrix:
    """Transpose the subsystems named in ``flip``."""
    flip_idx = dims.indices(flip)
    return HermMatrix(ptranspose(_as_array(m), dims.dims, flip_idx))


def choi_from_kraus(kraus, in_dims: DimSpec, out_dims: DimSpec) -> ChoiChannel:
    """Build the Choi channel of ``rho -> sum_a K_a rho K_a^dag``.

    The Kraus set must be complete (``sum K^dag K = I``) within
    ``KRAUS_COMPLETE_ATOL``.
    """
    din, dout = in_dims.total_dim, out_dims.total_dim
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise ValueError("empty Kraus set")
    for k in ops:
        if k.shape != (dout, din):
            raise DimensionError(f"Kraus operator shape {k.shape} != ({dout}, {din})")
    comp = sum(k.conj().T @ k for k in ops)
    err = np.abs(comp - np.eye(din)).max()
    if err > KRAUS_COMPLETE_ATOL:
        raise ValueError(f"Kraus set is not complete (deviation {err:.3e})")
    # vec(K) with v[i*dout + r] = K[r, i]; J = (1/din) sum vec(K) vec(K)^dag
    vecs = np.stack([k.T.reshape(-1) for k in ops])
    j = vecs.T @ vecs.conj() / din
    return ChoiChannel(in_dims, out_dims, DensityMatrix(joint_dims(in_dims, out_dims), j))


def kraus_from_choi(ch: ChoiChannel, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators recovered from the Choi eigendecomposition."""
    w, v = np.linalg.eigh(ch.choi.mat)
    cut = max(tol, w.max() * tol)
    ops = []
    for lam, vec in zip(w, v.T):
        if lam > cut:
            ops.append(np.sqrt(ch.d_in * lam) * vec.reshape(ch.d_in, ch.d_out).T)
    return ops


def channel_superop(ch: ChoiChannel) -> np.ndarray:
    """Matrix S with vec(N(rho)) = S vec(rho), row-major vec convention."""
    din, dout = ch.d_in, ch.d_out
    j = ch.choi.mat.reshape(din, dout, din, dout)
    return ch.d_in * j.transpose(1, 3, 0, 2).reshape(dout * dout, din * din)


def choi_from_superop(s: np.ndarray, in_dims: DimSpec, out_dims: DimSpec) -> ChoiChannel:
    din, dout = in_dims.total_dim, out_dims.total_dim
    j = s.reshape(dout, dout, din, din).transpose(2, 0, 3, 1).reshape(din * dout, din * dout)
    return ChoiChannel(in_dims, out_dims, DensityMatrix(joint_dims(in_dims, out_dims), j / din))


def apply(ch: ChoiChannel, rho: DensityMatrix) -> DensityMatrix:
    """Apply a channel to a state; dims must match the channel input."""
    if rho.dims.dims != ch.in_dims.dims:
        raise DimensionError(
            f"state dims {rho.dims.dims} do not match channel input {ch.in_dims.dims}")
    out = apply_mat(ch, rho.mat)
    return DensityMatrix(ch.out_dims, out)


def apply_mat(ch: ChoiChannel, mat: np.ndarray) -> np.ndarray:
    """Array-level channel application: d_in * tr_in[J (mat^T (x) I)]."""
    din, dout = ch.d_in, ch.d_out
    j = ch.choi.mat.reshape(din, dout, din, dout)
    return din * np.einsum("irjs,ij->rs", j, np.asarray(mat, dtype=complex))


def compose(after: ChoiChannel, before: ChoiChannel) -> ChoiChannel:
    """Channel composition ``after . before``."""
    if before.out_dims.dims != after.in_dims.dims:
        raise DimensionError("channel composition dimension mismatch")
    s = channel_superop(after) @ channel_superop(before)
    return choi_from_superop(s, before.in_dims, after.out_dims)


def random_channel(in_dims: DimSpec, out_dims: DimSpec, env_dim: int, seed: int) -> ChoiChannel:
    """Seeded Haar-style random channel via an isometric dilation.

    A complex Gaussian matrix is orthonormalised by QR (with a phase fix that
    makes the distribution basis-independent); ``env_dim = 1`` gives a unitary
    channel.  Deterministic for a fixed seed.
    """
    if env_dim < 1:
        raise ValueError(f"env_dim must be >= 1, got {env_dim}")
    din, dout = in_dims.total_dim, out_dims.total_dim
    if dout * env_dim < din:
        raise DimensionError("environment too small for an isometry "
                             f"({dout}*{env_dim} < {din})")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dout * env_dim, din)) + 1j * rng.standard_normal((dout * env_dim, din))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    kraus = [q[e::env_dim, :] for e in range(env_dim)]  # K_e[r, i] = V[r*env+e, i]
    return choi_from_kraus(kraus, in_dims, out_dims)


# ---------------------------------------------------------------------------
# state and channel constructors
# ---------------------------------------------------------------------------

def max_entangled(k: int, labels=("A", "B")) -> DensityMatrix:
    """The rank-k maximally entangled state Phi^k, entries written exactly as 1/k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m = np.zeros((k * k, k * k), dtype=complex)
    idx = [i * k + i for i in range(k)]
    m[np.ix_(idx, idx)] = 1.0 / k
    return DensityMatrix(DimSpec.of((labels[0], k), (labels[1], k)), m)


def max_entangled_vec(k: int) -> np.ndarray:
    v = np.zeros(k * k, dtype=complex)
    v[[i * k + i for i in range(k)]] = 1.0 / np.sqrt(k)
    return v


def pure_state(vec, dims: DimSpec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(dims, np.outer(v, v.conj()))


def product_density(*parts: DensityMatrix) -> DensityMatrix:
    mat = parts[0].mat
    dims = parts[0].dims
    for p in parts[1:]:
        mat = np.kron(mat, p.mat)
        dims = dims.tensor(p.dims)
    return DensityMatrix(dims, mat)


def random_pure_vec(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_product_pure(dims: DimSpec, rng: np.random.Generator) -> DensityMatrix:
    """Product of independent Haar-random local pure states."""
    vecs = [random_pure_vec(d, rng) for d in dims.dims]
    v = vecs[0]
    for w in vecs[1:]:
        v = np.kron(v, w)
    return DensityMatrix(dims, np.outer(v, v.conj()))


def identity_channel(dims: DimSpec) -> ChoiChannel:
    return choi_from_kraus([np.eye(dims.total_dim)], dims, dims)


def unitary_channel(u, in_dims: DimSpec, out_dims: DimSpec | None = None) -> ChoiChannel:
    return choi_from_kraus([np.asarray(u, dtype=complex)], in_dims, out_dims or in_dims)


def dephasing_channel(dims: DimSpec) -> ChoiChannel:
    """Full dephasing in the computational basis."""
    d = dims.total_dim
    kraus = []
    for i in range(d):
        k = np.zeros((d, d), dtype=complex)
        k[i, i] = 1.0
        kraus.append(k)
    return choi_from_kraus(kraus, dims, dims)


def replacer_channel(in_dims: DimSpec, sigma: DensityMatrix) -> ChoiChannel:
    """Channel that discards its input and outputs ``sigma``."""
    din = in_dims.total_dim
    j = np.kron(np.eye(din) / din, sigma.mat)
    joint = joint_dims(in_dims, sigma.dims)
    return ChoiChannel(in_dims, sigma.dims, DensityMatrix(joint, j))


def swap_unitary(d: int) -> np.ndarray:
    """The swap of two d-dimensional factors."""
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def project_to_channel(j_raw: np.ndarray, in_dims: DimSpec, out_dims: DimSpec,
                       rounds: int = 3) -> ChoiChannel:
    """Clean solver round-off from a near-Choi matrix.

    Alternates an exact trace-preservation correction with an eigenvalue clip;
    intended for deviations of order the solver feasibility tolerance only.
    """
    din, dout = in_dims.total_dim, out_dims.total_dim
    j = np.asarray(j_raw, dtype=complex)
    j = (j + j.conj().T) / 2
    for _ in range(rounds):
        marg = ptrace(j, (din, dout), keep=[0])
        j = j + np.kron(np.eye(din) / din - marg, np.eye(dout) / dout)
        w, v = np.linalg.eigh(j)
        if w[0] >= 0:
            break
        j = (v * np.clip(w, 0, None)) @ v.conj().T
        j = j / np.trace(j).real
    joint = joint_dims(in_dims, out_dims)
    return ChoiChannel(in_dims, out_dims, DensityMatrix(joint, j))


def linmap_matrix(f, dim_in: int) -> np.ndarray:
    """Matrix of a linear map on dim_in x dim_in matrices, row-major vec convention."""
    cols = []
    for i in range(dim_in):
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=complex)
            e[i, j] = 1.0
            cols.append(np.asarray(f(e), dtype=complex).reshape(-1))
    return np.stack(cols, axis=1)
