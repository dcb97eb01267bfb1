"""Dense complex linear algebra over labeled tensor-factor spaces.

Factor order is row-major: the first factor of an :class:`IndexSpace` is the
most significant digit of a flat index. Every function here is pure and every
returned array is read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .constants import DEFAULT_CAP, EPS_NORM
from .errors import CapacityExceeded, GeometryError, KindError, LabelError, SpaceError

KINDS = ("general", "hermitian", "unitary", "psd")


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class IndexSpace:
    """Ordered list of ``(label, dimension)`` factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        facs = tuple((str(lab), int(dim)) for lab, dim in self.factors)
        object.__setattr__(self, "factors", facs)
        labels = [lab for lab, _ in facs]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate factor labels in {labels}")
        for lab, dim in facs:
            if dim < 1:
                raise SpaceError(f"factor {lab!r} has dimension {dim} < 1")

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> "IndexSpace":
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"unknown factor label {label!r}") from None

    def concat(self, other: "IndexSpace") -> "IndexSpace":
        return IndexSpace(self.factors + other.factors)


@dataclass(frozen=True)
class StateVector:
    """Amplitudes on an :class:`IndexSpace`; ``lossy`` allows norm below one."""

    space: IndexSpace
    amplitudes: np.ndarray
    lossy: bool = False

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != self.space.total_dim:
            raise SpaceError(f"expected {self.space.total_dim} amplitudes, got {amps.shape[0]}")
        norm = float(np.linalg.norm(amps))
        if self.lossy:
            if norm > 1 + EPS_NORM:
                raise GeometryError(f"lossy vector has norm {norm} > 1")
        elif abs(norm - 1) > EPS_NORM:
            raise GeometryError(f"state vector has norm {norm}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class ComplexOperator:
    """Square matrix on an :class:`IndexSpace` with a checked ``kind``."""

    space: IndexSpace
    entries: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        n = self.space.total_dim
        ent = _frozen(self.entries)
        if ent.shape != (n, n):
            raise SpaceError(f"operator shape {ent.shape} does not match space of dim {n}")
        if self.kind not in KINDS:
            raise KindError(f"unknown operator kind {self.kind!r}")
        object.__setattr__(self, "entries", ent)
        if self.kind in ("hermitian", "psd"):
            _require_hermitian(ent)
            if self.kind == "psd":
                low = float(np.linalg.eigvalsh(ent)[0]) if n else 0.0
                if low < -EPS_NORM:
                    raise KindError(f"operator declared psd has eigenvalue {low}")
        elif self.kind == "unitary":
            dev = np.max(np.abs(ent.conj().T @ ent - np.eye(n))) if n else 0.0
            if dev > EPS_NORM:
                raise KindError(f"operator declared unitary deviates by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def adjoint(self) -> "ComplexOperator":
        kind = self.kind if self.kind != "general" else "general"
        return ComplexOperator(self.space, self.entries.conj().T, kind)

    def apply(self, vec: StateVector | np.ndarray) -> np.ndarray:
        amps = vec.amplitudes if isinstance(vec, StateVector) else np.asarray(vec)
        return self.entries @ amps


def _require_hermitian(a: np.ndarray, tol: float = EPS_NORM):
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise KindError(f"operator is not Hermitian (deviation {dev:.3e})")


def as_operator(space: IndexSpace, entries, kind: str = "general") -> ComplexOperator:
    if isinstance(entries, ComplexOperator):
        entries = entries.entries
    return ComplexOperator(space, np.asarray(entries, dtype=complex), kind)


def flat_space(dim: int, label: str = "x") -> IndexSpace:
    return IndexSpace(((label, dim),))


def identity(space: IndexSpace) -> ComplexOperator:
    return ComplexOperator(space, np.eye(space.total_dim), "unitary")


def tensor_product(a: ComplexOperator, b: ComplexOperator, cap: int = DEFAULT_CAP) -> ComplexOperator:
    """Kronecker product; the result space concatenates the factor lists."""
    space = a.space.concat(b.space)
    if space.total_dim > cap:
        raise CapacityExceeded(f"total dimension {space.total_dim} exceeds cap {cap}")
    kinds = {a.kind, b.kind}
    kind = a.kind if len(kinds) == 1 else ("hermitian" if kinds <= {"hermitian", "psd"} else "general")
    return ComplexOperator(space, np.kron(a.entries, b.entries), kind)


def tensor_states(a: StateVector, b: StateVector, cap: int = DEFAULT_CAP) -> StateVector:
    space = a.space.concat(b.space)
    if space.total_dim > cap:
        raise CapacityExceeded(f"total dimension {space.total_dim} exceeds cap {cap}")
    return StateVector(space, np.kron(a.amplitudes, b.amplitudes), a.lossy or b.lossy)


def partial_trace(op: ComplexOperator, keep: Iterable[str]) -> ComplexOperator:
    """Trace out every factor whose label is not in ``keep``."""
    keep = set(keep)
    labels = op.space.labels
    unknown = keep - set(labels)
    if unknown:
        raise LabelError(f"unknown factor labels {sorted(unknown)}")
    dims = op.space.dims
    kept = [i for i, lab in enumerate(labels) if lab in keep]
    traced = [i for i, lab in enumerate(labels) if lab not in keep]
    dk = int(np.prod([dims[i] for i in kept], dtype=np.int64)) if kept else 1
    dt = int(np.prod([dims[i] for i in traced], dtype=np.int64)) if traced else 1
    nf = len(dims)
    t = op.entries.reshape(dims + dims)
    order = kept + traced + [nf + i for i in kept] + [nf + i for i in traced]
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    red = np.einsum("ajbj->ab", t)
    space = IndexSpace(tuple(op.space.factors[i] for i in kept))
    kind = "hermitian" if op.kind in ("hermitian", "psd") else "general"
    if op.kind == "psd":
        kind = "psd"
    return ComplexOperator(space, red, kind)


def embed(local: np.ndarray, targets: Sequence[str], space: IndexSpace) -> ComplexOperator:
    """Lift ``local`` acting on the factors ``targets`` (in that order) to ``space``."""
    pos = [space.position(t) for t in targets]
    if len(set(pos)) != len(pos):
        raise LabelError("repeated target label")
    dims = space.dims
    tdims = [dims[p] for p in pos]
    local = np.asarray(local, dtype=complex)
    dloc = int(np.prod(tdims, dtype=np.int64)) if tdims else 1
    if local.shape != (dloc, dloc):
        raise SpaceError(f"local operator shape {local.shape} does not match targets of dim {dloc}")
    rest = [i for i in range(len(dims)) if i not in pos]
    drest = int(np.prod([dims[i] for i in rest], dtype=np.int64)) if rest else 1
    full = np.kron(local, np.eye(drest))
    src = pos + rest  # factor order of ``full``
    nf = len(dims)
    t = full.reshape([dims[i] for i in src] * 2)
    inv = [src.index(i) for i in range(nf)]
    t = t.transpose(inv + [nf + k for k in inv])
    return ComplexOperator(space, t.reshape(space.total_dim, space.total_dim))


def hermitian_eigensystem(op: ComplexOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    a = op.entries if isinstance(op, ComplexOperator) else np.asarray(op, dtype=complex)
    _require_hermitian(a)
    a = (a + a.conj().T) / 2
    vals, vecs = np.linalg.eigh(a)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def trace_norm(op: ComplexOperator | np.ndarray) -> float:
    vals, _ = hermitian_eigensystem(op)
    return float(np.sum(np.abs(vals)))


def _orthonormal_columns(cols: np.ndarray, tol: float = EPS_NORM):
    if cols.shape[1] == 0:
        return
    gram = cols.conj().T @ cols
    dev = np.max(np.abs(gram - np.eye(cols.shape[1])))
    if dev > tol:
        raise GeometryError(f"family is not orthonormal (Gram deviation {dev:.3e})")


def _complete(cols: np.ndarray, within: Sequence[int]) -> np.ndarray:
    """Extend orthonormal ``cols`` to a basis of span{e_j : j in within}.

    Candidates are visited in canonical order and accepted when their residual
    after two rounds of projection exceeds 1/(2 sqrt(N)); a counting argument
    shows one pass always fills the complement.
    """
    dim = cols.shape[0]
    need = len(within) - cols.shape[1]
    thresh = 0.5 / np.sqrt(max(len(within), 1))
    basis = [cols[:, k] for k in range(cols.shape[1])]
    q = cols.copy()
    added = []
    for j in within:
        if len(added) == need:
            break
        v = np.zeros(dim, dtype=complex)
        v[j] = 1.0
        for _ in range(2):
            if q.shape[1]:
                v = v - q @ (q.conj().T @ v)
        nv = np.linalg.norm(v)
        if nv > thresh:
            v = v / nv
            added.append(v)
            q = np.column_stack([q, v])
    if len(added) != need:
        raise GeometryError("basis completion failed")
    return np.column_stack(basis + added) if basis or added else np.zeros((dim, 0), dtype=complex)


def extend_to_unitary(
    pairs: Sequence[tuple[StateVector | np.ndarray, StateVector | np.ndarray]],
    space: IndexSpace | None = None,
    within: Sequence[int] | None = None,
) -> ComplexOperator:
    """Unitary sending each ``in`` vector to its ``out`` vector.

    Both families must be orthonormal. The complement of the in-family is sent
    to the complement of the out-family, each completed in canonical basis
    order. With ``within`` the unitary acts on those coordinates only and is
    the identity elsewhere; all vectors must then be supported on ``within``.
    """
    if not pairs and space is None:
        raise GeometryError("cannot infer the space of an empty family")
    ins, outs = [], []
    for v_in, v_out in pairs:
        for v, bucket in ((v_in, ins), (v_out, outs)):
            if isinstance(v, StateVector):
                if space is None:
                    space = v.space
                elif v.space != space:
                    raise SpaceError("pair vectors live on different spaces")
                bucket.append(np.asarray(v.amplitudes))
            else:
                bucket.append(np.asarray(v, dtype=complex).reshape(-1))
    dim = space.total_dim if space is not None else len(ins[0])
    if space is None:
        space = flat_space(dim)
    for v in ins + outs:
        if v.shape[0] != dim:
            raise SpaceError("pair vector has the wrong length")
    within = list(range(dim)) if within is None else sorted(int(j) for j in within)
    outside = np.ones(dim, dtype=bool)
    outside[within] = False
    a_in = np.column_stack(ins) if ins else np.zeros((dim, 0), dtype=complex)
    a_out = np.column_stack(outs) if outs else np.zeros((dim, 0), dtype=complex)
    _orthonormal_columns(a_in)
    _orthonormal_columns(a_out)
    if np.any(np.abs(a_in[outside]) > EPS_NORM) or np.any(np.abs(a_out[outside]) > EPS_NORM):
        raise GeometryError("pair vectors leave the allowed coordinate block")
    full_in = _complete(a_in, within)
    full_out = _complete(a_out, within)
    u = np.eye(dim, dtype=complex)
    u[np.ix_(within, within)] = 0
    u += full_out @ full_in.conj().T
    # polish: the orthonormal inputs are only accurate to EPS_NORM
    w, _, vh = np.linalg.svd(u)
    polished = w @ vh
    return ComplexOperator(space, polished, "unitary")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_binary_povm(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = haar_unitary(dim, rng)
    lam = rng.uniform(0, 1, size=dim)
    p0 = (u * lam) @ u.conj().T
    p0 = (p0 + p0.conj().T) / 2
    return p0, np.eye(dim) - p0
