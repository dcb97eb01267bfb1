"""Semi-general interference experiments and multiple-slit scenarios.

Layout of the composite space for ``n`` particles, ``m`` devices and internal
dimension ``d``: factors ``s1 .. sn`` (spatial, dimension ``m`` each) followed
by ``k1 .. kn`` (internal, dimension ``d`` each). A flat index is therefore
``spatial_flat * d**n + internal_flat`` and the global unitary is literally
block diagonal with one ``d**n`` block per spatial string. Device and mode
indices are zero-based throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .constants import DEFAULT_CAP, EPS_EQ, EPS_NORM
from .errors import CapacityExceeded, IncompleteTable, KindError, LocalityError, SpaceError
from .linalg import ComplexOperator, IndexSpace, StateVector

Config = tuple[int, ...]
Collision = Mapping[tuple[Config, Config], np.ndarray] | Callable[[Config, Config], np.ndarray] | None


def configs(m: int, arity: int = 2) -> list[Config]:
    """All configuration strings in lexicographic order."""
    return list(itertools.product(range(arity), repeat=m))


def composite_space(n: int, m: int, d: int) -> IndexSpace:
    return IndexSpace(tuple((f"s{l + 1}", m) for l in range(n)) + tuple((f"k{l + 1}", d) for l in range(n)))


def is_unitary(u: np.ndarray, tol: float = EPS_NORM) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol


def _kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for mat in mats:
        out = np.kron(out, mat)
    return out


@dataclass(frozen=True)
class DeviceFamily:
    """Local number-preserving devices.

    ``unitaries[j, x]`` is the ``d x d`` unitary device ``j`` applies to a
    particle passing through it under setting ``x``. ``collisions`` optionally
    fixes the block for spatial strings with repeated entries, either as a
    mapping ``(string, sub-config) -> matrix`` (sub-config lists the setting of
    each string entry) or as a callable ``(string, full config) -> matrix``.
    Unspecified collision blocks default to the product of single-device
    unitaries.
    """

    n: int
    unitaries: np.ndarray
    collisions: Collision = None

    def __post_init__(self):
        u = np.array(self.unitaries, dtype=complex)
        if u.ndim != 4 or u.shape[2] != u.shape[3]:
            raise SpaceError("unitaries must have shape (m, arity, d, d)")
        for j, x in itertools.product(range(u.shape[0]), range(u.shape[1])):
            if not is_unitary(u[j, x]):
                raise KindError(f"device {j} setting {x} is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "unitaries", u)
        if self.n < 1:
            raise SpaceError("need at least one particle")
        if (self.m * self.d) ** self.n > DEFAULT_CAP:
            raise CapacityExceeded(f"composite dimension {(self.m * self.d) ** self.n} exceeds {DEFAULT_CAP}")
        if isinstance(self.collisions, Mapping):
            frozen = {}
            for (i, sub), mat in self.collisions.items():
                i, sub = tuple(int(v) for v in i), tuple(int(v) for v in sub)
                if len(set(i)) == len(i):
                    raise LocalityError(f"override given for collision-free string {i}")
                if len(i) != self.n or len(sub) != self.n:
                    raise SpaceError(f"override key {(i, sub)} has the wrong length")
                for p, q in itertools.combinations(range(self.n), 2):
                    if i[p] == i[q] and sub[p] != sub[q]:
                        raise LocalityError(f"sub-config {sub} assigns two settings to device {i[p]}")
                mat = np.array(mat, dtype=complex)
                if mat.shape != (self.d ** self.n,) * 2 or not is_unitary(mat):
                    raise KindError(f"override at {i} is not a unitary on the internal space")
                mat.setflags(write=False)
                frozen[(i, sub)] = mat
            object.__setattr__(self, "collisions", frozen)

    @property
    def m(self) -> int:
        return self.unitaries.shape[0]

    @property
    def arity(self) -> int:
        return self.unitaries.shape[1]

    @property
    def d(self) -> int:
        return self.unitaries.shape[2]

    @property
    def spatial_dim(self) -> int:
        return self.m

    @property
    def per_device_unitaries(self) -> dict[tuple[int, int], np.ndarray]:
        return {(j, x): self.unitaries[j, x] for j in range(self.m) for x in range(self.arity)}

    @property
    def collision_overrides(self) -> Collision:
        return self.collisions

    @property
    def space(self) -> IndexSpace:
        return composite_space(self.n, self.m, self.d)

    @property
    def dim(self) -> int:
        return (self.m * self.d) ** self.n

    def strings(self) -> list[Config]:
        return list(itertools.product(range(self.m), repeat=self.n))

    def block(self, i: Config, a: Config) -> np.ndarray:
        """The ``d**n`` block acting on the internal space at spatial string ``i``."""
        i = tuple(i)
        sub = tuple(a[j] for j in i)
        if len(set(i)) < len(i) and self.collisions is not None:
            if callable(self.collisions):
                mat = np.asarray(self.collisions(i, tuple(a)), dtype=complex)
                if mat.shape != (self.d ** self.n,) * 2 or not is_unitary(mat):
                    raise KindError(f"override at {i} is not a unitary on the internal space")
                return mat
            if (i, sub) in self.collisions:
                return self.collisions[(i, sub)]
        return _kron_all([self.unitaries[j, x] for j, x in zip(i, sub)])

    def blocks(self, a: Config) -> np.ndarray:
        return np.stack([self.block(i, a) for i in self.strings()])


def _check_config(devices: DeviceFamily, a) -> Config:
    a = tuple(int(v) for v in a)
    if len(a) != devices.m or any(v < 0 or v >= devices.arity for v in a):
        raise SpaceError(f"configuration {a} is invalid for {devices.m} devices of arity {devices.arity}")
    return a


def block_diag(blocks: np.ndarray) -> np.ndarray:
    nb, k, _ = blocks.shape
    out = np.zeros((nb * k, nb * k), dtype=complex)
    for s in range(nb):
        out[s * k:(s + 1) * k, s * k:(s + 1) * k] = blocks[s]
    return out


def assemble_global_unitary(devices: DeviceFamily, a) -> ComplexOperator:
    """The global unitary for configuration ``a``: one block per spatial string."""
    a = _check_config(devices, a)
    return ComplexOperator(devices.space, block_diag(devices.blocks(a)), "unitary")


def evolve(devices: DeviceFamily, a, psi: np.ndarray) -> np.ndarray:
    """Apply the global unitary for ``a`` to a flat vector without building it."""
    a = _check_config(devices, a)
    k = devices.d ** devices.n
    rows = np.asarray(psi, dtype=complex).reshape(-1, k)
    out = np.einsum("sij,sj->si", devices.blocks(a), rows)
    return out.reshape(-1)


def check_locality(devices: DeviceFamily, tol: float = EPS_NORM) -> None:
    """Raise :class:`LocalityError` if some block depends on settings outside its string."""
    if devices.collisions is None or isinstance(devices.collisions, Mapping):
        return
    for i in devices.strings():
        if len(set(i)) == len(i):
            continue
        seen: dict[Config, np.ndarray] = {}
        for a in configs(devices.m, devices.arity):
            sub = tuple(a[j] for j in i)
            blk = devices.block(i, a)
            if sub in seen:
                if np.max(np.abs(seen[sub] - blk)) > tol:
                    raise LocalityError(f"block at string {i} depends on settings outside {sorted(set(i))}")
            else:
                seen[sub] = blk


@dataclass(frozen=True)
class ExperimentTriple:
    """Initial ensemble, device family and final POVM.

    ``ensemble`` is a tuple of ``(weight, flat state vector)``; ``povm`` is a
    tuple of effects (two for a binary measurement, ``arity`` for prime-d
    experiments).
    """

    ensemble: tuple[tuple[float, np.ndarray], ...]
    devices: DeviceFamily
    povm: tuple[np.ndarray, ...]

    def __post_init__(self):
        dim = self.devices.dim
        ens = []
        for w, psi in self.ensemble:
            if isinstance(psi, StateVector):
                psi = psi.amplitudes
            v = np.array(psi, dtype=complex).reshape(-1)
            if v.shape[0] != dim:
                raise SpaceError(f"state of length {v.shape[0]} on a space of dim {dim}")
            if abs(np.linalg.norm(v) - 1) > EPS_NORM:
                raise SpaceError("ensemble state is not normalized")
            if w < -EPS_EQ:
                raise SpaceError("negative ensemble weight")
            v.setflags(write=False)
            ens.append((float(w), v))
        if abs(sum(w for w, _ in ens) - 1) > EPS_EQ:
            raise SpaceError("ensemble weights do not sum to 1")
        effects = []
        for e in self.povm:
            if isinstance(e, ComplexOperator):
                e = e.entries
            e = np.array(e, dtype=complex)
            if e.shape != (dim, dim):
                raise SpaceError(f"effect of shape {e.shape} on a space of dim {dim}")
            if np.max(np.abs(e - e.conj().T)) > EPS_NORM or np.linalg.eigvalsh(e)[0] < -EPS_NORM:
                raise KindError("POVM effect is not positive semidefinite")
            e.setflags(write=False)
            effects.append(e)
        if len(effects) < 2:
            raise SpaceError("a POVM needs at least two effects")
        if np.max(np.abs(sum(effects) - np.eye(dim))) > EPS_NORM:
            raise KindError("POVM effects do not sum to the identity")
        object.__setattr__(self, "ensemble", tuple(ens))
        object.__setattr__(self, "povm", tuple(effects))

    @property
    def final_measurement(self) -> tuple[np.ndarray, ...]:
        return self.povm

    @property
    def n(self) -> int:
        return self.devices.n

    @property
    def m(self) -> int:
        return self.devices.m

    @property
    def d(self) -> int:
        return self.devices.d

    @classmethod
    def from_density(cls, rho: np.ndarray, devices: DeviceFamily, povm) -> "ExperimentTriple":
        """Eigendecompose a density matrix into an explicit ensemble."""
        rho = np.asarray(rho, dtype=complex)
        vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
        keep = vals > 1e-14
        w = vals[keep] / vals[keep].sum()
        ens = tuple((float(p), vecs[:, k]) for p, k in zip(w, np.flatnonzero(keep)))
        return cls(ens[::-1], devices, tuple(povm))

    def density(self) -> np.ndarray:
        return sum(w * np.outer(v, v.conj()) for w, v in self.ensemble)

    def with_povm(self, povm) -> "ExperimentTriple":
        return ExperimentTriple(self.ensemble, self.devices, tuple(povm))


@dataclass(frozen=True)
class ConditionalTable:
    """Outcome distributions for every configuration, in lexicographic order."""

    m: int
    alphabet: int
    probs: np.ndarray
    lossy: bool = False

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != self.alphabet ** self.m:
            raise IncompleteTable(f"expected {self.alphabet ** self.m} rows, got {p.shape[0] if p.ndim else 0}")
        sums = p.sum(axis=1)
        if self.lossy:
            if np.any(sums > 1 + EPS_EQ):
                raise IncompleteTable("a lossy row sums above one")
        elif np.any(np.abs(sums - 1) > EPS_EQ):
            raise IncompleteTable("a row does not sum to one")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def outcomes(self) -> int:
        return self.probs.shape[1]

    @property
    def configs(self) -> list[Config]:
        return configs(self.m, self.alphabet)

    @property
    def rows(self) -> dict[Config, np.ndarray]:
        return dict(zip(self.configs, self.probs))

    def row(self, a) -> np.ndarray:
        idx = 0
        for v in a:
            idx = idx * self.alphabet + int(v)
        return self.probs[idx]

    @classmethod
    def from_rows(cls, rows: Mapping[Config, Sequence[float]], m: int, alphabet: int = 2) -> "ConditionalTable":
        missing = [a for a in configs(m, alphabet) if tuple(a) not in rows]
        if missing:
            raise IncompleteTable(f"missing rows for {missing[:4]}")
        return cls(m, alphabet, np.array([rows[a] for a in configs(m, alphabet)], dtype=float))


def outcome_probs(t: ExperimentTriple, a) -> np.ndarray:
    probs = np.zeros(len(t.povm))
    for w, psi in t.ensemble:
        phi = evolve(t.devices, a, psi)
        for b, eff in enumerate(t.povm):
            probs[b] += w * float(np.real(np.vdot(phi, eff @ phi)))
    return probs


def simulate(t: ExperimentTriple) -> ConditionalTable:
    """Outcome table: row ``a`` holds ``Tr(Pi_b U(a) rho U(a)^dagger)``."""
    rows = [outcome_probs(t, a) for a in configs(t.m, t.devices.arity)]
    return ConditionalTable(t.m, t.devices.arity, np.array(rows))


def evolved_density(t: ExperimentTriple, a) -> np.ndarray:
    out = np.zeros((t.devices.dim,) * 2, dtype=complex)
    for w, psi in t.ensemble:
        phi = evolve(t.devices, a, psi)
        out += w * np.outer(phi, phi.conj())
    return out


# multiple-slit scenarios


@dataclass(frozen=True)
class SlitScenario:
    """Single particle, ``m`` slits, propagation to screen positions.

    ``propagation`` is an isometry (screen modes x slit modes); a closed slit
    annihilates the amplitude on its mode.
    """

    input_state: np.ndarray
    propagation: np.ndarray
    screen_positions: tuple[Hashable, ...] = field(default=())

    def __post_init__(self):
        psi = np.array(self.input_state, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(psi) - 1) > EPS_NORM:
            raise SpaceError("slit input state is not normalized")
        v = np.array(self.propagation, dtype=complex)
        if v.ndim != 2 or v.shape[1] != psi.shape[0]:
            raise SpaceError("propagation must map the slit modes")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > EPS_NORM:
            raise KindError("propagation is not an isometry")
        labels = tuple(self.screen_positions) or tuple(range(v.shape[0]))
        if len(labels) != v.shape[0]:
            raise SpaceError("one label per screen position required")
        for arr in (psi, v):
            arr.setflags(write=False)
        object.__setattr__(self, "input_state", psi)
        object.__setattr__(self, "propagation", v)
        object.__setattr__(self, "screen_positions", labels)

    @property
    def m(self) -> int:
        return self.input_state.shape[0]


def simulate_slits(s: SlitScenario, a) -> dict[Hashable, float]:
    """Detection probability at each screen position with slit ``j`` open iff ``a[j] == 1``."""
    a = tuple(int(v) for v in a)
    if len(a) != s.m:
        raise SpaceError(f"configuration of length {len(a)} for {s.m} slits")
    amp = s.propagation @ (s.input_state * np.array(a, dtype=float))
    return {y: float(abs(c) ** 2) for y, c in zip(s.screen_positions, amp)}


def slit_table(s: SlitScenario) -> dict[tuple[Hashable, Config], float]:
    out = {}
    for a in configs(s.m):
        for y, p in simulate_slits(s, a).items():
            out[(y, a)] = p
    return out


def fourier(m: int) -> np.ndarray:
    j, k = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return np.exp(2j * np.pi * j * k / m) / np.sqrt(m)


def double_slit() -> SlitScenario:
    """Balanced two-slit input with Fourier propagation to two screen positions."""
    return SlitScenario(np.ones(2) / np.sqrt(2), fourier(2), ("y0", "y1"))


def multi_slit(m: int = 3, rng: np.random.Generator | None = None) -> SlitScenario:
    """Uniform input; Fourier propagation, or Haar-random when ``rng`` is given."""
    from .linalg import haar_unitary, random_state

    if rng is None:
        return SlitScenario(np.ones(m) / np.sqrt(m), fourier(m), tuple(f"y{k}" for k in range(m)))
    return SlitScenario(random_state(m, rng), haar_unitary(m, rng), tuple(f"y{k}" for k in range(m)))


# worked examples

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def phase_devices(m: int, n: int = 1) -> DeviceFamily:
    """Devices that multiply a passing particle's amplitude by ``(-1)**a_j``."""
    u = np.zeros((m, 2, 1, 1), dtype=complex)
    u[:, 0] = 1
    u[:, 1] = -1
    return DeviceFamily(n, u)


def parity_of_pm(n: int, m: int, pairs: Sequence[tuple[int, int]], d: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Binary POVM: particle ``l`` measured in the +/- basis of modes ``pairs[l]``, parity output.

    Weight outside a particle's mode pair is read as ``+``.
    """
    space = composite_space(n, m, d)
    from .linalg import embed

    minus_ops = []
    for l, (i, j) in enumerate(pairs):
        v = np.zeros(m, dtype=complex)
        v[i], v[j] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        minus_ops.append(np.outer(v, v.conj()))
    dim = space.total_dim
    effects = [np.zeros((dim, dim), dtype=complex), np.zeros((dim, dim), dtype=complex)]
    for bits in itertools.product((0, 1), repeat=n):
        local = [mo if b else np.eye(m) - mo for mo, b in zip(minus_ops, bits)]
        spatial = _kron_all(local)
        op = embed(spatial, [f"s{l + 1}" for l in range(n)], space).entries
        effects[sum(bits) % 2] += op
    return effects[0], effects[1]


def example1() -> ExperimentTriple:
    """Two spin-1/2 particles, one at each device; devices flip the spin; parity of z readouts."""
    n, m, d = 2, 2, 2
    u = np.zeros((m, 2, d, d), dtype=complex)
    u[:, 0] = np.eye(2)
    u[:, 1] = PAULI_X
    devices = DeviceFamily(n, u)
    space = devices.space
    psi = np.zeros(space.total_dim, dtype=complex)
    # particle 1 at device 0, particle 2 at device 1, both spin up
    psi[(0 * m + 1) * d * d + 0] = 1
    par = np.diag([1, 0, 0, 1]).astype(complex)
    from .linalg import embed

    pi0 = embed(par, ["k1", "k2"], space).entries
    return ExperimentTriple(((1.0, psi),), devices, (pi0, np.eye(space.total_dim) - pi0))


def example3(n: int = 2) -> ExperimentTriple:
    """``n`` particles, particle ``l`` spread evenly over modes ``2l`` and ``2l+1``.

    With ``n = 1`` this is the single-particle two-mode experiment with phase
    devices and a +/- readout.
    """
    m = 2 * n
    devices = phase_devices(m, n)
    single = []
    for l in range(n):
        v = np.zeros(m, dtype=complex)
        v[2 * l] = v[2 * l + 1] = 1 / np.sqrt(2)
        single.append(v.reshape(-1, 1))
    psi = _kron_all(single).reshape(-1)
    pi0, pi1 = parity_of_pm(n, m, [(2 * l, 2 * l + 1) for l in range(n)])
    return ExperimentTriple(((1.0, psi),), devices, (pi0, pi1))


def example2() -> ExperimentTriple:
    return example3(1)


def example3_mixed() -> ExperimentTriple:
    """Equal mixture of the two-particle layout and one with the roles of modes 1 and 2 swapped.

    The two components carry orthogonal internal tags (both particles in
    internal state 0, or both in 1); without the tags no single final
    measurement reaches maximal interference on the mixture.
    """
    n, m, d = 2, 4, 2
    u = np.zeros((m, 2, d, d), dtype=complex)
    u[:, 0] = np.eye(d)
    u[:, 1] = -np.eye(d)
    devices = DeviceFamily(n, u)

    def layout(groups, tag):
        parts = []
        for modes in groups:
            v = np.zeros(m, dtype=complex)
            v[list(modes)] = 1 / np.sqrt(2)
            parts.append(v)
        spatial = np.kron(parts[0], parts[1])
        internal = np.zeros(d * d, dtype=complex)
        internal[tag * (d + 1)] = 1
        return np.kron(spatial, internal)

    psi1 = layout([(0, 1), (2, 3)], 0)
    psi2 = layout([(0, 2), (1, 3)], 1)
    from .metrics import helstrom_optimize

    dim = devices.dim
    t = ExperimentTriple(((0.5, psi1), (0.5, psi2)), devices, (np.eye(dim), np.zeros((dim, dim))))
    return helstrom_optimize(t)


def qutrit_clock() -> ExperimentTriple:
    """One device, alphabet 3: a qutrit picks up the clock phase and is read in the Fourier basis."""
    w = np.exp(2j * np.pi / 3)
    u = np.stack([np.diag([w ** (x * k) for k in range(3)]) for x in range(3)]).reshape(1, 3, 3, 3)
    devices = DeviceFamily(1, u)
    psi = np.ones(3, dtype=complex) / np.sqrt(3)
    f = fourier(3)
    effects = tuple(np.outer(f[:, s], f[:, s].conj()) for s in range(3))
    return ExperimentTriple(((1.0, psi),), devices, effects)


def qutrit_two_mode() -> ExperimentTriple:
    """Single particle over two modes, devices apply phases ``w**a`` and ``w**(2a)``; trine readout."""
    w = np.exp(2j * np.pi / 3)
    u = np.zeros((2, 3, 1, 1), dtype=complex)
    for x in range(3):
        u[0, x] = w ** x
        u[1, x] = w ** (2 * x)
    devices = DeviceFamily(1, u)
    psi = np.ones(2, dtype=complex) / np.sqrt(2)
    # the state depends on (a1 + a2) mod 3 only through the relative phase w**(-(a1+a2))
    effects = []
    for s in range(3):
        v = np.array([1, w ** (-s)], dtype=complex) / np.sqrt(2)
        effects.append(2 / 3 * np.outer(v, v.conj()))
    return ExperimentTriple(((1.0, psi),), devices, tuple(effects))


def random_devices(n: int, m: int, d: int, rng: np.random.Generator, arity: int = 2) -> DeviceFamily:
    """Haar-random unitary for every device and setting."""
    from .linalg import haar_unitary

    u = np.stack([np.stack([haar_unitary(d, rng) for _ in range(arity)]) for _ in range(m)])
    return DeviceFamily(n, u)


def random_triple(n: int, m: int, d: int, rng: np.random.Generator, components: int = 1) -> ExperimentTriple:
    """Random devices, a random ensemble of pure states and a random binary POVM."""
    from .linalg import random_binary_povm, random_state

    devices = random_devices(n, m, d, rng)
    w = rng.dirichlet(np.ones(components)) if components > 1 else np.ones(1)
    ensemble = tuple((float(wi), random_state(devices.dim, rng)) for wi in w)
    return ExperimentTriple(ensemble, devices, random_binary_povm(devices.dim, rng))
