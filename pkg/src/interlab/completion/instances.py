"""Maximal experiments built to order: random canonical-form instances and the odd-order families.

Every builder works in the frame where each device's setting-0 unitary is
the identity, then optionally dresses the devices with random setting-0
unitaries (which leaves the statistics unchanged once the final measurement
is chosen optimally).
"""
from __future__ import annotations

import itertools

import numpy as np

from ..constants import EPS_EQ
from ..errors import ConstraintInfeasible
from ..experiment import PAULI_Z, DeviceFamily, ExperimentTriple, _kron_all
from ..linalg import haar_unitary
from ..metrics import helstrom_optimize
from .canonical import all_bipartitions, block_slice


def _sign_flipper(d: int, rank: int, rng: np.random.Generator | None) -> tuple[np.ndarray, np.ndarray]:
    """Unitary with a ``rank``-dimensional eigenvalue -1 eigenspace; returns it and that eigenspace's basis."""
    if rng is None:
        v = np.eye(d, dtype=complex)
        phases = np.ones(d, dtype=complex)
    else:
        v = haar_unitary(d, rng)
        phases = np.exp(1j * rng.uniform(0.3, 2 * np.pi - 0.3, size=d))
    phases[:rank] = -1
    return (v * phases) @ v.conj().T, v[:, :rank]


def _devices(tildes, n: int, rng, collisions: dict | None = None) -> DeviceFamily:
    m = len(tildes)
    d = tildes[0].shape[0]
    u = np.zeros((m, 2, d, d), dtype=complex)
    for j, ut in enumerate(tildes):
        u0 = np.eye(d, dtype=complex) if rng is None else haar_unitary(d, rng)
        u[j, 0] = u0
        u[j, 1] = u0 @ ut
    return DeviceFamily(n, u, collisions)


def _state(n: int, m: int, d: int, parts: dict) -> np.ndarray:
    """Flat vector from ``{string: amplitude-weighted internal vector}``."""
    k = d ** n
    psi = np.zeros((m * d) ** n, dtype=complex)
    for i, vec in parts.items():
        psi[block_slice(i, m, k)] += vec
    return psi / np.linalg.norm(psi)


def _random_collisions(devices_u: np.ndarray, n: int, rng: np.random.Generator) -> dict:
    m, _, d, _ = devices_u.shape
    out = {}
    for i in itertools.product(range(m), repeat=n):
        if len(set(i)) == n:
            continue
        for sub in itertools.product((0, 1), repeat=n):
            if any(i[p] == i[q] and sub[p] != sub[q] for p in range(n) for q in range(n)):
                continue
            out[(i, sub)] = haar_unitary(d ** n, rng)
    return out


def random_even_instance(n: int, d: int, rng: np.random.Generator, components: int = 1, collisions: bool = True) -> ExperimentTriple:
    """Random maximal experiment with ``m = 2n`` devices, sampled directly in canonical form.

    Each device flips the sign of a random subspace; every support string
    carries an internal state inside the product of those subspaces; the
    weights are balanced across the two halves of each chosen bipartition.
    With several components each member owns its own bipartitions, so the
    members sit on disjoint spatial strings and the mixture stays maximal.
    """
    m = 2 * n
    ranks = [int(rng.integers(1, d + 1)) for _ in range(m)]
    flips = [_sign_flipper(d, r, rng) for r in ranks]
    tildes = [f[0] for f in flips]
    spaces = [f[1] for f in flips]
    ensemble = []
    bips = all_bipartitions(m)
    if components > len(bips):
        raise ConstraintInfeasible(f"{components} components need {components} bipartitions, only {len(bips)} exist")
    cw = rng.dirichlet(np.ones(components)) if components > 1 else np.ones(1)
    # components own disjoint sets of bipartitions, hence disjoint spatial strings
    order = rng.permutation(len(bips))
    for c in range(components):
        own = [bips[idx] for idx in order[c::components]]
        count = int(rng.integers(1, len(own) + 1))
        chosen = [[list(itertools.permutations(h)) for h in own[x]] for x in range(count)]
        q = rng.dirichlet(np.ones(len(chosen)))
        parts = {}
        for qb, free in zip(q, chosen):
            for side in free:
                take = [s for s in side if rng.uniform() < 0.6] or [side[int(rng.integers(len(side)))]]
                ws = rng.dirichlet(np.ones(len(take))) * qb / 2
                for s, w in zip(take, ws):
                    basis = _kron_all([spaces[j] for j in s])
                    coef = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
                    phi = basis @ coef
                    phi /= np.linalg.norm(phi)
                    parts[s] = np.sqrt(w) * np.exp(2j * np.pi * rng.uniform()) * phi
        ensemble.append((float(cw[c]), _state(n, m, d, parts)))
    devices = _devices(tildes, n, rng)
    if collisions and n > 1:
        devices = DeviceFamily(n, devices.unitaries, _random_collisions(devices.unitaries, n, rng))
    dim = devices.dim
    t = ExperimentTriple(tuple(ensemble), devices, (np.eye(dim), np.zeros((dim, dim))))
    return helstrom_optimize(t)


def _qubit_with_z(value: float, rng=None) -> np.ndarray:
    """Unit vector ``xi`` with ``<xi|Z|xi> = value``."""
    theta = np.arccos(np.clip(value, -1, 1))
    phase = 0.0 if rng is None else rng.uniform(0, 2 * np.pi)
    return np.array([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phase)], dtype=complex)


def odd_case_i_instance(rng: np.random.Generator | None = None) -> ExperimentTriple:
    """Two particles, three devices, support on strings (0, 0) and (1, 2).

    Both particles passing device 0 pick up a joint sign through a collision
    block; on the other string each particle's device flips its sign.
    """
    n, m, d = 2, 3, 2
    z = PAULI_Z
    phi_k = np.kron([0, 1], [1, 0]).astype(complex)  # Z (x) Z gives -1
    phi_l = np.kron([0, 1], [0, 1]).astype(complex)
    tildes = [z, z, z]
    collisions = None
    if rng is not None:
        v = [haar_unitary(d, rng) for _ in range(m)]
        tildes = [vj @ z @ vj.conj().T for vj in v]
        phi_l = np.kron(v[1][:, 1], v[2][:, 1])
        phi_k = haar_unitary(d * d, rng)[:, 0]
    devices = _devices(tildes, n, rng)
    if rng is not None:
        u0 = devices.unitaries[0, 0]
        refl = np.eye(d * d) - 2 * np.outer(phi_k, phi_k.conj())
        collisions = {((0, 0), (1, 1)): np.kron(u0, u0) @ refl}
        devices = DeviceFamily(n, devices.unitaries, collisions)
    phase = 1.0 if rng is None else np.exp(2j * np.pi * rng.uniform())
    psi = _state(n, m, d, {(0, 0): phi_k, (1, 2): phase * phi_l})
    dim = devices.dim
    return helstrom_optimize(ExperimentTriple(((1.0, psi),), devices, (np.eye(dim), np.zeros((dim, dim)))))


def odd_case_ii_instance(overlap: float = 0.3, rng: np.random.Generator | None = None) -> ExperimentTriple:
    """Two particles, three devices, support on strings (0, 1) and (0, 2) sharing device 0.

    Device 0 acts on particle 1 with expectation ``overlap`` on one string and
    ``-overlap`` on the other; devices 1 and 2 flip particle 2's sign.
    """
    n, m, d = 2, 3, 2
    v = [np.eye(d, dtype=complex)] * m if rng is None else [haar_unitary(d, rng) for _ in range(m)]
    if rng is not None:
        overlap = float(rng.uniform(-1, 1))
    tildes = [vj @ PAULI_Z @ vj.conj().T for vj in v]
    xi = v[0] @ _qubit_with_z(overlap, rng)
    eta = v[0] @ _qubit_with_z(-overlap, rng)
    phi_k = np.kron(xi, v[1][:, 1])
    phi_l = np.kron(eta, v[2][:, 1])
    devices = _devices(tildes, n, rng)
    phase = 1.0 if rng is None else np.exp(2j * np.pi * rng.uniform())
    psi = _state(n, m, d, {(0, 1): phi_k, (0, 2): phase * phi_l})
    dim = devices.dim
    return helstrom_optimize(ExperimentTriple(((1.0, psi),), devices, (np.eye(dim), np.zeros((dim, dim)))))


def three_support_b01(p12: float, a01: float) -> float:
    return 2 * p12 * (1 - a01) - 1


def build_three_support_instance(p11: float, p12: float, a01: float, rng: np.random.Generator | None = None) -> ExperimentTriple:
    """Two particles, three devices, support on strings (0, 0), (1, 2) and (0, 1).

    String (1, 2) carries weight 1/2 and the other two share the rest.
    Device 1 acts on the particle passing it with expectation ``a01`` on
    string (0, 1) and with the derived expectation ``b01`` on string (1, 2);
    every other device flips the sign of the particle it meets.
    """
    if abs(p11 + p12 - 0.5) > EPS_EQ or p11 < 0 or p12 < 0:
        raise ConstraintInfeasible(f"weights ({p11}, {p12}) must be non-negative and sum to 1/2")
    if abs(a01) > 1:
        raise ConstraintInfeasible(f"|a01| = {abs(a01)} exceeds 1")
    b01 = three_support_b01(p12, a01)
    if abs(b01) > 1 + EPS_EQ:
        raise ConstraintInfeasible(f"derived b01 = {b01} lies outside [-1, 1]")
    n, m, d = 2, 3, 2
    v = [np.eye(d, dtype=complex)] * m if rng is None else [haar_unitary(d, rng) for _ in range(m)]
    tildes = [vj @ PAULI_Z @ vj.conj().T for vj in v]
    down = [vj[:, 1] for vj in v]  # sign-flipped vectors
    up = [vj[:, 0] for vj in v]
    phi_00 = np.kron(down[0], up[0])  # the joint block flips the sign once
    phi_01 = np.kron(down[0], v[1] @ _qubit_with_z(a01, rng))
    phi_12 = np.kron(v[1] @ _qubit_with_z(b01, rng), down[2])
    parts = {(1, 2): np.sqrt(0.5) * phi_12}
    if p11 > 0:
        parts[(0, 0)] = np.sqrt(p11) * phi_00
    if p12 > 0:
        parts[(0, 1)] = np.sqrt(p12) * phi_01
    devices = _devices(tildes, n, rng)
    psi = _state(n, m, d, parts)
    dim = devices.dim
    return helstrom_optimize(ExperimentTriple(((1.0, psi),), devices, (np.eye(dim), np.zeros((dim, dim)))))


def single_device_instance() -> ExperimentTriple:
    """One particle, one device flipping a qubit's phase, read out in the +/- basis."""
    u = np.stack([np.eye(2), PAULI_Z]).reshape(1, 2, 2, 2).astype(complex)
    devices = DeviceFamily(1, u)
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    return ExperimentTriple(((1.0, plus),), devices, (np.outer(plus, plus), np.outer(minus, minus)))


def perturbed(t: ExperimentTriple, device: int, angle: float, rng: np.random.Generator) -> ExperimentTriple:
    """Same experiment with one device's setting-1 unitary rotated by ``angle`` about a random axis."""
    d = t.d
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (h + h.conj().T) / 2
    if d > 1:
        # traceless generator: an identity component would only be a phase
        h -= np.trace(h) / d * np.eye(d)
    h /= np.linalg.norm(h, 2)
    vals, vecs = np.linalg.eigh(h)
    rot = (vecs * np.exp(1j * angle * vals)) @ vecs.conj().T
    u = np.array(t.devices.unitaries)
    u[device, 1] = rot @ u[device, 1]
    return ExperimentTriple(t.ensemble, DeviceFamily(t.n, u, t.devices.collisions), t.povm)
