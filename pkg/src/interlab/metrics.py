"""Interference terms, split mixtures and the Helstrom bound."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Mapping, NamedTuple

import numpy as np

from .constants import EPS_EQ
from .errors import DomainError, IncompleteTable
from .experiment import ConditionalTable, ExperimentTriple, configs, evolved_density
from .linalg import ComplexOperator, IndexSpace, hermitian_eigensystem, trace_norm


@dataclass(frozen=True)
class InterferenceReport:
    m: int
    value: float
    maximal: bool
    per_y: dict | None = None


class PrimeInterference(NamedTuple):
    raw: float
    centered: float


class HelstromResult(NamedTuple):
    bound: float
    povm: tuple[np.ndarray, np.ndarray]


def slit_interference(table: Mapping[tuple[Hashable, tuple], float], m: int) -> dict[Hashable, float]:
    """Alternating sum over open/closed patterns, one value per screen position.

    ``table`` maps ``(y, a)`` to the detection probability, with ``a[j] = 1``
    meaning slit ``j`` open.
    """
    positions = []
    for y, _ in table:
        if y not in positions:
            positions.append(y)
    out = {}
    for y in positions:
        total = 0.0
        for a in configs(m):
            if (y, a) not in table:
                raise IncompleteTable(f"missing probability for position {y!r} and config {a}")
            sign = -1.0 if sum(a) % 2 else 1.0
            total += sign * table[(y, a)]
        out[y] = total
    return out


def semi_general_interference(table: ConditionalTable) -> InterferenceReport:
    """Average probability of outputting the parity of the inputs, minus one half."""
    if table.alphabet != 2 or table.outcomes != 2:
        raise DomainError("semi-general interference needs binary inputs and outputs")
    total = sum(table.row(a)[sum(a) % 2] for a in table.configs)
    value = float(total / 2 ** table.m - 0.5)
    return InterferenceReport(table.m, value, abs(value - 0.5) <= EPS_EQ)


def is_prime(d: int) -> bool:
    return d >= 2 and all(d % k for k in range(2, int(d ** 0.5) + 1))


def prime_d_interference(table: ConditionalTable, d: int) -> PrimeInterference:
    """Average probability of outputting the input sum mod ``d``.

    ``raw`` is the plain average; ``centered`` subtracts the value ``1/d`` a
    configuration-independent table attains, so it agrees with the binary
    term at ``d = 2``.
    """
    if not is_prime(int(d)):
        raise DomainError(f"{d} is not prime")
    if table.alphabet != d or table.outcomes != d:
        raise DomainError(f"table has arity {table.alphabet} and {table.outcomes} outcomes, expected {d}")
    raw = float(sum(table.row(a)[sum(a) % d] for a in table.configs) / d ** table.m)
    return PrimeInterference(raw, raw - 1.0 / d)


def split_states(t: ExperimentTriple) -> tuple[ComplexOperator, ComplexOperator]:
    """Uniform mixtures of the evolved states over even and odd configurations."""
    if t.devices.arity != 2:
        raise DomainError("split states need a binary alphabet")
    dim = t.devices.dim
    rho = [np.zeros((dim, dim), dtype=complex), np.zeros((dim, dim), dtype=complex)]
    for a in configs(t.m):
        rho[sum(a) % 2] += evolved_density(t, a)
    scale = 2.0 ** -(t.m - 1)
    space = t.devices.space
    return tuple(ComplexOperator(space, (r + r.conj().T) * scale / 2, "psd") for r in rho)


def _entries(x) -> np.ndarray:
    return x.entries if isinstance(x, ComplexOperator) else np.asarray(x, dtype=complex)


def helstrom(rho0, rho1) -> HelstromResult:
    """Optimal binary discrimination: bound ``||rho1 - rho0||_1 / 4`` and its projective POVM.

    Outcome 1 is the projector onto the strictly positive eigenspace of
    ``rho1 - rho0``; the zero eigenspace goes to outcome 0.
    """
    r0, r1 = _entries(rho0), _entries(rho1)
    diff = r1 - r0
    vals, vecs = hermitian_eigensystem(diff)
    pos = vecs[:, vals > 1e-12]
    p1 = pos @ pos.conj().T
    p0 = np.eye(diff.shape[0]) - p1
    return HelstromResult(trace_norm(diff) / 4, (p0, p1))


def discrimination_value(rho0, rho1, povm) -> float:
    """``(Tr P0 rho0 + Tr P1 rho1) / 2 - 1/2``."""
    r0, r1 = _entries(rho0), _entries(rho1)
    p0, p1 = (_entries(e) for e in povm)
    return float(np.real(np.trace(p0 @ r0) + np.trace(p1 @ r1)) / 2 - 0.5)


def helstrom_optimize(t: ExperimentTriple) -> ExperimentTriple:
    """Same state and devices with the final measurement replaced by the optimal one."""
    rho0, rho1 = split_states(t)
    _, povm = helstrom(rho0, rho1)
    return t.with_povm(povm)


def interference(t: ExperimentTriple) -> float:
    from .experiment import simulate

    return semi_general_interference(simulate(t)).value


def device_permuted(t: ExperimentTriple, perm) -> ExperimentTriple:
    """Relabel devices: new device ``k`` is old device ``perm[k]``; spatial modes follow."""
    from .experiment import DeviceFamily
    from .linalg import embed

    perm = list(perm)
    m, n, d = t.m, t.n, t.d
    if t.devices.collisions is not None:
        raise DomainError("relabeling families with collision overrides is not supported")
    devices = DeviceFamily(n, t.devices.unitaries[perm])
    inv = np.argsort(perm)
    p = np.zeros((m, m))
    for old in range(m):
        p[inv[old], old] = 1
    space = devices.space
    big = np.eye(1)
    for l in range(n):
        big = np.kron(big, p)
    full = embed(big, [f"s{l + 1}" for l in range(n)], space).entries
    ens = tuple((w, full @ psi) for w, psi in t.ensemble)
    povm = tuple(full @ e @ full.conj().T for e in t.povm)
    return ExperimentTriple(ens, devices, povm)
