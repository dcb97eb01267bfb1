"""Frame unitary, support analysis and canonical decomposition of maximal even experiments."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..constants import EPS_EQ, EPS_NORM, FORM_TOL, MAXIMALITY_TOL, SUPPORT_TOL
from ..errors import FormViolation, NotMaximal
from ..experiment import (
    Config,
    DeviceFamily,
    ExperimentTriple,
    _kron_all,
    block_diag,
    configs,
    evolve,
    simulate,
)
from ..linalg import ComplexOperator
from ..metrics import semi_general_interference


def compute_G(devices: DeviceFamily) -> ComplexOperator:
    """Block-diagonal unitary applying every device's setting-0 unitary, string by string."""
    blocks = np.stack([_kron_all([devices.unitaries[j, 0] for j in i]) for i in devices.strings()])
    return ComplexOperator(devices.space, block_diag(blocks), "unitary")


def string_index(i: Config, m: int) -> int:
    idx = 0
    for v in i:
        idx = idx * m + int(v)
    return idx


def block_slice(i: Config, m: int, k: int) -> slice:
    s = string_index(i, m)
    return slice(s * k, (s + 1) * k)


def block_indices(strings, m: int, k: int) -> list[int]:
    out = []
    for i in strings:
        s = string_index(i, m)
        out.extend(range(s * k, (s + 1) * k))
    return sorted(out)


def string_weights(psi: np.ndarray, devices: DeviceFamily) -> dict[Config, float]:
    k = devices.d ** devices.n
    rows = np.asarray(psi).reshape(-1, k)
    return {i: float(np.vdot(r, r).real) for i, r in zip(devices.strings(), rows)}


def support_strings(psi: np.ndarray, devices: DeviceFamily, tol: float = SUPPORT_TOL) -> list[Config]:
    """Spatial strings carrying weight above ``tol``."""
    return [i for i, p in string_weights(psi, devices).items() if p > tol]


def tilde(t_devices: DeviceFamily, g: np.ndarray, a, psi: np.ndarray) -> np.ndarray:
    """The evolved vector seen in the frame where every setting-0 device is undone."""
    return g.conj().T @ evolve(t_devices, a, psi)


def require_maximal(t: ExperimentTriple) -> float:
    value = semi_general_interference(simulate(t)).value
    if value < 0.5 - MAXIMALITY_TOL:
        raise NotMaximal(value)
    return value


def halves_key(h0, h1) -> tuple[tuple[int, ...], tuple[int, ...]]:
    h0, h1 = tuple(sorted(h0)), tuple(sorted(h1))
    return (h0, h1) if h0 < h1 else (h1, h0)


def bipartition_label(halves) -> str:
    return "{" + ",".join(map(str, halves[0])) + "}|{" + ",".join(map(str, halves[1])) + "}"


@dataclass(frozen=True)
class BranchForm:
    """One bipartition: its two halves, weight, phase and the two branch vectors."""

    halves: tuple[tuple[int, ...], tuple[int, ...]]
    weight: float
    phase: float
    beta0: np.ndarray
    beta1: np.ndarray

    @property
    def label(self) -> str:
        return bipartition_label(self.halves)


@dataclass(frozen=True)
class ComponentForm:
    weight: float
    psi: np.ndarray
    branches: tuple[BranchForm, ...]
    support_strings: tuple[Config, ...]
    reconstruction_error: float


@dataclass(frozen=True)
class CanonicalForm:
    """Decomposition of every ensemble member into balanced-bipartition branches.

    Branch vectors live in the frame of ``G``: the evolved state for ``a`` is
    ``G @ sum_B sqrt(q_B) s_B(a) (beta0 + (-1)**sum(a) beta1) / sqrt(2)`` with
    ``s_B(a) = (-1)**(sum of a over the first half)``. Phases are absorbed into
    the branch vectors, so every recorded ``phase`` is 0.
    """

    G: ComplexOperator
    n: int
    m: int
    d: int
    components: tuple[ComponentForm, ...]
    value: float

    @property
    def bipartitions(self) -> dict[tuple, float]:
        """Ensemble-averaged weight per bipartition."""
        out: dict[tuple, float] = {}
        for comp in self.components:
            for br in comp.branches:
                out[br.halves] = out.get(br.halves, 0.0) + comp.weight * br.weight
        return dict(sorted(out.items()))

    @property
    def support_strings(self) -> tuple[Config, ...]:
        seen = sorted({i for comp in self.components for i in comp.support_strings})
        return tuple(seen)

    def reconstruct(self, a, component: int = 0) -> np.ndarray:
        comp = self.components[component]
        total = sum(a) % 2
        acc = np.zeros(self.G.dim, dtype=complex)
        for br in comp.branches:
            s0 = (-1) ** (sum(a[j] for j in br.halves[0]) % 2)
            acc += np.sqrt(br.weight) * s0 * np.exp(1j * br.phase) * (br.beta0 + (-1) ** total * br.beta1) / np.sqrt(2)
        return self.G.entries @ acc


def single_device_tilde(devices: DeviceFamily, j: int) -> np.ndarray:
    return devices.unitaries[j, 0].conj().T @ devices.unitaries[j, 1]


def _apply_on_particle(vec: np.ndarray, op: np.ndarray, l: int, n: int, d: int) -> np.ndarray:
    t = vec.reshape((d,) * n)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [l])), 0, l)
    return t.reshape(-1)


def _component_form(t: ExperimentTriple, g: np.ndarray, weight: float, psi: np.ndarray) -> ComponentForm:
    dev = t.devices
    n, m, d = dev.n, dev.m, dev.d
    k = d ** n
    weights = string_weights(psi, dev)
    support = [i for i, p in weights.items() if p > SUPPORT_TOL]
    lost = sum(p for i, p in weights.items() if len(set(i)) < n)
    if lost > SUPPORT_TOL:
        raise FormViolation("support", lost, "weight on strings with repeated entries")
    rows = np.asarray(psi).reshape(-1, k)
    phis = {}
    for i in support:
        phi = rows[string_index(i, m)] / np.sqrt(weights[i])
        phis[i] = phi
        for l, j in enumerate(i):
            flipped = _apply_on_particle(phi, single_device_tilde(dev, j), l, n, d)
            res = float(np.linalg.norm(flipped + phi))
            if res > FORM_TOL:
                raise FormViolation("units", res, f"device {j} does not flip the sign at string {i}")
    groups: dict[tuple, dict[int, list[Config]]] = {}
    for i in support:
        rest = tuple(sorted(set(range(m)) - set(i)))
        key = halves_key(i, rest)
        side = 0 if tuple(sorted(i)) == key[0] else 1
        groups.setdefault(key, {0: [], 1: []})[side].append(i)
    branches = []
    for key in sorted(groups):
        sides = groups[key]
        w = [sum(weights[i] for i in sides[x]) for x in (0, 1)]
        q = w[0] + w[1]
        res = abs(w[0] - w[1])
        if res > FORM_TOL:
            raise FormViolation("probs", res, f"unbalanced halves in bipartition {bipartition_label(key)}")
        betas = []
        for x in (0, 1):
            beta = np.zeros(dev.dim, dtype=complex)
            for i in sides[x]:
                beta[block_slice(i, m, k)] = np.sqrt(2 * weights[i] / q) * phis[i]
            betas.append(beta)
        branches.append(BranchForm(key, q, 0.0, betas[0], betas[1]))
    # the frame where G is undone starts from psi itself on collision-free strings
    form = ComponentForm(weight, np.asarray(psi), tuple(branches), tuple(support), 0.0)
    err = 0.0
    probe = CanonicalForm(ComplexOperator(dev.space, g, "unitary"), n, m, d, (form,), 0.5)
    for a in configs(m):
        err = max(err, float(np.linalg.norm(probe.reconstruct(a) - evolve(dev, a, psi))))
    if err > FORM_TOL:
        raise FormViolation("reconstruction", err)
    return ComponentForm(weight, np.asarray(psi), tuple(branches), tuple(support), err)


def canonicalize(t: ExperimentTriple) -> CanonicalForm:
    """Extract the canonical branch decomposition of a maximal experiment with ``m = 2n``."""
    dev = t.devices
    if dev.arity != 2:
        raise FormViolation("alphabet", float(dev.arity - 2), "binary settings required")
    if dev.m != 2 * dev.n:
        raise FormViolation("order", float(abs(dev.m - 2 * dev.n)), "device count must be twice the particle count")
    value = require_maximal(t)
    g = compute_G(dev)
    comps = tuple(_component_form(t, g.entries, w, psi) for w, psi in t.ensemble if w > 0)
    total = sum(c.weight * sum(b.weight for b in c.branches) for c in comps)
    if abs(total - 1) > EPS_EQ:
        raise FormViolation("normalization", abs(total - 1))
    for c in comps:
        for br in c.branches:
            ov = abs(np.vdot(br.beta0, br.beta1))
            nrm = max(abs(np.linalg.norm(br.beta0) - 1), abs(np.linalg.norm(br.beta1) - 1))
            if ov > EPS_NORM or nrm > EPS_NORM:
                raise FormViolation("branches", max(ov, nrm))
    return CanonicalForm(g, dev.n, dev.m, dev.d, comps, value)


def all_bipartitions(m: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Unordered balanced splits of ``range(m)``, the half holding 0 first."""
    out = []
    for h0 in itertools.combinations(range(m), m // 2):
        if 0 in h0:
            out.append((h0, tuple(sorted(set(range(m)) - set(h0)))))
    return out
