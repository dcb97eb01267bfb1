"""Mediated experiments: data model and the simulation engine.

A completion is a sequence applied to the evolved state: undo the frame
unitary ``G``, measure a projective branch family ``E``, apply a
per-branch (and per-ensemble-member) unitary ``W``, let each particle meet a
local three-outcome projective measurement (0, 1, or "none" when the particle
is outside the mode pair), and output the parity of the mediator bits, with
"none" read as 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ..experiment import ConditionalTable, ExperimentTriple, composite_space, configs, evolve
from ..linalg import embed

NONE = 2  # mediator record when the particle was not found on its mode pair


@dataclass(frozen=True)
class Branch:
    """One outcome of the branch measurement together with everything conditioned on it.

    ``unitaries[c]`` and ``local_effects[c][l]`` belong to ensemble member
    ``c``; ``local_effects[c][l]`` holds the three projectors of particle
    ``l`` as full-space matrices.
    """

    label: str
    projector: np.ndarray
    unitaries: tuple[np.ndarray, ...]
    local_effects: tuple[tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...], ...]
    mode_pairs: tuple[tuple[tuple[int, int], ...] | None, ...] = ()


@dataclass(frozen=True)
class CompletionArtifact:
    source: ExperimentTriple
    kind: str
    G: np.ndarray
    branches: tuple[Branch, ...]
    expected_weights: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    mediator_table: dict | None = None
    final_table: ConditionalTable | None = None
    transcript: object = None

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def E_family(self) -> dict[str, np.ndarray]:
        return {b.label: b.projector for b in self.branches}

    @property
    def H_family(self) -> dict[str, tuple[np.ndarray, ...]]:
        return {b.label: b.unitaries for b in self.branches}

    def with_unitary(self, label: str, component: int, u: np.ndarray) -> "CompletionArtifact":
        """Copy with one branch unitary replaced (used for negative controls)."""
        branches = []
        for b in self.branches:
            if b.label == label:
                us = list(b.unitaries)
                us[component] = np.asarray(u, dtype=complex)
                b = replace(b, unitaries=tuple(us))
            branches.append(b)
        return replace(self, branches=tuple(branches), mediator_table=None, final_table=None, transcript=None)


def mode_pair_effects(n: int, m: int, d: int, pairs) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
    """Projectors onto (|i> +/- |j>)/sqrt(2) on each particle's spatial factor, plus the remainder."""
    space = composite_space(n, m, d)
    out = []
    for l, (i, j) in enumerate(pairs):
        loc = []
        for b in (0, 1):
            v = np.zeros(m, dtype=complex)
            v[i] = 1 / np.sqrt(2)
            v[j] = (-1) ** b / np.sqrt(2)
            loc.append(np.kron(np.outer(v, v.conj()), np.eye(d)))
        loc.append(np.eye(m * d) - loc[0] - loc[1])
        out.append(tuple(embed(x, [f"s{l + 1}", f"k{l + 1}"], space).entries for x in loc))
    return tuple(out)


def idle_effects(n: int, dim: int) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
    zero = np.zeros((dim, dim), dtype=complex)
    return tuple((zero, zero, np.eye(dim, dtype=complex)) for _ in range(n))


def record_parity(rec) -> int:
    return sum(1 for r in rec if r == 1) % 2


def readout_effects(effects) -> tuple[np.ndarray, np.ndarray]:
    """The final parity measurement assembled from the mediator projectors."""
    dim = effects[0][0].shape[0]
    out = [np.zeros((dim, dim), dtype=complex), np.zeros((dim, dim), dtype=complex)]
    for rec in itertools.product(range(3), repeat=len(effects)):
        op = np.eye(dim, dtype=complex)
        for l, r in enumerate(rec):
            op = op @ effects[l][r]
        out[record_parity(rec)] += op
    return out[0], out[1]


@dataclass
class RunTables:
    """Every probability the pipeline produces, indexed by configuration."""

    branch: dict  # (a, label) -> P(branch | a)
    joint: dict  # (a, label, record) -> P(branch, record | a)
    readout: dict  # (a, label, record) -> (P(b=0 | ...), P(b=1 | ...)) or None if unreachable
    final: dict  # a -> (P(0|a), P(1|a)) through the summarized POVM
    n: int
    m: int

    def mediator(self, a, label=None) -> dict:
        """P(record | a) or P(record | a, branch) over binary records only."""
        out = {}
        for rec in itertools.product((0, 1), repeat=self.n):
            if label is None:
                out[rec] = sum(p for (aa, lab, r), p in self.joint.items() if aa == a and r == rec)
            else:
                pb = self.branch[(a, label)]
                out[rec] = self.joint[(a, label, rec)] / pb if pb > 0 else float("nan")
        return out

    def leakage(self, a) -> float:
        return sum(p for (aa, _, r), p in self.joint.items() if aa == a and NONE in r)


def run_pipeline(art: CompletionArtifact) -> RunTables:
    t = art.source
    n, m = t.n, t.m
    g_dag = art.G.conj().T
    branch, joint, readout, final = {}, {}, {}, {}
    readout_num: dict = {}
    records = list(itertools.product(range(3), repeat=n))
    povms = {}
    for c in range(len(t.ensemble)):
        povms[c] = summarized_povm(art, c)
    for a in configs(m, t.devices.arity):
        fin = np.zeros(2)
        for c, (w, psi) in enumerate(t.ensemble):
            evolved = evolve(t.devices, a, psi)
            fin += w * np.array([np.vdot(evolved, e @ evolved).real for e in povms[c]])
            v = g_dag @ evolved
            for br in art.branches:
                u = br.projector @ v
                pb = float(np.vdot(u, u).real)
                branch[(a, br.label)] = branch.get((a, br.label), 0.0) + w * pb
                x = br.unitaries[c] @ u
                effects = br.local_effects[c]
                ro = readout_effects(effects)
                for rec in records:
                    post = x
                    for l, r in enumerate(rec):
                        post = effects[l][r] @ post
                    pr = float(np.vdot(post, post).real)
                    key = (a, br.label, rec)
                    joint[key] = joint.get(key, 0.0) + w * pr
                    num = np.array([np.vdot(post, e @ post).real for e in ro])
                    readout_num[key] = readout_num.get(key, 0.0) + w * num
        final[a] = fin
    for key, num in readout_num.items():
        readout[key] = num / joint[key] if joint[key] > 1e-12 else None
    return RunTables(branch, joint, readout, final, n, m)


def summarized_povm(art: CompletionArtifact, component: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """The whole mediated readout folded into one POVM on the original system."""
    dim = art.G.shape[0]
    out = [np.zeros((dim, dim), dtype=complex), np.zeros((dim, dim), dtype=complex)]
    for br in art.branches:
        pre = br.unitaries[component] @ br.projector @ art.G.conj().T
        for b, eff in enumerate(readout_effects(br.local_effects[component])):
            out[b] += pre.conj().T @ eff @ pre
    return tuple((o + o.conj().T) / 2 for o in out)
