"""Finite probabilistic event models on Minkowski sites.

A model stores one joint distribution over every site's outcome, so all
marginals are consistent by construction. Joints are dense arrays with one
axis per site, in site order; the flat form used for serialization is the
row-major ravel (first site most significant).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .constants import EPS_EQ
from .errors import (
    AnnotationError,
    DomainError,
    GeometryError,
    MapError,
    UnknownLabel,
    ZeroProbabilityCondition,
)
from .experiment import ConditionalTable, configs

CAUSAL_TOL = 1e-12


@dataclass(frozen=True)
class Site:
    label: str
    coords: tuple[float, float, float, float]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coords)
        if len(c) != 4:
            raise ValueError("coordinates are (t, x, y, z)")
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class PEModel:
    sites: tuple[Site, ...]
    alphabets: Mapping[str, tuple]
    joint: np.ndarray
    annotations: Mapping = field(default_factory=dict)

    def __post_init__(self):
        sites = tuple(self.sites)
        labels = [s.label for s in sites]
        if len(set(labels)) != len(labels):
            raise ValueError("site labels must be unique")
        alph = {lab: tuple(self.alphabets[lab]) for lab in labels}
        shape = tuple(len(alph[lab]) for lab in labels)
        joint = np.asarray(self.joint, dtype=float).reshape(shape)
        if np.any(joint < -EPS_EQ):
            raise ValueError("negative probability")
        if abs(joint.sum() - 1) > EPS_EQ:
            raise ValueError(f"joint sums to {joint.sum()}, not 1")
        joint = joint.copy()
        joint.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "alphabets", alph)
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "annotations", dict(self.annotations))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.sites)

    def site(self, label: str) -> Site:
        for s in self.sites:
            if s.label == label:
                return s
        raise UnknownLabel(f"no site {label!r}")

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"no site {label!r}") from None

    def marginal(self, labels: Sequence[str]) -> np.ndarray:
        """Joint of ``labels`` with axes in the order given."""
        axes = [self.axis(lab) for lab in labels]
        drop = tuple(i for i in range(len(self.sites)) if i not in axes)
        m = self.joint.sum(axis=drop) if drop else self.joint
        kept = sorted(axes)
        return np.transpose(m, [kept.index(a) for a in axes]) if axes else np.asarray(m)

    def index_of(self, label: str, outcome) -> int:
        try:
            return self.alphabets[label].index(outcome)
        except ValueError:
            raise DomainError(f"{outcome!r} is not an outcome at {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "sites": [{"label": s.label, "coords": list(s.coords)} for s in self.sites],
            "alphabets": {lab: list(self.alphabets[lab]) for lab in self.labels},
            "joint": [float(x) for x in self.joint.reshape(-1)],
            "annotations": _plain(self.annotations),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PEModel":
        sites = tuple(Site(s["label"], tuple(s["coords"])) for s in data["sites"])
        alph = {k: tuple(v) for k, v in data["alphabets"].items()}
        ann = {}
        for k, v in data.get("annotations", {}).items():
            ann[k] = {int(q): float(p) for q, p in v.items()} if isinstance(v, Mapping) else v
        return cls(sites, alph, np.asarray(data["joint"], dtype=float), ann)


def _plain(ann: Mapping) -> dict:
    out = {}
    for k, v in ann.items():
        out[k] = {str(q): float(p) for q, p in v.items()} if isinstance(v, Mapping) else v
    return out


def model_from_function(sites: Sequence[Site], alphabets: Mapping[str, tuple], prob, annotations=None) -> PEModel:
    """Build a model from ``prob(outcomes: dict label -> outcome) -> float``."""
    labels = [s.label for s in sites]
    shape = tuple(len(alphabets[lab]) for lab in labels)
    joint = np.zeros(shape)
    for idx in itertools.product(*(range(n) for n in shape)):
        joint[idx] = prob({lab: alphabets[lab][i] for lab, i in zip(labels, idx)})
    return PEModel(tuple(sites), alphabets, joint, annotations or {})


# causal structure


def causal_relation(a: Site, b: Site) -> str:
    """Relation of ``a`` to ``b``: precedes, succeeds, spacelike or identical (null separation is causal)."""
    dt = b.coords[0] - a.coords[0]
    dr2 = sum((q - p) ** 2 for p, q in zip(a.coords[1:], b.coords[1:]))
    if abs(dt) <= CAUSAL_TOL and dr2 <= CAUSAL_TOL**2:
        return "identical"
    interval = dt * dt - dr2
    if interval >= -CAUSAL_TOL:
        return "precedes" if dt > 0 else "succeeds"
    return "spacelike"


def _sites(model: PEModel, labels) -> list[Site]:
    return [model.site(lab) for lab in labels]


def geometry_check(model: PEModel, X: Sequence[str], y: str) -> bool:
    """Inputs mutually spacelike and the output in the causal future of each of them."""
    xs = _sites(model, X)
    ys = model.site(y)
    for p, q in itertools.combinations(xs, 2):
        if causal_relation(p, q) != "spacelike":
            return False
    return all(causal_relation(x, ys) == "precedes" for x in xs)


def causal_past(model: PEModel, X: Sequence[str]) -> list[str]:
    """Sites strictly preceding at least one of ``X``."""
    xs = _sites(model, X)
    return [s.label for s in model.sites if s.label not in X and any(causal_relation(s, x) == "precedes" for x in xs)]


# interference


def _require_binary(model: PEModel, labels):
    for lab in labels:
        if len(model.alphabets[lab]) != 2:
            raise DomainError(f"site {lab!r} needs a binary alphabet")


def _conditional(joint: np.ndarray, cond_axes: int, what: str) -> np.ndarray:
    """Normalize the trailing axes of ``joint`` given its leading ``cond_axes`` axes."""
    lead = joint.shape[:cond_axes]
    flat = joint.reshape(int(np.prod(lead, dtype=int)), -1)
    tot = flat.sum(axis=1)
    if np.any(tot <= 0):
        bad = np.unravel_index(int(np.argmin(tot)), lead)
        raise ZeroProbabilityCondition(f"{what}: conditioning event {tuple(int(b) for b in bad)} has probability 0")
    return (flat / tot[:, None]).reshape(joint.shape)


def induced_table(model: PEModel, X: Sequence[str], y: str) -> ConditionalTable:
    _require_binary(model, [*X, y])
    cond = _conditional(model.marginal([*X, y]), len(X), "inputs")
    rows = {a: cond[a] for a in configs(len(X))}
    return ConditionalTable.from_rows(rows, len(X))


def event_interference(model: PEModel, X: Sequence[str], y: str) -> float:
    """Average probability that ``y`` reports the parity of ``X``, minus one half."""
    if not geometry_check(model, X, y):
        raise GeometryError("inputs must be mutually spacelike and precede the output")
    table = induced_table(model, X, y)
    m = len(X)
    return sum(table.row(a)[sum(a) % 2] for a in configs(m)) / 2**m - 0.5


# refinement


def _check_maps(fine: PEModel, coarse: PEModel, maps: Mapping[str, Mapping]) -> dict:
    if set(fine.labels) != set(coarse.labels):
        raise MapError("models must share their site labels")
    out = {}
    for lab in fine.labels:
        f = maps.get(lab)
        if f is None:
            if fine.alphabets[lab] != coarse.alphabets[lab]:
                raise MapError(f"no map given for {lab!r} and the alphabets differ")
            f = {w: w for w in fine.alphabets[lab]}
        missing = [w for w in fine.alphabets[lab] if w not in f]
        if missing:
            raise MapError(f"map at {lab!r} undefined on {missing}")
        image = {f[w] for w in fine.alphabets[lab]}
        if image != set(coarse.alphabets[lab]):
            raise MapError(f"map at {lab!r} is not onto {list(coarse.alphabets[lab])}")
        out[lab] = f
    return out


def pushforward(fine: PEModel, coarse: PEModel, maps: Mapping[str, Mapping]) -> np.ndarray:
    maps = _check_maps(fine, coarse, maps)
    out = np.zeros(coarse.joint.shape)
    labels = fine.labels
    for idx in itertools.product(*(range(len(fine.alphabets[lab])) for lab in labels)):
        tgt = []
        for lab, i in zip(labels, idx):
            tgt.append(coarse.index_of(lab, maps[lab][fine.alphabets[lab][i]]))
        order = [coarse.axis(lab) for lab in labels]
        cidx = [0] * len(labels)
        for pos, t in zip(order, tgt):
            cidx[pos] = t
        out[tuple(cidx)] += fine.joint[idx]
    return out


def is_refinement(fine: PEModel, coarse: PEModel, maps: Mapping[str, Mapping]) -> bool:
    """Whether coarse-graining ``fine`` through the per-site surjections reproduces ``coarse``."""
    return bool(np.max(np.abs(pushforward(fine, coarse, maps) - coarse.joint)) <= EPS_EQ)


def compose_maps(f: Mapping[str, Mapping], g: Mapping[str, Mapping]) -> dict:
    """Site-wise ``g after f``."""
    return {lab: {w: g[lab][v] for w, v in f[lab].items()} for lab in f}


@dataclass(frozen=True)
class Verdict:
    passed: bool
    conditions: dict
    residuals: dict
    details: dict
    universally_decided: bool = False
    undecided: tuple = ()


def check_common_cause_exclusion(
    model: PEModel, X: Sequence[str], y: str, z: str, refinements: Sequence[tuple[PEModel, Mapping]]
) -> Verdict:
    """Evaluate the no-conspiracy implication on each listed refinement only.

    Wherever learning ``z`` changes the prediction for ``y`` beyond what the
    inputs give, the inputs must be independent of ``z``. A pass only covers
    the refinements supplied.
    """
    conditions, residuals, details = {}, {}, {}
    for k, (fine, maps) in enumerate(refinements):
        if not is_refinement(fine, model, maps):
            raise MapError(f"entry {k} is not a refinement of the model")
        for lab in [*X, y]:
            if len(fine.alphabets[lab]) != len(model.alphabets[lab]):
                raise MapError(f"entry {k} changes the alphabet at {lab!r}")
        j = fine.marginal([*X, z, y])
        p_xz = j.sum(axis=-1)
        p_x = p_xz.sum(axis=-1)
        p_z = p_xz.sum(axis=tuple(range(len(X))))
        p_xy = j.sum(axis=-2)
        worst_dep, worst_indep = 0.0, 0.0
        ok = True
        for xi in itertools.product(*(range(s) for s in p_x.shape)):
            if p_x[xi] <= 0:
                continue
            for zi in range(p_z.shape[0]):
                if p_xz[xi + (zi,)] <= 0:
                    continue
                gap = float(np.max(np.abs(j[xi + (zi,)] / p_xz[xi + (zi,)] - p_xy[xi] / p_x[xi])))
                if gap > EPS_EQ:
                    dep = float(abs(p_xz[xi + (zi,)] / p_z[zi] - p_x[xi]))
                    worst_dep = max(worst_dep, gap)
                    worst_indep = max(worst_indep, dep)
                    if dep > EPS_EQ:
                        ok = False
        conditions[k] = ok
        residuals[k] = float(worst_indep)
        details[k] = f"largest output shift from z {worst_dep:.3e}, input dependence on z {worst_indep:.3e}"
    return Verdict(all(conditions.values()), conditions, residuals, details, False, ("all refinements",))


def check_local_completion(
    t: PEModel,
    t_star: PEModel,
    X: Sequence[str],
    y: str,
    Y: Sequence[str],
    subsets: Sequence[Sequence[str]],
    z: str | None = None,
) -> Verdict:
    """Conditions 1 to 4 of a local completion with mediators ``Y``; the refinement condition is left undecided."""
    m, n = len(X), len(Y)
    ys = t_star.site(y)
    xs = _sites(t_star, X)
    meds = _sites(t_star, Y)
    for p, q in itertools.combinations(meds, 2):
        if causal_relation(p, q) != "spacelike":
            raise GeometryError(f"mediators {p.label} and {q.label} are not spacelike separated")
    for med in meds:
        if causal_relation(med, ys) != "precedes":
            raise GeometryError(f"mediator {med.label} does not precede {y}")
        if not any(causal_relation(x, med) == "precedes" for x in xs):
            raise GeometryError(f"mediator {med.label} is not in the future of any input")
    conditions, residuals, details = {}, {}, {}

    past = [lab for lab in causal_past(t_star, X) if lab in t.labels]
    past_orig = causal_past(t, X)
    if set(past) != set(past_orig):
        conditions[1], residuals[1] = False, 1.0
        details[1] = f"past sites differ: {sorted(past_orig)} vs {sorted(past)}"
    else:
        labs = [*past, *X]
        r = float(np.max(np.abs(t.marginal(labs) - t_star.marginal(labs))))
        conditions[1], residuals[1] = r <= EPS_EQ, r
        details[1] = f"compared sites {labs}"

    a = _conditional(t.marginal([*X, y]), m, "inputs")
    b = _conditional(t_star.marginal([*X, y]), m, "inputs")
    r = float(np.max(np.abs(a - b)))
    conditions[2], residuals[2], details[2] = r <= EPS_EQ, r, "output given inputs agrees"

    j = t_star.marginal([*X, *Y, y])
    p_y_given_x = _conditional(j.sum(axis=tuple(range(m, m + n))), m, "inputs")
    p_med_given_x = _conditional(j.sum(axis=-1), m, "inputs")
    med_y = j.sum(axis=tuple(range(m)))
    p_med = med_y.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_y_given_med = np.where(p_med[..., None] > 0, med_y / p_med[..., None], 0.0)
    chain = np.tensordot(p_med_given_x, p_y_given_med, axes=(list(range(m, m + n)), list(range(n))))
    r = float(np.max(np.abs(chain - p_y_given_x)))
    conditions[3], residuals[3], details[3] = r <= EPS_EQ, r, "output reached through the mediators"

    bound = math.ceil(m / n)
    worst, ok, notes = 0.0, True, []
    for med, sub in zip(Y, subsets):
        sub = list(sub)
        if len(sub) > bound:
            ok = False
            notes.append(f"{med} uses {len(sub)} inputs, bound {bound}")
            continue
        extra = [z] if z is not None else []
        full = _conditional(t_star.marginal([*X, *extra, med]), m + len(extra), "inputs")
        part = _conditional(t_star.marginal([*sub, *extra, med]), len(sub) + len(extra), "inputs")
        pos = [list(X).index(s) for s in sub]
        for idx in itertools.product(*(range(s) for s in full.shape[:-1])):
            key = tuple(idx[p] for p in pos) + tuple(idx[m:])
            worst = max(worst, float(np.max(np.abs(full[idx] - part[key]))))
    if worst > EPS_EQ:
        ok = False
        notes.append(f"mediator depends on inputs outside its subset by {worst:.3e}")
    conditions[4], residuals[4] = ok, worst
    details[4] = "; ".join(notes) or f"every mediator uses at most {bound} inputs"
    return Verdict(all(conditions.values()), conditions, residuals, details, False, (5,))


def check_closed(model: PEModel) -> bool:
    """Whether the particle-number distributions entering the inputs' and the output's past agree."""
    try:
        px = model.annotations["number_past_X"]
        py = model.annotations["number_past_y"]
    except KeyError as exc:
        raise AnnotationError(f"missing annotation {exc.args[0]}") from None
    keys = set(px) | set(py)
    return all(abs(px.get(k, 0.0) - py.get(k, 0.0)) <= EPS_EQ for k in keys)


# canonical layouts and bridges from the simulation side


def input_sites(m: int, radius: float = 1.0) -> list[Site]:
    out = []
    for j in range(m):
        ang = 2 * np.pi * j / m
        out.append(Site(f"x{j + 1}", (0.0, radius * np.cos(ang), radius * np.sin(ang), 0.0)))
    return out


def mediator_sites(n: int, radius: float = 0.5) -> list[Site]:
    out = []
    for l in range(n):
        ang = 2 * np.pi * l / max(n, 1)
        r = radius if n > 1 else 0.0
        out.append(Site(f"y{l + 1}", (1.0, r * np.cos(ang), r * np.sin(ang), 0.0)))
    return out


OUTPUT_SITE = Site("y", (2.0, 0.0, 0.0, 0.0))
SOURCE_SITE = Site("src", (-1.0, 0.0, 0.0, 0.0))


def export_table(table: ConditionalTable, numbers_x: Mapping | None = None, numbers_y: Mapping | None = None) -> PEModel:
    """Uniform inputs at the ``x`` sites, the table's output at ``y``."""
    m = table.m
    sites = [*input_sites(m), OUTPUT_SITE]
    joint = np.zeros((2,) * m + (2,))
    for a in configs(m):
        joint[a] = table.row(a) / 2**m
    alph = {s.label: (0, 1) for s in sites}
    ann = {}
    if numbers_x is not None:
        ann["number_past_X"] = dict(numbers_x)
    if numbers_y is not None:
        ann["number_past_y"] = dict(numbers_y)
    return PEModel(tuple(sites), alph, joint, ann)


def export_triple(t) -> PEModel:
    from .experiment import simulate

    return export_table(simulate(t), {t.n: 1.0}, {t.n: 1.0})


def export_mediated(records: Mapping, n: int, m: int, numbers_x=None, numbers_y=None) -> PEModel:
    """Model with inputs, ``n`` mediator sites and the output, from ``records[a][(rec, b)] = P(rec, b | a)``."""
    sites = [*input_sites(m), *mediator_sites(n), OUTPUT_SITE]
    joint = np.zeros((2,) * (m + n + 1))
    for a in configs(m):
        for (rec, b), p in records[a].items():
            joint[tuple(a) + tuple(rec) + (b,)] += p / 2**m
    alph = {s.label: (0, 1) for s in sites}
    ann = {}
    if numbers_x is not None:
        ann["number_past_X"] = dict(numbers_x)
    if numbers_y is not None:
        ann["number_past_y"] = dict(numbers_y)
    return PEModel(tuple(sites), alph, joint, ann)


def export_completion(art) -> PEModel:
    """Event form of a mediated experiment; records outside the mode pairs count as 0."""
    from .completion.pipeline import run_pipeline

    tables = run_pipeline(art)
    n, m = art.n, art.source.m
    records: dict = {a: {} for a in configs(m)}
    for (a, label, rec), p in tables.joint.items():
        ro = tables.readout[(a, label, rec)]
        if ro is None:
            continue
        bits = tuple(1 if r == 1 else 0 for r in rec)
        for b in (0, 1):
            key = (bits, b)
            records[a][key] = records[a].get(key, 0.0) + p * float(ro[b])
    return export_mediated(records, n, m, {n: 1.0}, {n: 1.0})


def export_photon() -> PEModel:
    from .fock import photon_mediation

    records, post = {}, {}
    for a in configs(2):
        res = photon_mediation(*a)
        records[a] = {(rec, sum(rec) % 2): p for rec, p in res.outcomes.items()}
        post = res.post_numbers
    return export_mediated(records, 2, 2, {1: 1.0}, post)


def export_electron() -> PEModel:
    from .fock import electron_mediation

    records, numbers = {}, {}
    for a in configs(2):
        res = electron_mediation(*a)
        records[a] = {(rec, sum(rec) % 2): p for rec, p in res.stage2.items()}
        numbers = res.numbers["input"]
    return export_mediated(records, 2, 2, {1: 1.0}, numbers)


# the two-sender examples


def example1_model() -> PEModel:
    """Two senders with one particle each; the receiver outputs the parity of the preparations."""
    sites = [SOURCE_SITE, *input_sites(2), OUTPUT_SITE]
    alph = {"src": ("*",), "x1": (0, 1), "x2": (0, 1), "y": (0, 1)}

    def prob(w):
        return 0.25 * (w["y"] == (w["x1"] + w["x2"]) % 2)

    return model_from_function(sites, alph, prob, {"number_past_X": {2: 1.0}, "number_past_y": {2: 1.0}})


def example1_star_model() -> PEModel:
    """The same, with each particle measured en route; the intermediate records copy the preparations."""
    sites = [SOURCE_SITE, *input_sites(2), *mediator_sites(2), OUTPUT_SITE]
    alph = {"src": ("*",), "x1": (0, 1), "x2": (0, 1), "y1": (0, 1), "y2": (0, 1), "y": (0, 1)}

    def prob(w):
        ok = w["y1"] == w["x1"] and w["y2"] == w["x2"] and w["y"] == (w["y1"] + w["y2"]) % 2
        return 0.25 * ok

    return model_from_function(sites, alph, prob, {"number_past_X": {2: 1.0}, "number_past_y": {2: 1.0}})


def with_independent_site(model: PEModel, site: Site, p: float = 0.5) -> PEModel:
    """Append a binary site independent of everything else."""
    joint = np.multiply.outer(model.joint, np.array([1 - p, p]))
    alph = dict(model.alphabets)
    alph[site.label] = (0, 1)
    return PEModel((*model.sites, site), alph, joint, model.annotations)


def conspiratorial_models(flip: float = 0.1) -> tuple[PEModel, PEModel, dict]:
    """A hidden agent draws ``z``, nudges both inputs towards it and steers the output to its parity.

    Returns the coarse model (``z`` unresolved), the refinement exposing
    ``z`` and the coarse-graining maps.
    """
    agent = Site("z", (-1.0, 0.0, 0.0, 0.0))
    sites = [agent, *input_sites(2), OUTPUT_SITE]
    zs = tuple(itertools.product((0, 1), repeat=2))

    def prob(w):
        z1, z2 = w["z"]
        pa = 1.0
        for zi, xi in ((z1, w["x1"]), (z2, w["x2"])):
            pa *= (1 - flip) if xi == zi else flip
        return 0.25 * pa * (w["y"] == (z1 + z2) % 2)

    fine = model_from_function(sites, {"z": zs, "x1": (0, 1), "x2": (0, 1), "y": (0, 1)}, prob)
    coarse_alph = {"z": ("*",), "x1": (0, 1), "x2": (0, 1), "y": (0, 1)}
    maps = {"z": {v: "*" for v in zs}}
    coarse = PEModel(tuple(sites), coarse_alph, fine.joint.sum(axis=0, keepdims=True))
    return coarse, fine, maps
