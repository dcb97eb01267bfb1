"""Scenario descriptions, the built-in catalog and the runners behind the command line."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import fock
from .completion import (
    build_completion,
    build_three_support_instance,
    odd_case_i_instance,
    odd_case_ii_instance,
    random_even_instance,
    three_support_b01,
    verify_triple,
)
from .completion.verify import Check
from .constants import EPS_EQ, EPS_RECON
from .errors import InterlabError, ScenarioError
from .events import (
    PEModel,
    Site,
    check_closed,
    check_common_cause_exclusion,
    check_local_completion,
    conspiratorial_models,
    event_interference,
    example1_model,
    example1_star_model,
    export_completion,
    export_electron,
    export_photon,
    geometry_check,
    with_independent_site,
)
from .experiment import (
    ConditionalTable,
    SlitScenario,
    double_slit,
    example1,
    example2,
    example3,
    multi_slit,
    random_triple,
    simulate,
    slit_table,
)
from .linalg import random_binary_povm, random_density
from .metrics import discrimination_value, helstrom, semi_general_interference, slit_interference
from .serialize import decode_triple, encode_artifact

KINDS = ("slit", "semi_general", "fock", "completion", "event_model", "property_suite")


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]


@dataclass
class Result:
    summary: dict = field(default_factory=dict)
    tables: list[Table] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    artifact: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, residual: float, tol: float, detail: str = "") -> None:
        self.checks.append(Check(name, bool(residual <= tol), float(residual), detail))

    def claim(self, name: str, ok: bool, residual: float = 0.0, detail: str = "") -> None:
        self.checks.append(Check(name, bool(ok), float(residual), detail))


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    kind: str
    parameters: dict
    seed: int = 0
    output_dir: str | None = None
    formats: tuple[str, ...] = ("json", "csv")
    builtin: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not (0 <= int(self.seed) < 2**64):
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        bad = [f for f in self.formats if f not in ("json", "csv")]
        if bad:
            raise ScenarioError(f"unknown output formats {bad}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioSpec":
        if not isinstance(data, Mapping):
            raise ScenarioError("a scenario must be a JSON object")
        unknown = set(data) - {"name", "kind", "builtin", "parameters", "seed", "output"}
        if unknown:
            raise ScenarioError(f"unknown scenario fields {sorted(unknown)}")
        if "kind" not in data:
            raise ScenarioError("scenario needs a 'kind'")
        builtin = data.get("builtin")
        if builtin is not None:
            if builtin not in BUILTINS:
                raise ScenarioError(f"unknown builtin {builtin!r}")
            if BUILTINS[builtin].kind != data["kind"]:
                raise ScenarioError(f"builtin {builtin!r} is of kind {BUILTINS[builtin].kind!r}, not {data['kind']!r}")
        params = data.get("parameters", {})
        if not isinstance(params, Mapping):
            raise ScenarioError("'parameters' must be an object")
        out = data.get("output", {})
        if not isinstance(out, Mapping):
            raise ScenarioError("'output' must be an object")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ScenarioError("seed must be an integer")
        return cls(
            str(data.get("name", builtin or data["kind"])),
            data["kind"],
            dict(params),
            seed,
            out.get("dir"),
            tuple(out.get("formats", ("json", "csv"))),
            builtin,
        )


@dataclass(frozen=True)
class Builtin:
    name: str
    kind: str
    description: str
    defaults: dict
    runner: Callable[[dict, int, int], Result]


# helpers


def thread_count() -> int:
    """Worker cap from ``INTERLAB_THREADS``; defaults to 1."""
    raw = os.environ.get("INTERLAB_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        k = 0
    if k < 1:
        raise ScenarioError(f"INTERLAB_THREADS must be a positive integer, got {raw!r}")
    return k


def parallel_map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def child_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """One independent generator per sampled object; adding samples leaves earlier ones unchanged."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def bits(a) -> str:
    return "".join(str(int(x)) for x in a)


def table_rows(table: ConditionalTable) -> Table:
    cols = ["a"] + [f"P({b}|a)" for b in range(table.outcomes)]
    return Table("table", cols, [[bits(a), *map(float, table.row(a))] for a in table.configs])


def _delta_residual(table: ConditionalTable) -> float:
    return max(abs(1 - table.row(a)[sum(a) % 2]) for a in table.configs)


def _semi_general_result(table: ConditionalTable, res: Result, expect_maximal: bool = True) -> None:
    rep = semi_general_interference(table)
    res.summary[f"I_{table.m}"] = rep.value
    res.tables.append(table_rows(table))
    if expect_maximal:
        res.check("maximal", abs(rep.value - 0.5), EPS_EQ, f"I_{table.m} = {rep.value:.12f}")
        res.check("parity_table", _delta_residual(table), EPS_EQ, "P(b|a) puts all weight on the input parity")


def _completion_result(art, res: Result, name: str = "mediators") -> None:
    n = art.n
    recs = [bits(r) for r in np.ndindex(*(2,) * n)]
    rows = []
    for label, table in art.mediator_table.items():
        for a, row in table.items():
            rows.append([bits(a), label, *map(float, row)])
    res.tables.append(Table(name, ["a", "branch"] + [f"P({r}|a)" for r in recs], rows))
    res.summary["completion_kind"] = art.kind
    res.summary["branch_weights"] = dict(art.expected_weights)
    final = semi_general_interference(art.final_table).value
    res.summary["final_I"] = final
    for c in art.transcript.checks:
        res.checks.append(Check(f"{name}:{c.name}", c.passed, c.residual, c.detail))


# runners


def run_double_slit(params, seed, threads) -> Result:
    res = Result()
    s = double_slit()
    tab = slit_table(s)
    _slit_tables(s, tab, res)
    per_y = slit_interference(tab, 2)
    closed = max(tab[(y, (0, 0))] for y in s.screen_positions)
    res.check("closed_row_zero", closed, EPS_EQ, "no detection with both slits closed")
    biggest = max(abs(v) for v in per_y.values())
    res.claim("second_order_interference", biggest > 1e-3, biggest, "some screen position with I_2 != 0")
    return res


def _slit_tables(s: SlitScenario, tab, res: Result) -> dict:
    m = s.m
    ys = list(s.screen_positions)
    rows = []
    for a in sorted({a for _, a in tab}):
        rows.append([bits(a), *(float(tab[(y, a)]) for y in ys)])
    res.tables.append(Table("slits", ["a", *map(str, ys)], rows))
    per_y = slit_interference(tab, m)
    res.summary[f"I_{m}"] = {str(y): float(v) for y, v in per_y.items()}
    return per_y


def run_multi_slit(params, seed, threads) -> Result:
    res = Result()
    m = int(params["m"])
    s = multi_slit(m, np.random.default_rng(seed) if params["random"] else None)
    tab = slit_table(s)
    per_y = _slit_tables(s, tab, res)
    worst = max(abs(v) for v in per_y.values())
    if m >= 3:
        res.check("higher_order_null", worst, EPS_EQ, f"max |I_{m}(y)| = {worst:.3e}")
    return res


def run_example1(params, seed, threads) -> Result:
    res = Result()
    _semi_general_result(simulate(example1()), res)
    return res


def run_example2(params, seed, threads) -> Result:
    res = Result()
    t = example2()
    _semi_general_result(simulate(t), res)
    tr = verify_triple(t)
    ob = tr.get("position_obstruction")
    res.summary["mediators_present"] = False
    res.summary["position_obstruction"] = ob.residual
    res.check("position_obstruction", ob.residual, EPS_EQ, ob.detail)
    fock_tab = fock.fock_single_photon_table()
    res.check("fock_agreement", float(np.max(np.abs(fock_tab.probs - simulate(t).probs))), EPS_EQ, "second-quantized encoding agrees")
    return res


def run_fock(params, seed, threads) -> Result:
    res = Result()
    process = params.get("process", "both")
    if process not in ("photon", "electron", "both"):
        raise ScenarioError(f"unknown process {process!r}")
    recs = ["00", "01", "10", "11"]
    if process in ("photon", "both"):
        tab, records = fock.mediation_table(fock.photon_mediation)
        rows = [[bits(a), *(float(records[a][tuple(int(c) for c in r)]) for r in recs)] for a in tab.configs]
        res.tables.append(Table("photon", ["a", *(f"P({r}|a)" for r in recs)], rows))
        res.summary["photon_I_2"] = semi_general_interference(tab).value
        res.check("photon_parity", _delta_residual(tab), EPS_EQ, "b1 xor b2 equals a1 xor a2")
        res.check("photon_uniform", _uniform_residual(records), EPS_EQ, "each consistent record has probability 1/2")
        post = fock.photon_mediation(0, 0).post_numbers
        res.summary["photon_post_numbers"] = {str(k): v for k, v in post.items()}
        want = {0: 0.25, 1: 0.5, 2: 0.25}
        res.check("photon_numbers", max(abs(post.get(k, 0) - v) for k, v in want.items()), EPS_EQ, "number no longer sharp")
        eff = fock.photonic_effects(fock.photon_register())[(0, 0)]
        rejected = not fock.superselection_check(eff, fock.photon_register(charge_superselected=True))
        res.claim("photon_superselection", rejected, 0.0, "photonic effects rejected under charge superselection")
    if process in ("electron", "both"):
        tab, records = fock.mediation_table(fock.electron_mediation)
        rows = [[bits(a), *(float(records[a][tuple(int(c) for c in r)]) for r in recs)] for a in tab.configs]
        res.tables.append(Table("electron", ["a", *(f"P({r}|a)" for r in recs)], rows))
        res.summary["electron_I_2"] = semi_general_interference(tab).value
        res.check("electron_parity", _delta_residual(tab), EPS_EQ, "b1 xor b2 equals a1 xor a2")
        stage, num, ok = 0.0, 0.0, True
        for a in tab.configs:
            r = fock.electron_mediation(*a)
            stage = max(stage, abs(r.stage1[0] - 0.5), abs(r.stage1[1] - 0.5))
            for dist in r.numbers.values():
                num = max(num, abs(dist.get(2, 0.0) - 1))
            ok = ok and r.number_check
        res.check("electron_stage1", stage, EPS_EQ, "sector outcomes each 1/2")
        res.check("electron_numbers", num, EPS_EQ, "two electrons at every stage")
        res.claim("electron_number_check", ok, 0.0, "every applied effect commutes with the number")
    return res


def _uniform_residual(records) -> float:
    worst = 0.0
    for a, dist in records.items():
        for rec, p in dist.items():
            want = 0.5 if sum(rec) % 2 == sum(a) % 2 else 0.0
            worst = max(worst, abs(p - want))
    return worst


def run_example3(params, seed, threads) -> Result:
    res = Result()
    t = example3(int(params["n"]))
    _semi_general_result(simulate(t), res)
    if params["complete"]:
        art = build_completion(t)
        _completion_result(art, res)
        res.artifact = encode_artifact(art)
    return res


def run_even_completions(params, seed, threads) -> Result:
    res = Result()
    n_max = int(params["n"])
    art = build_completion(example3(n_max))
    _completion_result(art, res, "example3")
    res.artifact = encode_artifact(art)
    samples = int(params["samples"])
    d = int(params["d"])

    def one(job):
        k, rng = job
        n = 1 + k % n_max
        t = random_even_instance(n, d, rng)
        tr = build_completion(t).transcript
        return n, {c.name: c.residual for c in tr.checks}, tr.passed

    out = parallel_map(one, enumerate(child_rngs(seed, samples)), threads)
    rows = [[k, n, "pass" if ok else "fail", *(float(r[c]) for c in sorted(r))] for k, (n, r, ok) in enumerate(out)]
    if out:
        res.tables.append(Table("random", ["sample", "n", "verdict", *sorted(out[0][1])], rows))
        res.claim("random_instances", all(ok for _, _, ok in out), 0.0, f"{sum(ok for *_, ok in out)}/{samples} transcripts pass")
    return res


def _odd_runner(build):
    def run(params, seed, threads) -> Result:
        res = Result()
        t = build(params, np.random.default_rng(seed) if params["random"] else None)
        _semi_general_result(simulate(t), res)
        art = build_completion(t)
        _completion_result(art, res)
        res.artifact = encode_artifact(art)
        return res

    return run


def run_three_support(params, seed, threads) -> Result:
    res = Result()
    p11, p12, a01 = (float(params[k]) for k in ("p11", "p12", "a01"))
    t = build_three_support_instance(p11, p12, a01, np.random.default_rng(seed) if params["random"] else None)
    b01 = three_support_b01(p12, a01)
    res.summary["b01"] = b01
    _semi_general_result(simulate(t), res)
    res.check("b01_constraint", abs(b01 - (2 * p12 * (1 - a01) - 1)), EPS_EQ, f"b01 = {b01:.12f}")
    art = build_completion(t)
    _completion_result(art, res)
    res.artifact = encode_artifact(art)
    return res


def run_event_example1(params, seed, threads) -> Result:
    res = Result()
    X = ["x1", "x2"]
    e, es = example1_model(), example1_star_model()
    res.summary["I_2"] = event_interference(e, X, "y")
    res.summary["I_2_star"] = event_interference(es, X, "y")
    res.claim("geometry", geometry_check(e, X, "y") and geometry_check(es, X, "y"))
    res.check("maximal", abs(res.summary["I_2"] - 0.5), EPS_EQ)
    v = check_local_completion(e, es, X, "y", ["y1", "y2"], [["x1"], ["x2"]])
    for k in (1, 2, 3, 4):
        res.claim(f"completion_condition_{k}", v.conditions[k], v.residuals[k], v.details[k])
    res.summary["completion_condition_5"] = "undecided"
    coarse, fine, maps = conspiratorial_models()
    vc = check_common_cause_exclusion(coarse, X, "y", "z", [(fine, maps)])
    res.summary["conspiratorial_I_2"] = event_interference(coarse, X, "y")
    res.claim("conspiracy_exposed", not vc.passed, vc.residuals[0], vc.details[0])
    ez = with_independent_site(e, Site("z", (-1.0, 0.0, 0.0, 0.0)))
    vi = check_common_cause_exclusion(ez, X, "y", "z", [(ez, {})])
    res.claim("independent_cause_passes", vi.passed, vi.residuals[0], vi.details[0])
    closed = {
        "example3": check_closed(export_completion(build_completion(example3(2)))),
        "photon": check_closed(export_photon()),
        "electron": check_closed(export_electron()),
    }
    res.summary["closed"] = closed
    res.claim("closed_verdicts", closed == {"example3": True, "photon": False, "electron": False}, 0.0, json.dumps(closed))
    rows = [[f"condition {k}", "pass" if v.conditions[k] else "fail", float(v.residuals[k])] for k in (1, 2, 3, 4)]
    res.tables.append(Table("conditions", ["condition", "verdict", "residual"], rows))
    return res


def run_sorkin(params, seed, threads) -> Result:
    res = Result()
    n, m, samples, d_max = (int(params[k]) for k in ("n", "m", "samples", "d_max"))
    rngs = child_rngs(seed, 2 * samples)

    def triple_job(rng):
        d = int(rng.integers(1, d_max + 1))
        comps = int(rng.integers(1, 3))
        t = random_triple(n, m, d, rng, comps)
        return d, semi_general_interference(simulate(t)).value

    out = parallel_map(triple_job, rngs[:samples], threads)
    worst = max((abs(v) for _, v in out), default=0.0)
    res.summary[f"max_abs_I_{m}"] = worst
    res.tables.append(Table("triples", ["sample", "d", f"I_{m}"], [[k, d, float(v)] for k, (d, v) in enumerate(out)]))
    if m > 2 * n:
        res.check("semi_general_null", worst, EPS_EQ, f"max |I_{m}| over {samples} random triples")
    else:
        res.check("bounded", worst - 0.5, EPS_EQ, f"|I_{m}| never exceeds 1/2")
    if n == 1:
        def slit_job(rng):
            tab = slit_table(multi_slit(m, rng))
            return max(abs(v) for v in slit_interference(tab, m).values())

        slits = parallel_map(slit_job, rngs[samples:], threads)
        res.summary[f"max_abs_slit_I_{m}"] = max(slits, default=0.0)
        if m >= 3:
            res.check("slit_null", max(slits, default=0.0), EPS_EQ, f"max |I_{m}(y)| over {samples} random slit scenarios")
    return res


def run_helstrom(params, seed, threads) -> Result:
    res = Result()
    samples, povms, max_dim = (int(params[k]) for k in ("samples", "povms", "max_dim"))

    def job(rng):
        dim = int(rng.integers(2, max_dim + 1))
        r0 = random_density(dim, rng, int(rng.integers(1, dim + 1)))
        r1 = random_density(dim, rng, int(rng.integers(1, dim + 1)))
        h = helstrom(r0, r1)
        gap = abs(discrimination_value(r0, r1, h.povm) - h.bound)
        excess = max(discrimination_value(r0, r1, random_binary_povm(dim, rng)) - h.bound for _ in range(povms))
        return dim, h.bound, gap, excess

    out = parallel_map(job, child_rngs(seed, samples), threads)
    res.tables.append(
        Table("pairs", ["sample", "dim", "bound", "attainment_gap", "max_random_excess"], [[k, d, float(b), float(g), float(e)] for k, (d, b, g, e) in enumerate(out)])
    )
    res.check("attained", max((g for *_, g, _ in out), default=0.0), EPS_RECON, "optimal POVM reaches the bound")
    res.check("never_exceeded", max(max((e for *_, e in out), default=0.0), 0.0), 1e-12, "random POVMs stay below the bound")
    return res


def _case_i(params, rng):
    return odd_case_i_instance(rng)


def _case_ii(params, rng):
    return odd_case_ii_instance(float(params["overlap"]), rng)


BUILTINS: dict[str, Builtin] = {
    b.name: b
    for b in [
        Builtin("double-slit", "slit", "balanced two-slit pattern and its second-order term", {}, run_double_slit),
        Builtin("multi-slit", "slit", "m-slit pattern; higher-order terms vanish", {"m": 3, "random": False}, run_multi_slit),
        Builtin("example1", "semi_general", "two particles, one per device, parity readout", {}, run_example1),
        Builtin("example2", "semi_general", "one particle over two phase devices, +/- readout", {}, run_example2),
        Builtin("example2-electron", "fock", "photon and electron mediation of the one-particle example", {"process": "both"}, run_fock),
        Builtin("example3", "semi_general", "n particles over 2n phase devices", {"n": 2, "complete": False}, run_example3),
        Builtin("thm1-complete", "completion", "mediated even-order completions, fixed and random", {"n": 2, "samples": 20, "d": 2}, run_even_completions),
        Builtin("thm2-case1", "completion", "odd order, one string with a repeated device", {"random": False}, _odd_runner(_case_i)),
        Builtin("thm2-case2", "completion", "odd order, two strings sharing a device", {"overlap": 0.3, "random": False}, _odd_runner(_case_ii)),
        Builtin("appendix5", "completion", "odd order on three spatial strings", {"p11": 0.25, "p12": 0.25, "a01": 0.0, "random": False}, run_three_support),
        Builtin("event-example1", "event_model", "event-model checks for the two-sender examples", {}, run_event_example1),
        Builtin("sorkin-null", "property_suite", "random triples and slits beyond the particle bound", {"n": 1, "m": 3, "samples": 200, "d_max": 4}, run_sorkin),
        Builtin("helstrom-suite", "property_suite", "random state pairs against the discrimination bound", {"samples": 100, "povms": 200, "max_dim": 16}, run_helstrom),
    ]
}


def list_scenarios() -> list[tuple[str, str, str]]:
    return [(b.name, b.kind, b.description) for b in BUILTINS.values()]


def coerce_params(builtin: Builtin, given: Mapping[str, Any]) -> dict:
    """Defaults overridden by ``given``, each value cast to its default's type."""
    params = dict(builtin.defaults)
    for key, val in given.items():
        k = key.replace("-", "_")
        if k not in params:
            raise ScenarioError(f"{builtin.name} has no parameter {key!r}; known: {sorted(params) or 'none'}")
        default = params[k]
        try:
            if isinstance(default, bool):
                if isinstance(val, str):
                    if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                        raise ValueError(val)
                    val = val.lower() in ("true", "1", "yes")
                params[k] = bool(val)
            elif isinstance(default, int):
                if isinstance(val, float) and not val.is_integer():
                    raise ValueError(val)
                params[k] = int(val)
            elif isinstance(default, float):
                params[k] = float(val)
            else:
                params[k] = str(val)
        except (TypeError, ValueError):
            raise ScenarioError(f"parameter {key!r} expects {type(default).__name__}, got {val!r}") from None
    return params


def _inline(spec: ScenarioSpec) -> Result:
    p = spec.parameters
    res = Result()
    if spec.kind == "semi_general":
        if "triple" not in p:
            raise ScenarioError("an inline semi_general scenario needs parameters.triple")
        t = decode_triple(p["triple"])
        table = simulate(t)
        _semi_general_result(table, res, bool(p.get("expect_maximal", False)))
        if p.get("complete"):
            art = build_completion(t)
            _completion_result(art, res)
            res.artifact = encode_artifact(art)
        return res
    if spec.kind == "completion":
        if "triple" not in p:
            raise ScenarioError("an inline completion scenario needs parameters.triple")
        t = decode_triple(p["triple"])
        _semi_general_result(simulate(t), res)
        art = build_completion(t)
        _completion_result(art, res)
        res.artifact = encode_artifact(art)
        return res
    if spec.kind == "slit":
        from .serialize import decode_matrix

        try:
            s = SlitScenario(decode_matrix(p["input_state"]), decode_matrix(p["propagation"]), tuple(p.get("screen_positions", ())))
        except KeyError as exc:
            raise ScenarioError(f"inline slit scenario needs {exc.args[0]!r}") from None
        tab = slit_table(s)
        per_y = _slit_tables(s, tab, res)
        if s.m >= 3:
            res.check("higher_order_null", max(abs(v) for v in per_y.values()), EPS_EQ)
        return res
    if spec.kind == "event_model":
        try:
            model = PEModel.from_dict(p["model"])
            X, y = list(p["X"]), str(p["y"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed event model: {exc}") from None
        res.claim("geometry", geometry_check(model, X, y))
        res.summary[f"I_{len(X)}"] = event_interference(model, X, y)
        if "number_past_X" in model.annotations:
            res.summary["closed"] = check_closed(model)
        return res
    if spec.kind == "fock":
        return run_fock(coerce_params(BUILTINS["example2-electron"], p), spec.seed, 1)
    raise ScenarioError(f"kind {spec.kind!r} needs a builtin")


def run_scenario(spec: ScenarioSpec, threads: int | None = None) -> Result:
    threads = thread_count() if threads is None else threads
    if spec.builtin is None:
        return _inline(spec)
    b = BUILTINS[spec.builtin]
    params = coerce_params(b, spec.parameters)
    return b.runner(params, spec.seed, threads)


def resolved_parameters(spec: ScenarioSpec) -> dict:
    if spec.builtin is None:
        return {k: v for k, v in spec.parameters.items() if k not in ("triple", "model")}
    return coerce_params(BUILTINS[spec.builtin], spec.parameters)


def builtin_spec(name: str, extras: Mapping[str, Any], seed: int = 0, output_dir: str | None = None, formats=("json", "csv")) -> ScenarioSpec:
    if name not in BUILTINS:
        raise ScenarioError(f"unknown builtin {name!r}; run 'interlab list'")
    b = BUILTINS[name]
    coerce_params(b, extras)
    return ScenarioSpec(name, b.kind, dict(extras), seed, output_dir, tuple(formats), name)


__all__ = [
    "BUILTINS",
    "KINDS",
    "Builtin",
    "InterlabError",
    "Result",
    "ScenarioSpec",
    "Table",
    "builtin_spec",
    "child_rngs",
    "list_scenarios",
    "parallel_map",
    "resolved_parameters",
    "run_scenario",
    "thread_count",
]
