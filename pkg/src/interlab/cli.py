"""``interlab`` command line: run, list, verify.

Exit codes: 0 all checks pass, 1 some check failed, 2 bad input or unwritable output.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import InterlabError
from .report import emit_report, residual_table
from .scenarios import ScenarioSpec, builtin_spec, list_scenarios, run_scenario

OK, FAILED, BAD_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(BAD_INPUT)


def parse_extras(tokens: list[str]) -> dict:
    """``--key value`` pairs; a key followed by another key or nothing is a bare flag (True)."""
    out, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise InterlabError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens) and not tokens[i + 1].startswith("--"):
            raw = tokens[i + 1]
            i += 2
        else:
            out[key] = True
            i += 1
            continue
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


_RUN_VALUED = {"--builtin", "--seed", "--out", "--format"}
_RUN_FLAGS = {"--quiet", "-h", "--help"}


def split_run_args(tokens: list[str]) -> tuple[list[str], list[str]]:
    """Separate ``run``'s own options from scenario ``--key value`` extras."""
    known, extras, i = [], [], 0
    while i < len(tokens):
        tok = tokens[i]
        name = tok.split("=", 1)[0]
        if name in _RUN_VALUED:
            take = 1 if "=" in tok else 2
            known.extend(tokens[i:i + take])
            i += take
        elif tok in _RUN_FLAGS or not tok.startswith("--"):
            known.append(tok)
            i += 1
        else:
            extras.append(tok)
            i += 1
            if "=" not in tok and i < len(tokens) and not tokens[i].startswith("--"):
                extras.append(tokens[i])
                i += 1
    return known, extras


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="interlab", description="Interference experiments, mediated completions and event models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a scenario file or a built-in", allow_abbrev=False)
    run.add_argument("spec", nargs="?", help="scenario JSON file")
    run.add_argument("--builtin", metavar="NAME", help="built-in scenario name (see 'interlab list')")
    run.add_argument("--seed", type=int, help="64-bit seed; overrides the file's seed")
    run.add_argument("--out", metavar="DIR", help="report directory (default interlab-out/<name>)")
    run.add_argument("--format", default=None, help="comma-separated subset of json,csv")
    run.add_argument("--quiet", action="store_true", help="only print failures")
    sub.add_parser("list", help="list built-in scenarios")
    ver = sub.add_parser("verify", help="re-check a completion artifact or a bare experiment")
    ver.add_argument("artifact", help="artifact.json or experiment JSON")
    return p


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InterlabError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InterlabError(f"{path} is not valid JSON: {exc}") from None


def _spec_from_args(args, extras: dict) -> ScenarioSpec:
    formats = tuple(f.strip() for f in args.format.split(",")) if args.format else None
    if args.builtin and args.spec:
        raise InterlabError("give either a scenario file or --builtin, not both")
    if args.builtin:
        return builtin_spec(args.builtin, extras, args.seed or 0, args.out, formats or ("json", "csv"))
    if not args.spec:
        raise InterlabError("run needs a scenario file or --builtin NAME")
    data = _load_json(args.spec)
    if isinstance(data, dict) and extras:
        data = {**data, "parameters": {**data.get("parameters", {}), **extras}}
    spec = ScenarioSpec.from_dict(data)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out:
        changes["output_dir"] = args.out
    if formats:
        changes["formats"] = formats
    if changes:
        spec = ScenarioSpec(**{**spec.__dict__, **changes})
    return spec


def cmd_run(args, extras) -> int:
    spec = _spec_from_args(args, extras)
    result = run_scenario(spec)
    out = spec.output_dir or str(Path("interlab-out") / spec.name)
    try:
        paths = emit_report(spec, result, out)
    except OSError as exc:
        print(f"interlab: cannot write reports to {out}: {exc.strerror or exc}", file=sys.stderr)
        return BAD_INPUT
    failed = [c for c in result.checks if not c.passed]
    if failed:
        print(f"{spec.name}: {len(failed)} of {len(result.checks)} checks failed")
        print(residual_table(failed))
        return FAILED
    if not args.quiet:
        print(f"{spec.name}: all {len(result.checks)} checks passed")
        for p in paths:
            print(f"  wrote {p}")
    return OK


def cmd_list() -> int:
    rows = list_scenarios()
    width = max(len(name) for name, _, _ in rows)
    for name, kind, desc in rows:
        print(f"{name:<{width}}  {kind:<15} {desc}")
    return OK


def cmd_verify(path: str) -> int:
    from .completion import verify_mediation, verify_triple
    from .serialize import decode_artifact, decode_triple

    data = _load_json(path)
    if not isinstance(data, dict):
        raise InterlabError(f"{path} does not hold a JSON object")
    if data.get("format") == "interlab-completion":
        tr = verify_mediation(decode_artifact(data))
    elif "devices" in data:
        tr = verify_triple(decode_triple(data))
    elif "triple" in data.get("parameters", {}):
        tr = verify_triple(decode_triple(data["parameters"]["triple"]))
    else:
        raise InterlabError(f"{path} is neither a completion artifact nor an experiment")
    print(residual_table(tr.checks))
    for name, bad in tr.failures.items():
        print(f"{name} fails at " + ", ".join("".join(map(str, a)) for a in bad))
    return OK if tr.passed else FAILED


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    extras: list[str] = []
    if argv and argv[0] == "run":
        known, extras = split_run_args(argv[1:])
        argv = ["run", *known]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else BAD_INPUT
    try:
        if args.command == "run":
            return cmd_run(args, parse_extras(extras))
        if args.command == "list":
            return cmd_list()
        return cmd_verify(args.artifact)
    except InterlabError as exc:
        print(f"interlab: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (ValueError, TypeError) as exc:
        print(f"interlab: invalid input: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
