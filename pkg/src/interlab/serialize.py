"""JSON and CSV encodings: matrices as nested [re, im] pairs, tables as CSV with fixed formatting."""
from __future__ import annotations

import csv
import io
import json
from typing import Any, Mapping

import numpy as np

from .errors import ScenarioError
from .experiment import DeviceFamily, ExperimentTriple

DIGITS = 12


def clean_float(x: float) -> float:
    """Round to ``DIGITS`` decimals and drop the sign of zero, so reports are byte-stable."""
    v = round(float(x), DIGITS)
    return 0.0 if v == 0 else v


def fmt(x: float) -> str:
    return f"{clean_float(x):.{DIGITS}f}"


def encode_matrix(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[clean_float(z.real), clean_float(z.imag)] for z in a]
    return [encode_matrix(row) for row in a]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ScenarioError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _key(i, sub) -> str:
    return ",".join(map(str, i)) + "|" + ",".join(map(str, sub))


def _unkey(s: str):
    i, sub = s.split("|")
    return tuple(int(x) for x in i.split(",")), tuple(int(x) for x in sub.split(","))


def encode_devices(dev: DeviceFamily) -> dict:
    out: dict[str, Any] = {"n": dev.n, "unitaries": encode_matrix(dev.unitaries.reshape(-1, dev.d, dev.d)), "shape": list(dev.unitaries.shape)}
    coll = dev.collision_overrides
    if callable(coll):
        raise ScenarioError("collision blocks given as a function cannot be serialized")
    if coll:
        out["collisions"] = {_key(i, sub): encode_matrix(u) for (i, sub), u in sorted(coll.items())}
    return out


def decode_devices(data: Mapping) -> DeviceFamily:
    shape = tuple(data["shape"])
    u = decode_matrix(data["unitaries"]).reshape(shape)
    coll = {_unkey(k): decode_matrix(v) for k, v in data.get("collisions", {}).items()} or None
    return DeviceFamily(int(data["n"]), u, coll)


def encode_triple(t: ExperimentTriple) -> dict:
    return {
        "devices": encode_devices(t.devices),
        "ensemble": [{"weight": clean_float(w), "state": encode_matrix(psi)} for w, psi in t.ensemble],
        "povm": [encode_matrix(e) for e in t.povm],
    }


def decode_triple(data: Mapping) -> ExperimentTriple:
    try:
        devices = decode_devices(data["devices"])
        ensemble = tuple((float(c["weight"]), decode_matrix(c["state"])) for c in data["ensemble"])
        povm = tuple(decode_matrix(e) for e in data["povm"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ScenarioError(f"malformed experiment: {exc}") from exc
    return ExperimentTriple(ensemble, devices, povm)


def encode_transcript(tr) -> list[dict]:
    return [{"name": c.name, "passed": c.passed, "residual": float(f"{c.residual:.6e}"), "detail": c.detail} for c in tr.checks]


def encode_artifact(art) -> dict:
    branches = []
    for b in art.branches:
        branches.append(
            {
                "label": b.label,
                "projector": encode_matrix(b.projector),
                "unitaries": [encode_matrix(u) for u in b.unitaries],
                "local_effects": [[[encode_matrix(e) for e in effs] for effs in comp] for comp in b.local_effects],
                "mode_pairs": [None if p is None else [list(x) for x in p] for p in b.mode_pairs],
            }
        )
    out: dict[str, Any] = {
        "format": "interlab-completion",
        "kind": art.kind,
        "source": encode_triple(art.source),
        "G": encode_matrix(art.G),
        "branches": branches,
        "expected_weights": {k: clean_float(v) for k, v in art.expected_weights.items()},
    }
    if art.mediator_table is not None:
        out["mediator_table"] = {
            label: {"".join(map(str, a)): [clean_float(p) for p in row] for a, row in rows.items()}
            for label, rows in art.mediator_table.items()
        }
    if art.final_table is not None:
        out["final_table"] = {"".join(map(str, a)): [clean_float(p) for p in art.final_table.row(a)] for a in art.final_table.configs}
    if art.transcript is not None:
        out["transcript"] = encode_transcript(art.transcript)
    return out


def decode_artifact(data: Mapping):
    from .completion.pipeline import Branch, CompletionArtifact

    try:
        source = decode_triple(data["source"])
        branches = []
        for b in data["branches"]:
            branches.append(
                Branch(
                    b["label"],
                    decode_matrix(b["projector"]),
                    tuple(decode_matrix(u) for u in b["unitaries"]),
                    tuple(tuple(tuple(decode_matrix(e) for e in effs) for effs in comp) for comp in b["local_effects"]),
                    tuple(None if p is None else tuple(tuple(x) for x in p) for p in b["mode_pairs"]),
                )
            )
        return CompletionArtifact(
            source, data["kind"], decode_matrix(data["G"]), tuple(branches), dict(data.get("expected_weights", {}))
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ScenarioError(f"malformed artifact: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def table_csv(columns, rows) -> str:
    """CSV text; floats use fixed ``DIGITS`` decimals, everything else ``str``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else str(x) for x in row])
    return buf.getvalue()
