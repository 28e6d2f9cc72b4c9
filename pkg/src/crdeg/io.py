"""Problem files: JSON with a source manifold, a target manifold and a map."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .manifold import ManifoldError, NormalManifold, contexts, validate_manifold
from .maps import FormalMap, MapError
from .series import SeriesError, TruncatedSeries


class ProblemError(ValueError):
    pass


_term = {
    "type": "object",
    "required": ["e"],
    "properties": {
        "e": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "c": {"type": ["string", "integer"]},
        "ci": {"type": ["string", "integer"]},
    },
    "additionalProperties": False,
}
_series = {"type": "array", "items": _term}
_manifold = {
    "type": "object",
    "required": ["n", "d", "Q"],
    "properties": {
        "n": {"type": "integer", "minimum": 0},
        "d": {"type": "integer", "minimum": 1},
        "Q": {"type": "array", "items": _series},
        "polynomial": {"type": "boolean"},
        "order": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
SCHEMA = {
    "type": "object",
    "required": ["order", "source"],
    "properties": {
        "order": {"type": "integer", "minimum": 1},
        "source": _manifold,
        "target": _manifold,
        "map": {
            "type": "object",
            "required": ["components"],
            "properties": {
                "components": {"type": "array", "items": _series},
                "order": {"type": "integer", "minimum": 1},
                "polynomial": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "options": {"type": "object"},
        "name": {"type": "string"},
        "description": {"type": "string"},
    },
    "additionalProperties": False,
}


@dataclass
class ProblemFile:
    path: str
    order: int
    source: NormalManifold
    target: NormalManifold
    map: FormalMap | None
    options: dict = field(default_factory=dict)
    digest: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def reality(self):
        return {"source": self.source.reality, "target": self.target.reality}


def _parse_manifold(block, order, where):
    n, d = block["n"], block["d"]
    if block.get("order", order) != order:
        raise ProblemError(f"{where}: order {block['order']} differs from the problem order {order}")
    Qc = contexts(n, d)["Q"]
    poly = block.get("polynomial", True)
    if len(block["Q"]) != d:
        raise ProblemError(f"{where}.Q: expected {d} components, got {len(block['Q'])}")
    Q = []
    for j, lit in enumerate(block["Q"]):
        try:
            Q.append(TruncatedSeries.from_literal(Qc, order, lit, exact=poly))
        except (SeriesError, ValueError) as exc:
            raise ProblemError(f"{where}.Q[{j}]: {exc}") from None
    try:
        M = validate_manifold(n, d, Q, order=order, polynomial=poly)
    except ManifoldError as exc:
        raise ProblemError(f"{where}: {exc}") from None
    return M


def load_problem(data: dict, path: str = "<memory>", order: int | None = None,
                 digest: str = "") -> ProblemFile:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ProblemError(f"{path}: schema violation at {loc}: {exc.message}") from None
    declared = data["order"]
    t = order if order is not None else declared
    src = _parse_manifold(data["source"], declared, "source")
    tgt = _parse_manifold(data["target"], declared, "target") if "target" in data else src
    if t != declared:
        src = _reorder(src, t)
        tgt = src if "target" not in data else _reorder(tgt, t)
    H = None
    if "map" in data:
        mb = data["map"]
        if mb.get("order", declared) != declared:
            raise ProblemError(f"map: order {mb['order']} differs from the problem order {declared}")
        Zc = src.ctx["Z"]
        poly = mb.get("polynomial", src.polynomial and tgt.polynomial)
        comps = []
        for j, lit in enumerate(mb["components"]):
            try:
                c = TruncatedSeries.from_literal(Zc, declared, lit, exact=poly)
            except (SeriesError, ValueError) as exc:
                raise ProblemError(f"map.components[{j}]: {exc}") from None
            if not c.exact and t > declared:
                raise ProblemError(f"--order {t} exceeds the declared order {declared} "
                                   f"of the truncated map")
            comps.append(c.truncate(t) if not c.exact else c)
        try:
            H = FormalMap(src, tgt, comps, order=t)
        except MapError as exc:
            raise ProblemError(f"map: {exc}") from None
    return ProblemFile(path, t, src, tgt, H, dict(data.get("options", {})), digest, data)


def _reorder(M, t):
    if not M.polynomial and t > M.order:
        raise ProblemError(f"--order {t} exceeds the declared order {M.order} of truncated data")
    Q = [q if q.exact else q.truncate(t) for q in M.Q]
    return validate_manifold(M.n, M.d, [q.with_exact(M.polynomial) for q in Q], order=t,
                             polynomial=M.polynomial)


def parse_problem(path, order: int | None = None) -> ProblemFile:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return load_problem(data, str(path), order=order, digest=hashlib.sha256(raw).hexdigest())


def dump_problem(source, target=None, H=None, order=None, options=None, **extra) -> dict:
    """The JSON form of a problem, the inverse of load_problem."""
    t = order if order is not None else source.order
    out = {"order": t, "source": source.to_json()}
    if target is not None:
        out["target"] = target.to_json()
    if H is not None:
        out["map"] = {"components": [c.to_literal() for c in H.components],
                      "polynomial": H.exact}
    if options:
        out["options"] = options
    out.update(extra)
    for key in ("source", "target"):
        if key in out:
            out[key]["order"] = t
    return out
