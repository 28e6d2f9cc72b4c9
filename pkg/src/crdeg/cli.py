"""crdeg: batch front end.

    crdeg <command> <file> [file2] [--order T] [--kmax K] [--levels L]
          [--trials R] [--seed S] [--json]

Exit status is 0 whenever a verdict was computed, negative verdicts
included; 2 for malformed input and 3 for a failed hypothesis.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .degeneracy import (DegeneracyError, analyze, constant_rank_probe, degeneracy_at_origin,
                         degeneracy_rows, hol_vector_fields)
from .identity import (IdentityError, basic_identity, basic_identity_1deg,
                       jet_determination_check)
from .jets import JetError
from .manifold import ManifoldError
from .maps import (MapError, check_maps_into, levi_data, levi_pullback_check,
                   transversality_check)
from .io import ProblemError, parse_problem
from .segre import check_zero_point, finite_type_test, segre_map
from .series import GaussianRational, PrecisionError, SeriesError

COMMANDS = ("check", "degeneracy", "constancy", "holvf", "segre", "finite-type",
            "basic-identity", "basic-identity-1deg", "jets")
SCHEMA = "crdeg/1"


def _need_map(prob, cmd):
    if prob.map is None:
        raise ProblemError(f"{prob.path}: map required for command {cmd!r}")
    return prob.map


def _opt(args, prob, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return prob.options.get(name, default)


def _s(x):
    return str(x)


def cmd_check(prob, args):
    out = {"source": {"n": prob.source.n, "d": prob.source.d, "polynomial": prob.source.polynomial,
                      "reality": prob.source.reality}}
    if prob.target is not prob.source:
        out["target"] = {"n": prob.target.n, "d": prob.target.d,
                         "polynomial": prob.target.polynomial, "reality": prob.target.reality}
    if prob.map is not None:
        H = prob.map
        mi = check_maps_into(H)
        tr = transversality_check(H)
        out["maps_into"] = {"verdict": mi.verdict, "order": mi.order}
        out["transversal"] = {"verdict": tr.transversal, "rank": tr.rank}
        if prob.source.d == 1 and prob.target.d == 1 and mi.verdict:
            lp = levi_pullback_check(H)
            out["levi_pullback"] = {"verdict": lp.verdict, "immersive": lp.immersive,
                                    "notes": lp.notes}
    for key in ("source", "target"):
        if key in out:
            M = prob.source if key == "source" else prob.target
            if M.d == 1:
                ld = levi_data(M)
                out[key]["levi_nondegenerate"] = ld.nondegenerate
                out[key]["epsilon"] = list(ld.epsilon) if ld.epsilon else None
    return out


def cmd_degeneracy(prob, args):
    H = _need_map(prob, "degeneracy")
    rep, probe, hv, bounds = analyze(H, k_max=_opt(args, prob, "kmax", None),
                                     samples=_opt(args, prob, "samples", 0),
                                     seed=_opt(args, prob, "seed", 0))
    out = rep.to_json()
    out["bounds"] = [b.to_json() for b in bounds]
    out["dim_X0"] = hv.dim0
    out["notes"] = rep.notes
    return out


def cmd_constancy(prob, args):
    H = _need_map(prob, "constancy")
    kmax = _opt(args, prob, "kmax", None)
    kmax = H.target.N - H.target.d if kmax is None else kmax
    rows = degeneracy_rows(H, min(kmax, H.order - 1))
    rep = degeneracy_at_origin(rows)
    pts = prob.options.get("sample_points")
    if pts:
        pts = [[GaussianRational.parse(str(x)) for x in p] for p in pts]
    samples = _opt(args, prob, "samples", 4 if H.exact and prob.source.polynomial else 0)
    res = constant_rank_probe(H, rep, rows, sample_points=pts, samples=samples,
                              seed=_opt(args, prob, "seed", 0))
    return {"s": rep.s, "k0": rep.k0, "verdict": res.verdict, "symbolic": res.symbolic,
            "sampled": res.sampled, "witness": res.witness, "minors_checked": res.minors_checked}


def cmd_holvf(prob, args):
    H = _need_map(prob, "holvf")
    J = _opt(args, prob, "jet_order", min(H.order, 3))
    hv = hol_vector_fields(H, J)
    return {"jet_order": J, "dim_X0": hv.dim0, "basis_size": len(hv.basis),
            "values_at_0": [[_s(x) for x in v] for v in hv.values_at_0]}


def cmd_segre(prob, args):
    L = _opt(args, prob, "levels", 4)
    out = []
    for k in range(L + 1):
        v = segre_map(prob.source, k)
        out.append({"level": k, "components": [_s(c) for c in v.components],
                    "vanishing": v.vanishing_ok})
    return {"segre_maps": out}


def cmd_finite_type(prob, args):
    M = prob.source
    res = finite_type_test(M, _opt(args, prob, "levels", M.d + 1),
                           trials=_opt(args, prob, "trials", 8), seed=_opt(args, prob, "seed", 0))
    out = res.to_json()
    zp = prob.options.get("zero_point")
    if zp:
        pt = [GaussianRational.parse(str(x)) for x in zp["point"]]
        out["zero_point_check"] = check_zero_point(M, zp["level"], pt)
    return out


def cmd_basic_identity(prob, args):
    H = _need_map(prob, "basic-identity")
    rep = analyze(H, k_max=_opt(args, prob, "kmax", None))[0]
    cert = basic_identity(H, rep)
    return cert.to_json()


def cmd_basic_identity_1deg(prob, args):
    H = _need_map(prob, "basic-identity-1deg")
    cert = basic_identity_1deg(H)
    return cert.to_json()


def cmd_jets(prob, args, prob2=None):
    if prob2 is None:
        raise ProblemError("command 'jets' needs two problem files")
    H1, H2 = _need_map(prob, "jets"), _need_map(prob2, "jets")
    mode = prob.options.get("mode", "nondeg")
    res = jet_determination_check(H1, H2, mode=mode, levels=_opt(args, prob, "levels", None),
                                  trials=_opt(args, prob, "trials", 8),
                                  seed=_opt(args, prob, "seed", 0))
    return res.to_json()


DISPATCH = {
    "check": cmd_check, "degeneracy": cmd_degeneracy, "constancy": cmd_constancy,
    "holvf": cmd_holvf, "segre": cmd_segre, "finite-type": cmd_finite_type,
    "basic-identity": cmd_basic_identity, "basic-identity-1deg": cmd_basic_identity_1deg,
    "jets": cmd_jets,
}


def run_command(cmd, prob, args=None, prob2=None) -> dict:
    if cmd not in DISPATCH:
        raise ProblemError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    args = args or argparse.Namespace()
    if cmd == "jets":
        result = cmd_jets(prob, args, prob2)
    else:
        result = DISPATCH[cmd](prob, args)
    digests = [prob.digest] + ([prob2.digest] if prob2 is not None else [])
    return {"schema": SCHEMA, "version": __version__, "command": cmd, "order": prob.order,
            "seed": _opt(args, prob, "seed", 0), "input_digest": digests, "result": result}


def format_text(report: dict) -> str:
    lines = [f"crdeg {report['version']}  {report['command']}  (order {report['order']}, "
             f"seed {report['seed']})"]

    def walk(obj, indent=2):
        pad = " " * indent
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, (dict, list)) and v and not _flat(v):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 2)
                else:
                    lines.append(f"{pad}{k}: {_short(v)}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)) and not _flat(v):
                    lines.append(f"{pad}-")
                    walk(v, indent + 2)
                else:
                    lines.append(f"{pad}- {_short(v)}")

    walk(report["result"])
    return "\n".join(lines)


def _flat(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _short(v, limit=200):
    s = json.dumps(v) if isinstance(v, (list, dict)) else str(v)
    return s if len(s) <= limit else s[:limit] + " ..."


def build_parser():
    p = argparse.ArgumentParser(prog="crdeg", description="degeneracy of formal CR maps")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file")
    p.add_argument("file2", nargs="?")
    p.add_argument("--order", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--version", action="version", version=f"crdeg {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        prob = parse_problem(args.file, order=args.order)
        prob2 = parse_problem(args.file2, order=args.order) if args.file2 else None
        report = run_command(args.command, prob, args, prob2)
    except (IdentityError, MapError, DegeneracyError, ManifoldError, JetError) as exc:
        print(f"crdeg: hypothesis not satisfied: {exc}", file=sys.stderr)
        return 3
    except (ProblemError, SeriesError, json.JSONDecodeError) as exc:
        if isinstance(exc, PrecisionError):
            print(f"crdeg: order budget exhausted: {exc}", file=sys.stderr)
            return 3
        print(f"crdeg: input error: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(format_text(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
