"""Command-line front end: every library operation on chain files.

One subcommand per operation, one chain file per invocation.  Default
output is a short human-readable report; `--json` switches to a single
structured document (stable key order, canonical number strings) that
validates against the packaged schema.json.  Exit codes: 0 on success,
2 on a precondition violation (including parse errors and infeasible
fills), 1 on an internal defect.

Numbers inside JSON reports are strings in the file format, integers
and `a/b` rationals exactly and floats via repr, so reports are stable
byte for byte.  Cell coefficients, counts, and indices stay JSON
integers.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .boxes import (BoxChain, arrangement_complex, compile_chain, deform,
                    slice_mass_integral, slice_mass_star)
from .cone import SimplicialChain, boundary_simplicial, cone, cone_mass_report
from .core import (InternalDefectError, IntChain, ModPChain,
                   PreconditionError, canonical_residue)
from .curves import (CurveSystem, cycle_representative, decompose_paths_loops,
                     extract_cycle_indices, preprocess, system_boundary)
from .fileio import ChainFile, ParseError, format_number, load_chainfile
from .flatnorm import (FillInfeasibleError, fill_mod_p, flat_norm_int,
                       flat_norm_mod_p, flat_norm_under_refinement,
                       isoperimetric_ratio)

COMMANDS = ("validate", "mass", "massp", "reduce", "boundary", "flatnorm",
            "flatnormp", "fill", "isoratio", "restrict", "slice", "islice",
            "slicemass", "slicestar", "deform", "refinecompare", "sysboundary",
            "preprocess", "cyclecut", "decompose", "cyclerep", "cone",
            "conereport")


def _simplex_token(simplex) -> str:
    return " ; ".join(",".join(format_number(c) for c in v)
                      for v in simplex.vertices)


def _chain_doc(chain) -> dict:
    if isinstance(chain, BoxChain):
        return {"carrier": "box", "ambient": chain.ambient_dim, "dim": chain.dim,
                "items": [[cell.id_token(), g] for cell, g in chain.items()]}
    if isinstance(chain, SimplicialChain):
        return {"carrier": "simplicial", "ambient": chain.ambient_dim,
                "dim": chain.dim,
                "items": [[_simplex_token(s), g] for s, g in chain.items()]}
    if isinstance(chain, ModPChain):
        return {"carrier": "abstract", "dim": chain.dim, "p": chain.p,
                "items": [[cid, g] for cid, g in chain.items()]}
    if isinstance(chain, IntChain):
        return {"carrier": "abstract", "dim": chain.dim,
                "items": [[cid, g] for cid, g in chain.items()]}
    raise InternalDefectError(f"cannot serialize {type(chain).__name__}")


def _points_doc(coeffs: dict[str, int]) -> dict:
    return {"carrier": "points", "dim": 0,
            "items": [[pt, g] for pt, g in sorted(coeffs.items())]}


def _parse_csv(text: str, convert, flag: str) -> list:
    try:
        return [convert(tok.strip()) for tok in text.split(",") if tok.strip() != ""]
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"cannot parse --{flag} value {text!r}") from None


def _need_p(args, cf: ChainFile) -> int:
    if args.p is not None:
        return args.p
    if cf.p is not None:
        return cf.p
    raise PreconditionError("a modulus is required: pass --p or put a `p` line in the file")


def _as_box(cf: ChainFile) -> BoxChain:
    if cf.carrier != "box":
        raise PreconditionError(f"this subcommand needs a box file, got {cf.carrier!r}")
    return cf.payload


def _as_curves(cf: ChainFile) -> CurveSystem:
    if cf.carrier != "curves":
        raise PreconditionError(f"this subcommand needs a curves file, got {cf.carrier!r}")
    return cf.payload


def _as_simplicial(cf: ChainFile) -> SimplicialChain:
    if cf.carrier != "simplicial":
        raise PreconditionError(f"this subcommand needs a simplicial file, got {cf.carrier!r}")
    return cf.payload


def _as_cellular(cf: ChainFile, ambient: bool) -> IntChain:
    """A chain over an explicit complex: abstract directly, box compiled.

    With ambient=True a box chain is compiled over the full arrangement
    of its coordinate values, so higher-dimensional fillings exist; the
    flat norms this computes are relative to that complex.
    """
    if cf.carrier == "abstract":
        return cf.payload[1]
    if cf.carrier == "box":
        _, chain = (arrangement_complex if ambient else compile_chain)(cf.payload)
        return chain
    raise PreconditionError(
        f"this subcommand needs a box or abstract file, got {cf.carrier!r}")


def _axis_list(args) -> list[int]:
    if args.axis is None:
        raise PreconditionError("--axis is required")
    return _parse_csv(args.axis, int, "axis")


def _level_list(args) -> list[Fraction]:
    if args.r is None:
        raise PreconditionError("--r is required")
    return _parse_csv(args.r, Fraction, "r")


def _one(values: list, flag: str):
    if len(values) != 1:
        raise PreconditionError(f"--{flag} takes exactly one value here")
    return values[0]


# -- handlers ---------------------------------------------------------------

def _cmd_validate(args, cf):
    if cf.carrier == "abstract":
        cx, chain = cf.payload
        report = cx.validate()
        detail = {k: (format_number(v) if isinstance(v, (int, Fraction, float))
                      and not isinstance(v, bool) else v)
                  for k, v in report.detail.items()}
        result = {"ok": report.ok, "carrier": cf.carrier,
                  "message": report.message, "cell": report.cell_id,
                  "detail": detail, "chain_cells": len(chain.items())}
        return result, 0 if report.ok else 2
    if cf.carrier == "box":
        chain = cf.payload
        cx, _ = compile_chain(chain)
        report = cx.validate()
        if not report.ok:
            raise InternalDefectError(f"compiled box complex invalid: {report.message}")
        result = {"ok": True, "carrier": cf.carrier, "cells": len(chain.items()),
                  "ambient": chain.ambient_dim, "dim": chain.dim}
        return result, 0
    if cf.carrier == "curves":
        return {"ok": True, "carrier": cf.carrier, "curves": len(cf.payload)}, 0
    return {"ok": True, "carrier": cf.carrier, "cells": len(cf.payload.items()),
            "ambient": cf.payload.ambient_dim, "dim": cf.payload.dim}, 0


def _cmd_mass(args, cf):
    if cf.carrier == "curves":
        total = sum((item.mass for item in cf.payload.items), Fraction(0))
    elif cf.carrier == "abstract":
        total = cf.payload[1].mass()
    else:
        total = cf.payload.mass()
    return {"mass": format_number(total)}, 0


def _cmd_massp(args, cf):
    p = _need_p(args, cf)
    if cf.carrier == "curves":
        raise PreconditionError("mass mod p does not apply to curve systems")
    chain = cf.payload[1] if cf.carrier == "abstract" else cf.payload
    return {"mass_p": format_number(chain.mass_p(p)), "p": p}, 0


def _cmd_reduce(args, cf):
    p = _need_p(args, cf)
    if cf.carrier == "box":
        return {"chain": _chain_doc(cf.payload.reduce_mod_p(p))}, 0
    if cf.carrier == "abstract":
        return {"chain": _chain_doc(cf.payload[1].reduce_mod_p(p))}, 0
    if cf.carrier == "simplicial":
        chain = cf.payload
        reduced = SimplicialChain(chain.ambient_dim, chain.dim,
                                  [(s, canonical_residue(g, p)) for s, g in chain.items()])
        return {"chain": _chain_doc(reduced)}, 0
    raise PreconditionError("reduce does not apply to curve systems")


def _cmd_boundary(args, cf):
    if cf.carrier == "curves":
        return {"chain": _points_doc(system_boundary(cf.payload))}, 0
    if cf.carrier == "simplicial":
        return {"chain": _chain_doc(boundary_simplicial(cf.payload))}, 0
    chain = cf.payload[1] if cf.carrier == "abstract" else cf.payload
    return {"chain": _chain_doc(chain.boundary())}, 0


def _cmd_flatnorm(args, cf):
    chain = _as_cellular(cf, ambient=True)
    witness = flat_norm_int(chain, args.bound)
    return {"value": format_number(witness.value),
            "remainder": _chain_doc(witness.remainder),
            "filling": _chain_doc(witness.filling),
            "exact": witness.exact, "bound": witness.bound,
            "bound_saturated": witness.bound_saturated}, 0


def _cmd_flatnormp(args, cf):
    p = _need_p(args, cf)
    chain = _as_cellular(cf, ambient=True)
    witness = flat_norm_mod_p(chain, p)
    return {"value": format_number(witness.value),
            "remainder": _chain_doc(witness.remainder),
            "filling": _chain_doc(witness.filling),
            "exact": witness.exact, "p": p}, 0


def _cmd_fill(args, cf):
    p = _need_p(args, cf)
    chain = _as_cellular(cf, ambient=True)
    filling = fill_mod_p(chain, p)
    return {"filling": _chain_doc(filling),
            "filling_mass": format_number(filling.mass_p(p)), "p": p}, 0


def _cmd_isoratio(args, cf):
    p = _need_p(args, cf)
    chain = _as_cellular(cf, ambient=True)
    ratio = isoperimetric_ratio(chain, p)
    filling = fill_mod_p(chain, p)
    return {"ratio": format_number(ratio),
            "cycle_mass": format_number(chain.mass_p(p)),
            "filling_mass": format_number(filling.mass_p(p)), "p": p}, 0


def _cmd_restrict(args, cf):
    chain = _as_box(cf)
    axis = _one(_axis_list(args), "axis")
    level = _one(_level_list(args), "r")
    return {"chain": _chain_doc(chain.restrict(axis, level, args.side))}, 0


def _cmd_slice(args, cf):
    chain = _as_box(cf)
    axis = _one(_axis_list(args), "axis")
    level = _one(_level_list(args), "r")
    return {"chain": _chain_doc(chain.slice(axis, level))}, 0


def _cmd_islice(args, cf):
    chain = _as_box(cf)
    axes = _axis_list(args)
    levels = _level_list(args)
    if len(axes) != len(levels):
        raise PreconditionError(
            f"{len(axes)} axes against {len(levels)} levels")
    return {"chain": _chain_doc(chain.iterated_slice(axes, levels))}, 0


def _cmd_slicemass(args, cf):
    chain = _as_box(cf)
    p = _need_p(args, cf)
    axes = _axis_list(args)
    return {"value": format_number(slice_mass_integral(chain, axes, p)), "p": p}, 0


def _cmd_slicestar(args, cf):
    chain = _as_box(cf)
    p = _need_p(args, cf)
    return {"value": format_number(slice_mass_star(chain, p)), "p": p}, 0


def _cmd_deform(args, cf):
    chain = _as_box(cf)
    if args.eta is None:
        raise PreconditionError("--eta is required")
    eta = Fraction(args.eta)
    rho = _parse_csv(args.rho, Fraction, "rho") if args.rho is not None else None
    result = deform(chain, eta, rho=rho, p=args.p,
                    optimize_thresholds=args.optimize)
    return {"rounded": _chain_doc(result.rounded),
            "boundary_sweep": _chain_doc(result.boundary_sweep),
            "chain_sweep": _chain_doc(result.chain_sweep),
            "eta": format_number(result.eta),
            "rho": [format_number(r) for r in result.rho],
            "ratios": {"rounded": format_number(result.ratio_rounded),
                       "boundary_sweep": format_number(result.ratio_boundary_sweep),
                       "chain_sweep": format_number(result.ratio_chain_sweep)}}, 0


def _cmd_refinecompare(args, cf):
    chain = _as_box(cf)
    p = _need_p(args, cf)
    if args.subdiv is None:
        raise PreconditionError("--subdiv is required")
    coarse, refined = flat_norm_under_refinement(chain, p, args.subdiv)
    return {"coarse": format_number(coarse), "refined": format_number(refined),
            "monotone": refined <= coarse, "p": p, "subdiv": args.subdiv}, 0


def _cmd_sysboundary(args, cf):
    system = _as_curves(cf)
    return {"boundary": dict(sorted(system_boundary(system).items()))}, 0


def _cmd_preprocess(args, cf):
    system = _as_curves(cf)
    reduced, trace = preprocess(system)
    events = []
    for event in trace.events:
        if event[0] == "loop":
            events.append({"kind": "loop", "sources": list(event[1])})
        else:
            events.append({"kind": "concat", "left": list(event[1]),
                           "right": list(event[2])})
    return {"items": [{"index": it.index, "start": it.start, "end": it.end,
                       "mass": format_number(it.mass)} for it in reduced.items],
            "sources": [list(src) for src in trace.sources],
            "loops": [list(src) for src in trace.loops],
            "events": events}, 0


def _cmd_cyclecut(args, cf):
    system = _as_curves(cf)
    p = _need_p(args, cf)
    return {"indices": extract_cycle_indices(system, p), "p": p}, 0


def _cmd_decompose(args, cf):
    chain = _as_cellular(cf, ambient=False)
    paths = decompose_paths_loops(chain)
    docs = [{"vertices": list(path.vertices),
             "edges": [[cid, sign] for cid, sign in path.edges],
             "closed": path.closed, "mass": format_number(path.mass)}
            for path in paths]
    return {"paths": docs,
            "open_count": sum(1 for p_ in paths if not p_.closed),
            "loop_count": sum(1 for p_ in paths if p_.closed)}, 0


def _cmd_cyclerep(args, cf):
    p = _need_p(args, cf)
    chain = _as_cellular(cf, ambient=False)
    return {"chain": _chain_doc(cycle_representative(chain, p)), "p": p}, 0


def _apex(args):
    if args.apex is None:
        raise PreconditionError("--apex is required")
    return tuple(_parse_csv(args.apex, Fraction, "apex"))


def _cmd_cone(args, cf):
    chain = _as_simplicial(cf)
    return {"chain": _chain_doc(cone(_apex(args), chain))}, 0


def _cmd_conereport(args, cf):
    chain = _as_simplicial(cf)
    p = args.p if args.p is not None else cf.p
    report = cone_mass_report(_apex(args), chain, p)
    return {"cone_mass": format_number(report.cone_mass),
            "cone_mass_p": None if report.cone_mass_p is None
            else format_number(report.cone_mass_p),
            "radius": format_number(report.radius)}, 0


_HANDLERS = {name: fn for name, fn in (
    ("validate", _cmd_validate), ("mass", _cmd_mass), ("massp", _cmd_massp),
    ("reduce", _cmd_reduce), ("boundary", _cmd_boundary),
    ("flatnorm", _cmd_flatnorm), ("flatnormp", _cmd_flatnormp),
    ("fill", _cmd_fill), ("isoratio", _cmd_isoratio),
    ("restrict", _cmd_restrict), ("slice", _cmd_slice), ("islice", _cmd_islice),
    ("slicemass", _cmd_slicemass), ("slicestar", _cmd_slicestar),
    ("deform", _cmd_deform), ("refinecompare", _cmd_refinecompare),
    ("sysboundary", _cmd_sysboundary), ("preprocess", _cmd_preprocess),
    ("cyclecut", _cmd_cyclecut), ("decompose", _cmd_decompose),
    ("cyclerep", _cmd_cyclerep), ("cone", _cmd_cone),
    ("conereport", _cmd_conereport))}


# -- dispatch ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatchains",
        description="Mass, flat norm, slicing, deformation, and cycle "
                    "extraction for chains mod p on finite complexes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("file", help="chain file")
        cmd.add_argument("--p", type=int, help="modulus")
        cmd.add_argument("--axis", help="axis index, or comma list of them (0-based)")
        cmd.add_argument("--r", help="level, or comma list of levels")
        cmd.add_argument("--eta", help="coarse grid spacing")
        cmd.add_argument("--rho", help="comma list of rounding thresholds in (0,1)")
        cmd.add_argument("--bound", type=int, help="coefficient bound for flatnorm")
        cmd.add_argument("--subdiv", type=int, help="refinement factor")
        cmd.add_argument("--seed", type=int,
                         help="echoed for provenance; algorithms are deterministic")
        cmd.add_argument("--side", choices=("below", "above"), default="below")
        cmd.add_argument("--apex", help="comma-separated apex coordinates")
        cmd.add_argument("--optimize", action="store_true",
                         help="search rounding thresholds instead of the default")
        cmd.add_argument("--json", action="store_true", dest="as_json")
        cmd.add_argument("--timing", action="store_true",
                         help="include elapsed seconds in the report")
    return parser


def _inputs_doc(args) -> dict:
    doc = {"file": Path(args.file).name}
    for flag in ("p", "bound", "subdiv", "seed"):
        value = getattr(args, flag)
        if value is not None:
            doc[flag] = value
    if args.axis is not None:
        doc["axis"] = _parse_csv(args.axis, int, "axis")
    if args.r is not None:
        doc["r"] = [format_number(v) for v in _parse_csv(args.r, Fraction, "r")]
    if args.eta is not None:
        doc["eta"] = format_number(Fraction(args.eta))
    if args.rho is not None:
        doc["rho"] = [format_number(v) for v in _parse_csv(args.rho, Fraction, "rho")]
    if args.apex is not None:
        doc["apex"] = [format_number(v) for v in _parse_csv(args.apex, Fraction, "apex")]
    if args.command == "restrict":
        doc["side"] = args.side
    if args.optimize:
        doc["optimize"] = True
    return doc


def _emit(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, sort_keys=True, indent=2))
        return
    print(f"command: {doc['command']}")
    body = doc.get("result") if doc.get("result") is not None else doc.get("error")
    for key in sorted(body):
        print(f"{key}: {json.dumps(body[key], sort_keys=True)}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    doc = {"version": 1, "command": args.command}
    try:
        doc["inputs"] = _inputs_doc(args)
        cf = load_chainfile(args.file)
        result, code = _HANDLERS[args.command](args, cf)
        doc["result"] = result
    except (ParseError, PreconditionError, FillInfeasibleError) as err:
        kind = "infeasible" if isinstance(err, FillInfeasibleError) else "precondition"
        doc["error"] = {"kind": kind, "message": str(err)}
        code = 2
    except InternalDefectError as err:
        doc["error"] = {"kind": "defect", "message": str(err)}
        code = 1
    except Exception as err:
        doc["error"] = {"kind": "defect", "message": f"{type(err).__name__}: {err}"}
        code = 1
    doc["timing"] = ({"seconds": format_number(round(time.perf_counter() - started, 6))}
                     if args.timing else None)
    _emit(doc, args.as_json)
    return code


if __name__ == "__main__":
    sys.exit(main())
