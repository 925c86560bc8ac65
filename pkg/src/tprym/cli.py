"""Command-line driver: ``tprym <command> [--catalogue NAME | --file PATH] ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalogue
from .abel_prym import EdgeClass, abel_prym_graph, psi_harmonic_degree
from .bigonal import bigonal, bigonal_round_trip, compare_with_abel_prym, prym_scalar
from .double_cover import DoubleCover, Voltage, cover_from_dict, derive_cover
from .graph_core import GraphError, MetricGraph, ValidationError, bridges, fraction_str, genus, is_two_edge_connected
from .hyperelliptic import count_hyperelliptic_covers, hyperelliptic_certificate
from .morphisms import harmonic_degree, reversed_edges
from .prym_lattice import jacobian, pptav_isomorphic, prym
from .verification import run_all

COMMANDS = ("info", "hyperelliptic", "covers", "abel-prym", "prym-gram", "bigonal", "verify", "export-dot")


class ParseError(GraphError):
    pass


class UsageError(GraphError):
    pass


def _load_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def parse_graph_file(path) -> MetricGraph:
    data = _load_json(path)
    if isinstance(data, dict) and "base" in data:
        data = data["base"]
    return MetricGraph.from_dict(data)


def parse_cover_file(path) -> DoubleCover:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ValidationError("cover file must contain a JSON object")
    return cover_from_dict(data)


def _crossing(G: MetricGraph, text: str) -> Voltage:
    names = [x.strip() for x in text.split(",") if x.strip()]
    unknown = [x for x in names if not G.has_edge(x)]
    if unknown:
        raise ValidationError(f"unknown edges in --voltage: {unknown}")
    return Voltage.on_edges(G, names)


def resolve_graph(args) -> MetricGraph:
    if args.file:
        return parse_graph_file(args.file)
    if args.catalogue:
        if args.catalogue in catalogue.FIGURE_COVERS:
            return catalogue.figure_cover(args.catalogue).base
        return catalogue.base(args.catalogue)
    raise UsageError("give --catalogue NAME or --file PATH")


def resolve_cover(args) -> DoubleCover:
    if args.catalogue in catalogue.FIGURE_COVERS and not args.voltage:
        return catalogue.figure_cover(args.catalogue)
    if args.file and not args.voltage:
        return parse_cover_file(args.file)
    G = resolve_graph(args)
    if not args.voltage:
        raise UsageError("this command needs a cover: a catalogue cover, a cover file or --voltage")
    return derive_cover(G, _crossing(G, args.voltage))


# ---------------------------------------------------------------------------
# commands


def cmd_info(args) -> tuple[int, dict]:
    G = resolve_graph(args)
    report = {
        "vertices": len(G.vertices),
        "edges": len(G.edges),
        "connected": G.is_connected(),
        "bridges": sorted(bridges(G)),
        "two_edge_connected": is_two_edge_connected(G),
        "total_length": fraction_str(G.total_length()),
    }
    if G.is_connected():
        report["genus"] = genus(G)
    return 0, report


def cmd_hyperelliptic(args) -> tuple[int, dict]:
    G = resolve_graph(args)
    cert = hyperelliptic_certificate(G)
    if cert is None:
        return 0, {"hyperelliptic": False, "certificate": "none"}
    j = cert.involution
    return 0, {
        "hyperelliptic": True,
        "certificate": {
            "vertex_map": dict(sorted(j.vertex_map.items())),
            "edge_map": dict(sorted(j.edge_map.items())),
            "reversed": sorted(reversed_edges(j)),
            "fixed_points": [[p.edge, fraction_str(p.offset)] for p in cert.fixed_points],
            "fixed_components": [comp.label() for comp in cert.fixed_locus],
            "quotient_tree": cert.quotient_tree.to_dict(),
        },
    }


def cmd_covers(args) -> tuple[int, dict]:
    G = resolve_graph(args)
    conn, hyp, verdicts = count_hyperelliptic_covers(G)
    return 0, {
        "connected": conn,
        "hyperelliptic": hyp,
        "covers": [
            {
                "crossing": v.voltage.support(),
                "hyperelliptic": v.hyperelliptic,
                "weakly_fixed": None if v.weakly_fixed is None else v.weakly_fixed.label(),
                "star_set": None if v.star_set is None else sorted(str(a) for a in v.star_set),
            }
            for v in verdicts
        ],
    }


def _harmonic_report(c: DoubleCover, r) -> int | None:
    if is_two_edge_connected(c.total) and genus(c.base) >= 2:
        return psi_harmonic_degree(c)
    return harmonic_degree(r.psi)


def cmd_abel_prym(args) -> tuple[int, dict]:
    c = resolve_cover(args)
    r = abel_prym_graph(c)
    report = r.to_dict()
    report["image_genus"] = genus(r.image)
    report["harmonic_degree"] = _harmonic_report(c, r)
    return 0, report


def cmd_prym_gram(args) -> tuple[int, dict]:
    c = resolve_cover(args)
    r = abel_prym_graph(c)
    P = prym(c)
    J = jacobian(r.image)
    iso = pptav_isomorphic(P, J, args.bound) if P.rank == J.rank else None
    return (0 if iso is not None else 1), {
        "prym_gram": P.to_json(),
        "image_jacobian_gram": J.to_json(),
        "isomorphic": iso is not None,
        "change_of_basis": iso,
    }


def cmd_bigonal(args) -> tuple[int, dict]:
    c = resolve_cover(args)
    out = bigonal(c)
    cmp = compare_with_abel_prym(c, out)
    trip = bigonal_round_trip(c, out)
    s = prym_scalar(c, out)
    report = out.to_dict()
    report.update(
        matches_abel_prym=cmp.matches,
        comparison_mode=cmp.mode,
        abel_prym_genus=cmp.abel_prym_genus,
        involutive=trip,
        prym_scalar=None if s is None else fraction_str(s),
    )
    return 0, report


def cmd_verify(args) -> tuple[int, dict]:
    results = run_all()
    report = {
        "criteria": [
            {"number": r.number, "title": r.title, "ok": r.ok, "detail": r.detail} for r in results
        ],
        "all_passed": all(r.ok for r in results),
    }
    if not args.json:
        for r in results:
            print(r.line())
    return (0 if report["all_passed"] else 1), report


def cmd_export_dot(args) -> tuple[int, dict]:
    try:
        c = resolve_cover(args)
    except UsageError:
        c = None
    if c is None:
        dot = resolve_graph(args).to_dot()
    else:
        classes = abel_prym_graph(c, route="general").classes if c.is_connected() else {}
        style = {}
        for e, cls in classes.items():
            if cls is EdgeClass.CONTRACTED:
                style[e] = "style=dashed"
            elif cls is EdgeClass.DILATED2:
                style[e] = 'color="black:invis:black"'
        dot = c.total.to_dot(style)
    if args.dot:
        Path(args.dot).write_text(dot)
        return 0, {"written": args.dot}
    return 0, {"dot": dot}


HANDLERS = {
    "info": cmd_info,
    "hyperelliptic": cmd_hyperelliptic,
    "covers": cmd_covers,
    "abel-prym": cmd_abel_prym,
    "prym-gram": cmd_prym_gram,
    "bigonal": cmd_bigonal,
    "verify": cmd_verify,
    "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tprym", description="Exact computations with double covers of metric graphs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--file", help="graph or cover JSON file")
    p.add_argument("--catalogue", help=f"named graph or cover: {', '.join(catalogue.names())}")
    p.add_argument("--voltage", help="comma-separated list of edges with voltage 1")
    p.add_argument("--bound", type=int, default=3, help="coefficient bound for the lattice isometry search")
    p.add_argument("--json", action="store_true", help="print the report as canonical JSON")
    p.add_argument("--dot", help="write DOT output to this path (export-dot)")
    return p


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str)


def _human(report: dict, indent: str = "") -> str:
    lines = []
    for key, value in sorted(report.items()):
        if isinstance(value, dict) and value:
            lines.append(f"{indent}{key}:")
            lines.append(_human(value, indent + "  "))
        else:
            lines.append(f"{indent}{key}: {json.dumps(value, sort_keys=True, default=str)}")
    return "\n".join(lines)


def dispatch(command: str, args) -> tuple[int, dict]:
    return HANDLERS[command](args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, report = dispatch(args.command, args)
    except (GraphError, KeyError, ValueError, OSError) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc).strip("'\"")}))
        return 2
    if args.command == "export-dot" and "dot" in report and not args.json:
        sys.stdout.write(report["dot"])
    elif args.json:
        print(dumps(report))
    elif args.command != "verify":
        print(_human(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
