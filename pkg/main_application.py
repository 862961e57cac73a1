# main_application.py
import argparse
import json
import logging
import os
import sys
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError

from crew.verification_crew import SUITES, VerificationCrew
from geometry.exact import snf
from geometry.kempty import (
    STRIP_RULES,
    enumerate_sporadic_minimal,
    farey_strips,
    k_equivalent,
    lattice_equivalent,
    sporadic_bound,
    standard_form,
)
from geometry.polytope import (
    is_canonical_polytope,
    is_terminal_polytope,
    k_empty_witness,
    lattice_points,
    q_gorenstein,
)
from singularities.catalog import ENTRY_KINDS, build, get_entry, list_entries
from singularities.coxring import anticanonical_class, class_group, cox_presentation
from singularities.cplxone import ensure_valid, verdict
from tools.config import LOG_LEVELS, Settings, configure_logging, load_settings
from tools.serialization import (
    MatrixInput,
    PolytopeInput,
    ReportEnvelope,
    SnfInput,
    TriangleInput,
    TrianglePairInput,
    describe_validation_error,
    dumps,
    error_json,
    leaf_point_to_json,
    matrix_to_json,
    parse_input,
    polytope_to_json,
    render_text,
    with_schema,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_INTERRUPTED = 130

Payload = Dict[str, Any]


def setup_environment(argv_overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """Load .env and LATTICE_* variables, apply flag overrides and configure logging"""
    settings = load_settings().with_overrides(**(argv_overrides or {}))
    configure_logging(settings)
    return settings


def _status(args, message: str) -> None:
    # status lines go to stderr and only in text mode, JSON on stdout stays clean
    if args.report == "text":
        print(message, file=sys.stderr)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    if not os.path.exists(path):
        raise ValueError(f"Input file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _load(model, args):
    return parse_input(model, _read_input(args.input))


# --- handlers ---------------------------------------------------------------

def _cmd_snf(args, settings: Settings) -> Tuple[Payload, bool]:
    data = _load(SnfInput, args)
    decomp = snf(data.matrix)
    return {
        "S": decomp.S,
        "V": decomp.V,
        "W": decomp.W,
        "divisors": decomp.divisors,
        "rank": sum(1 for s in decomp.divisors if s),
    }, True


def _cmd_polytope_check(args, settings: Settings) -> Tuple[Payload, bool]:
    P = _load(PolytopeInput, args).to_polytope()
    result: Payload = {
        "dimension": P.dimension,
        "vertices": polytope_to_json(P)["vertices"],
        "facets": len(P.facets) if P.is_full_dimensional else None,
    }
    try:
        data = q_gorenstein(P)
    except ValueError as e:
        result["q_gorenstein"] = None
        result["note"] = str(e)
        data = None
    if data is None:
        result.setdefault("q_gorenstein", None)
    else:
        canonical = is_canonical_polytope(P)
        terminal = is_terminal_polytope(P)
        result.update(
            {
                "q_gorenstein": {"alpha": data.alpha, "index": data.index},
                "canonical": canonical.holds,
                "terminal": terminal.holds,
                "witness": canonical.witness if not canonical.holds else terminal.witness,
            }
        )
    if args.k is not None:
        if not P.is_lattice():
            raise ValueError("k-emptiness needs a lattice polytope")
        witness = k_empty_witness(P, args.k)
        result.update({"k": args.k, "k_empty": witness is None, "k_witness": witness})
    return result, True


def _cmd_polytope_points(args, settings: Settings) -> Tuple[Payload, bool]:
    P = _load(PolytopeInput, args).to_polytope()
    points = lattice_points(P)
    return {"count": len(points), "points": points}, True


def _triangle_json(t) -> Payload:
    return {"a": t.a, "x": t.x, "y": t.y, "vertices": t.triangle().vertices}


def _cmd_kempty_sporadic(args, settings: Settings) -> Tuple[Payload, bool]:
    if args.k < 1:
        raise ValueError("--k must be a positive integer")
    _status(args, f"🚀 Enumerating sporadic {args.k}-empty triangles ({settings.strip_rule} rule)...")
    triangles = enumerate_sporadic_minimal(args.k, rule=settings.strip_rule, workers=settings.workers)
    return {
        "k": args.k,
        "count": len(triangles),
        "bound": sporadic_bound(args.k),
        "strip_rule": settings.strip_rule,
        "triangles": [_triangle_json(t) for t in triangles],
    }, True


def _cmd_kempty_standard_form(args, settings: Settings) -> Tuple[Payload, bool]:
    data = _load(TriangleInput, args)
    st, T = standard_form(data.to_triangle(), data.k)
    return {
        "k": data.k,
        "standard_form": _triangle_json(st),
        "minimal": st.is_minimal,
        "transform": {"A": T.A, "w": T.w},
    }, True


def _cmd_kempty_strips(args, settings: Settings) -> Tuple[Payload, bool]:
    if args.k < 1:
        raise ValueError("--k must be a positive integer")
    strips = farey_strips(args.k)
    return {
        "k": args.k,
        "count": len(strips),
        "strips": [{"f": str(F.f), "upper_strict": F.upper_strict} for F in strips],
    }, True


def _cmd_kempty_equivalent(args, settings: Settings) -> Tuple[Payload, bool]:
    data = _load(TrianglePairInput, args)
    S1, S2 = data.triangles()
    T = lattice_equivalent(S1, S2, data.k)
    return {
        "k": data.k,
        "equivalent": k_equivalent(S1, S2, data.k),
        "transform": {"A": T.A, "w": T.w} if T is not None else None,
    }, True


def _matrix_verdict(args, with_witnesses: bool) -> Tuple[Payload, bool]:
    P = _load(MatrixInput, args).to_defining_matrix()
    ensure_valid(P)
    v = verdict(P, require_normal_form=not args.intrinsic)
    info = v.normal_form
    result: Payload = {
        "log_terminal": v.log_terminal,
        "canonical": v.canonical,
        "terminal": v.terminal,
        "case": info.case if info else None,
        "iota": info.iota if info else None,
        "zeta": info.zeta if info else None,
    }
    if with_witnesses:
        result["mu"] = info.mu if info else None
        result["witnesses"] = [leaf_point_to_json(P, w) for w in v.witnesses]
        result["notes"] = list(v.notes)
        result["matrix"] = matrix_to_json(P)
    return result, True


def _cmd_matrix_check(args, settings: Settings) -> Tuple[Payload, bool]:
    return _matrix_verdict(args, with_witnesses=False)


def _cmd_matrix_verdict(args, settings: Settings) -> Tuple[Payload, bool]:
    return _matrix_verdict(args, with_witnesses=True)


def _cmd_matrix_classgroup(args, settings: Settings) -> Tuple[Payload, bool]:
    P = _load(MatrixInput, args).to_defining_matrix()
    ensure_valid(P)
    group, Q = class_group(P)
    cox = cox_presentation(P)
    K = anticanonical_class(P, Q)
    return {
        "class_group": group.describe(),
        "free_rank": group.free_rank,
        "torsion": group.torsion,
        "degree_matrix": Q.rows,
        "variables": cox.variables,
        "relations": cox.render(),
        "canonical_class": K.element,
        "canonical_class_order": K.order,
    }, True


def _cmd_catalog_list(args, settings: Settings) -> Tuple[Payload, bool]:
    entries = list_entries(args.kind)
    return {
        "count": len(entries),
        "entries": [
            {
                "id": e.id,
                "kind": e.kind,
                "aliases": e.aliases,
                "case": e.case,
                "series": e.is_series,
                "grid_points": len(e.grid),
            }
            for e in entries
        ],
    }, True


def _cmd_catalog_show(args, settings: Settings) -> Tuple[Payload, bool]:
    entry = get_entry(args.entry_id)
    params = None
    if args.params:
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as e:
            raise ValueError(f"--params is not valid JSON: {e}")
        if not isinstance(params, dict):
            raise ValueError("--params must be a JSON object")
    inst = build(entry.id, params)
    result: Payload = {
        "id": entry.id,
        "kind": entry.kind,
        "aliases": entry.aliases,
        "params": inst.params,
        "schema": entry.params,
        "constraints": entry.constraints,
        "notes": entry.notes,
        "expected": inst.expected,
        "witness": entry.witness,
    }
    if inst.matrix is not None:
        result["matrix"] = matrix_to_json(inst.matrix)
    else:
        result["polytope"] = polytope_to_json(inst.polytope)
    return result, True


def _cmd_verify(args, settings: Settings) -> Tuple[Payload, bool]:
    crew = VerificationCrew(
        {
            "workers": settings.workers,
            "strip_rule": settings.strip_rule,
            "max_k": args.max_k,
            "catalog_filter": args.filter,
        }
    )
    _status(args, f"🚀 Running verification suite: {args.suite}")
    outcome = crew.kickoff({"suite": args.suite})
    for name, suite in outcome["suites"].items():
        mark = "✅" if suite["passed"] else "❌"
        _status(args, f"{mark} {name}: {suite['checks']} checks, {len(suite['failures'])} failure(s)")
    return outcome, outcome["passed"]


HANDLERS: Dict[Tuple[str, ...], Callable] = {
    ("snf",): _cmd_snf,
    ("polytope", "check"): _cmd_polytope_check,
    ("polytope", "lattice-points"): _cmd_polytope_points,
    ("kempty", "sporadic"): _cmd_kempty_sporadic,
    ("kempty", "standard-form"): _cmd_kempty_standard_form,
    ("kempty", "strips"): _cmd_kempty_strips,
    ("kempty", "equivalent"): _cmd_kempty_equivalent,
    ("matrix", "check"): _cmd_matrix_check,
    ("matrix", "verdict"): _cmd_matrix_verdict,
    ("matrix", "classgroup"): _cmd_matrix_classgroup,
    ("catalog", "list"): _cmd_catalog_list,
    ("catalog", "show"): _cmd_catalog_show,
    ("verify-paper",): _cmd_verify,
}


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", default="-", help="JSON input file ('-' reads stdin)")
    common.add_argument("--out", help="Write the result here instead of stdout")
    common.add_argument("--report", choices=["json", "text"], default="json", help="Output format")
    common.add_argument("--save-report", action="store_true", help="Also save a timestamped report file")
    common.add_argument("--workers", type=int, help="Process workers (overrides LATTICE_WORKERS)")
    common.add_argument("--strip-rule", choices=STRIP_RULES, help="Strip exemption rule (overrides LATTICE_STRIP_RULE)")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="Log level (overrides LATTICE_LOG_LEVEL)")

    parser = argparse.ArgumentParser(description="Exact lattice geometry and canonical singularity verification")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("snf", parents=[common], help="Smith normal form of an integer matrix")

    poly = sub.add_parser("polytope", help="Polytope predicates").add_subparsers(dest="action", required=True)
    check = poly.add_parser("check", parents=[common], help="Q-Gorenstein, canonical, terminal and k-empty tests")
    check.add_argument("--k", type=int, help="Also test k-emptiness")
    poly.add_parser("lattice-points", parents=[common], help="All lattice points")

    kempty = sub.add_parser("kempty", help="k-empty lattice triangles").add_subparsers(dest="action", required=True)
    sporadic = kempty.add_parser("sporadic", parents=[common], help="Sporadic minimal triangles")
    sporadic.add_argument("--k", type=int, required=True)
    kempty.add_parser("standard-form", parents=[common], help="Standard form of a k-empty triangle")
    strips = kempty.add_parser("strips", parents=[common], help="Farey strips of order k")
    strips.add_argument("--k", type=int, required=True)
    kempty.add_parser("equivalent", parents=[common], help="k-affine equivalence of two triangles")

    matrix = sub.add_parser("matrix", help="Complexity-one defining matrices").add_subparsers(dest="action", required=True)
    for name, help_text in (("check", "Canonicity verdict"), ("verdict", "Verdict with witnesses")):
        m = matrix.add_parser(name, parents=[common], help=help_text)
        m.add_argument("--intrinsic", action="store_true", help="Accept matrices outside the normal forms")
    matrix.add_parser("classgroup", parents=[common], help="Class group, degree matrix and Cox ring")

    catalog = sub.add_parser("catalog", help="Built-in catalog").add_subparsers(dest="action", required=True)
    lst = catalog.add_parser("list", parents=[common], help="List catalog entries")
    lst.add_argument("--kind", choices=ENTRY_KINDS)
    show = catalog.add_parser("show", parents=[common], help="Show one entry")
    show.add_argument("entry_id", help="Entry id or alias, e.g. P_13 or 56a")
    show.add_argument("--params", help="Parameters as a JSON object (first grid point if omitted)")

    verify = sub.add_parser("verify-paper", parents=[common], help="Run the verification suites")
    verify.add_argument("--suite", choices=SUITES + ("all",), default="all")
    verify.add_argument("--max-k", type=int, default=6, help="Largest k of the sporadic table")
    verify.add_argument("--filter", help="Catalog entry id, alias, kind or id prefix")
    return parser


def _save_report(args, settings: Settings, command: str, payload: Payload, ok: bool) -> str:
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    stem = "verification" if args.command == "verify-paper" else args.command
    os.makedirs(settings.report_dir, exist_ok=True)
    path = os.path.join(settings.report_dir, f"{stem}_report_{timestamp}.json")
    envelope = ReportEnvelope(command=command, success=ok, timestamp=datetime.now().isoformat(), result=payload)
    with open(path, "w", encoding="utf-8") as f:
        f.write(envelope.to_json())
    return path


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    key = (args.command,) + ((args.action,) if getattr(args, "action", None) else ())
    command = " ".join(key)
    try:
        settings = setup_environment(
            {"workers": args.workers, "strip_rule": args.strip_rule, "log_level": args.log_level}
        )
    except ValueError as e:
        print(error_json(str(e), command))
        return EXIT_INVALID

    _status(args, f"🔧 {command}")
    try:
        payload, ok = HANDLERS[key](args, settings)
    except ValidationError as e:
        _status(args, "❌ Invalid input")
        print(error_json(describe_validation_error(e), command))
        return EXIT_INVALID
    except ValueError as e:
        _status(args, f"❌ {e}")
        print(error_json(str(e), command))
        return EXIT_INVALID

    timings = payload.pop("timings", None)
    payload["success"] = ok
    if args.report == "text":
        _emit(args, render_text(payload))
    else:
        _emit(args, dumps(with_schema(payload)))

    if args.save_report:
        if timings is not None:
            payload["timings"] = {name: f"{seconds:.3f}" for name, seconds in timings.items()}
        path = _save_report(args, settings, command, payload, ok)
        _status(args, f"💾 Report saved: {path}")
    _status(args, "✅ Done" if ok else "❌ Verification failed")
    return EXIT_OK if ok else EXIT_FAILED


def main():
    """Main application entry point"""
    try:
        code = run()
    except KeyboardInterrupt:
        print("\n⏹️  Process interrupted by user", file=sys.stderr)
        code = EXIT_INTERRUPTED
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        code = EXIT_FAILED
    sys.exit(code)


if __name__ == "__main__":
    main()
