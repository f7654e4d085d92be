"""Command-line interface.

Every command prints one JSON document on stdout.  Progress events from long
runs go to stderr, one JSON object per line.  Basis arguments use the table
labels of the set (1-based numbering for most catalog sets).

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 not a KS set.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__, catalog
from .feasibility import encode_bks, encode_bks_capable, encode_ks, solve, to_cnf
from .games import evaluate_game
from .io import DocumentError, dump_json, fingerprint, instance_to_document, load_instance
from .ks import KSInstance, ValidationReport, subset_from_labels
from .search import (
    NotKSSetError,
    SearchCounters,
    call_budget_estimate,
    enumerate_capable,
    optimal_bks,
    optimal_bks_symmetric,
)
from .symmetry import automorphism_group, cycle_notation, orbit_count

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_NOT_KS = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Target:
    """A KS set from the catalog or from a file, with its validation report."""

    def __init__(self, spec: str):
        self.spec = spec
        self.entry = None
        path = Path(spec)
        if path.suffix == ".json" or path.exists():
            if not path.exists():
                raise UsageError(f"no such file: {spec}")
            try:
                self.instance, self.report, self.document = load_instance(path)
            except DocumentError as exc:
                self.instance = None
                self.report = ValidationReport(spec)
                self.report.add("document parses", False, str(exc))
                self.document = None
        else:
            try:
                self.entry = catalog.get(spec)
            except catalog.UnknownSetError as exc:
                raise UsageError(str(exc)) from exc
            self.instance = self.entry.instance
            self.report = self.entry.validation
            self.document = None

    @property
    def expected(self) -> dict:
        if self.entry is not None:
            return self.entry.expected
        if self.document:
            return self.document.get("metadata", {}).get("expected", {})
        return {}

    @property
    def deep(self) -> bool:
        return str(self.expected.get("tier", "1")) == "deep"


def _progress_writer(enabled: bool):
    if not enabled:
        return None

    def emit(event: dict) -> None:
        sys.stderr.write(json.dumps(event, sort_keys=True) + "\n")
        sys.stderr.flush()

    return emit


def _run_document(argv: Sequence[str], target: _Target, payload: dict, timing: dict,
                  counters: SearchCounters | None = None) -> dict:
    inst = target.instance
    doc = {
        "tool": "bkskit",
        "version": __version__,
        "python": platform.python_version(),
        "command": ["bkskit", *argv],
        "instance": {
            "name": inst.name,
            "fingerprint": fingerprint(inst),
            "source": inst.source,
            "dimension": inst.dimension,
            "vectors": inst.n_vectors,
            "bases": inst.n_bases,
        },
        "payload": payload,
        "timing": {k: f"{v:.3f}" for k, v in timing.items()},
    }
    if counters is not None:
        doc["counters"] = counters.to_dict()
    return doc


def _emit(doc: dict, output: str | None) -> None:
    text = dump_json(doc) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _require_valid(target: _Target) -> int | None:
    if target.report.passed and target.instance is not None:
        return None
    sys.stdout.write(dump_json(target.report.to_dict()) + "\n")
    return EXIT_INVALID


def _labels(instance: KSInstance, text: str) -> tuple[frozenset, str | None]:
    """Parse a comma list of basis labels; fall back to 1-based positions."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise UsageError("empty basis list")
    try:
        return subset_from_labels(instance, tokens), None
    except KeyError:
        pass
    if all(t.isdigit() and 1 <= int(t) <= instance.n_bases for t in tokens):
        note = f"{text!r} is not a list of basis labels; read as 1-based positions in the basis list"
        return frozenset(int(t) - 1 for t in tokens), note
    raise UsageError(f"{instance.name}: unknown basis labels in {text!r}; labels are {', '.join(instance.basis_labels)}")


def _cache_dir() -> Path:
    env = os.environ.get("BKS_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "bkskit"


def _expectation(target: _Target, size: tuple | None) -> dict | None:
    spec = target.expected.get("optimal_size")
    if not spec or size is None:
        return None
    out = {"status": spec.get("status")}
    if "value" in spec:
        out["value"] = spec["value"]
        out["matches"] = list(spec["value"]) == list(size)
    if "candidates" in spec:
        out["candidates"] = spec["candidates"]
        out["matches_candidates"] = sorted(k for k, v in spec["candidates"].items() if list(v) == list(size))
    return out


# Commands ----------------------------------------------------------------------

def cmd_validate(args, argv) -> int:
    target = _Target(args.target)
    rep = target.report.to_dict()
    if target.instance is not None:
        rep["vectors"] = target.instance.n_vectors
        rep["bases"] = target.instance.n_bases
        rep["dimension"] = target.instance.dimension
        if args.ks:
            rep["ks_set"] = solve(encode_ks(target.instance)) is None
    sys.stdout.write(dump_json(rep) + "\n")
    return EXIT_OK if target.report.passed else EXIT_INVALID


def cmd_optimal(args, argv) -> int:
    target = _Target(args.target)
    bad = _require_valid(target)
    if bad is not None:
        return bad
    if target.deep and not args.deep:
        raise UsageError(f"{target.instance.name} is a long-running set; pass --deep to run it")
    if args.two_phase and not args.symmetric:
        raise UsageError("--two-phase requires --symmetric")
    progress = _progress_writer(not args.quiet)
    checkpoint = _cache_dir() if args.deep else None
    t0 = time.perf_counter()
    if args.symmetric:
        report = optimal_bks_symmetric(target.instance, jobs=args.jobs, progress=progress,
                                       two_phase=args.two_phase, checkpoint=checkpoint)
    else:
        report = optimal_bks(target.instance, jobs=args.jobs, progress=progress, checkpoint=checkpoint)
    elapsed = time.perf_counter() - t0
    payload = report.payload(target.instance.basis_labels)
    exp = _expectation(target, report.optimal_size)
    if exp is not None:
        payload["expected"] = exp
    if report.k_min is not None and report.k_max is not None and not args.symmetric:
        budget = call_budget_estimate(target.instance, report.k_min, report.k_max)
        payload["call_budget"] = {k: v for k, v in budget.items() if v is not None}
    doc = _run_document(argv, target, payload, {"optimal": elapsed})
    if args.check:
        old = json.loads(Path(args.check).read_text(encoding="utf-8"))
        same = old.get("payload") == json.loads(dump_json(payload))
        doc["replay"] = {"report": args.check, "identical_payload": same}
        _emit(doc, args.output)
        return EXIT_OK if same else EXIT_INVALID
    _emit(doc, args.output)
    return EXIT_OK


def cmd_census(args, argv) -> int:
    target = _Target(args.target)
    bad = _require_valid(target)
    if bad is not None:
        return bad
    inst = target.instance
    if target.deep and not args.deep:
        raise UsageError(f"{inst.name} is a long-running set; pass --deep to run it")
    progress = _progress_writer(not args.quiet)
    counters = SearchCounters()
    timing = {}
    t0 = time.perf_counter()
    census = enumerate_capable(inst, jobs=args.jobs, progress=progress, counters=counters)
    timing["census"] = time.perf_counter() - t0
    payload: dict = {
        "instance": inst.name,
        "capable_total": census.total,
        "capable_by_size": {str(k): v for k, v in census.totals().items()},
        "k_min": census.k_min,
        "counters": counters.to_dict(),
    }
    if args.essential or args.iso:
        payload["essential_total"] = len(census.essential_masks)
        payload["essential_by_size"] = {str(k): v for k, v in census.essential_totals().items()}
    if args.iso:
        t1 = time.perf_counter()
        group = automorphism_group(inst)
        payload["automorphism_group"] = {
            "order": group.order,
            "graph_only_order": group.graph_only_order,
            "differs_from_graph_group": group.differs_from_graph_group,
            "generators": [cycle_notation(g, inst.vector_labels) for g in group.vector_generators],
            "notes": list(group.notes),
        }
        payload["iso_capable_by_size"] = {str(k): v for k, v in orbit_count(group, census.subsets()).items()}
        payload["iso_essential_by_size"] = {str(k): v for k, v in orbit_count(group, census.essential()).items()}
        timing["iso"] = time.perf_counter() - t1
    if args.list:
        labels = inst.basis_labels
        payload["essential_sets"] = [[labels[i] for i in s] for s in census.essential()]
        if not args.essential:
            payload["capable_sets"] = [[labels[i] for i in s] for s in census.subsets()]
    for key in ("capable_total", "essential_total"):
        if key in target.expected and key in payload:
            payload.setdefault("expected", {})[key] = {
                "value": target.expected[key], "matches": target.expected[key] == payload[key]}
    _emit(_run_document(argv, target, payload, timing), args.output)
    return EXIT_OK


def cmd_game(args, argv) -> int:
    target = _Target(args.target)
    bad = _require_valid(target)
    if bad is not None:
        return bad
    inst = target.instance
    s_a, note_a = _labels(inst, args.sa)
    s_b, note_b = _labels(inst, args.sb)
    t0 = time.perf_counter()
    rep = evaluate_game(inst, s_a, s_b, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    payload = rep.payload()
    payload["bks_by_solver"] = solve(encode_bks(inst, s_a, s_b)) is None
    notes = [n for n in (note_a, note_b) if n]
    if notes:
        payload["notes"] = notes
    if args.export_game:
        Path(args.export_game).write_text(dump_json(rep.game.to_document()) + "\n", encoding="utf-8")
    _emit(_run_document(argv, target, payload, {"game": elapsed}), args.output)
    return EXIT_OK


def cmd_export(args, argv) -> int:
    target = _Target(args.target)
    if target.instance is None:
        return _require_valid(target) or EXIT_INVALID
    meta = dict(target.entry.metadata) if target.entry is not None else dict(
        (target.document or {}).get("metadata", {}))
    doc = instance_to_document(target.instance, meta, include_edges=args.include_edges)
    Path(args.output).write_text(dump_json(doc) + "\n", encoding="utf-8")
    sys.stdout.write(dump_json({"written": args.output, "fingerprint": fingerprint(target.instance)}) + "\n")
    return EXIT_OK


def cmd_import(args, argv) -> int:
    path = Path(args.path)
    if not path.exists():
        raise UsageError(f"no such file: {args.path}")
    target = _Target(str(path))
    out = target.report.to_dict()
    if target.instance is not None:
        out["fingerprint"] = fingerprint(target.instance)
        out["name"] = target.instance.name
    if target.report.passed and args.output:
        doc = instance_to_document(target.instance, (target.document or {}).get("metadata", {}),
                                   include_edges=args.include_edges)
        Path(args.output).write_text(dump_json(doc) + "\n", encoding="utf-8")
        out["written"] = args.output
    sys.stdout.write(dump_json(out) + "\n")
    return EXIT_OK if target.report.passed else EXIT_INVALID


def cmd_cnf(args, argv) -> int:
    target = _Target(args.target)
    bad = _require_valid(target)
    if bad is not None:
        return bad
    inst = target.instance
    if args.capable:
        problem = encode_bks_capable(inst, _labels(inst, args.capable)[0])
    elif args.sa or args.sb:
        if not (args.sa and args.sb):
            raise UsageError("--sa and --sb go together")
        problem = encode_bks(inst, _labels(inst, args.sa)[0], _labels(inst, args.sb)[0])
    else:
        problem = encode_ks(inst)
    text = to_cnf(problem)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_list(args, argv) -> int:
    sys.stdout.write(dump_json({"sets": [e.summary() for e in catalog.list_entries()],
                                "aliases": dict(catalog.ALIASES)}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bkskit", description="Bipartite KS sets: search, census and games.")
    parser.add_argument("--version", action="version", version=f"bkskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a catalog set or a KS-set file")
    p.add_argument("target")
    p.add_argument("--ks", action="store_true", help="also decide whether it is a KS set")
    p.set_defaults(func=cmd_validate)

    def common(p, jobs=True):
        p.add_argument("target", help="catalog name or path to a KS-set JSON file")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes (never changes results)")
        p.add_argument("--deep", action="store_true", help="allow long-running sets; checkpoint to $BKS_CACHE_DIR")
        p.add_argument("--quiet", action="store_true", help="no progress events on stderr")
        p.add_argument("--output", "-o", help="also write the report to this file")

    p = sub.add_parser("optimal", help="optimal B-KS pair")
    common(p)
    p.add_argument("--symmetric", action="store_true", help="one S_A per isomorphism class")
    p.add_argument("--two-phase", action="store_true", help="fix the smallest |S_A|, scan |S_B| upward first")
    p.add_argument("--check", metavar="REPORT", help="compare the payload with a saved report")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("census", help="capable / essential sets by size")
    common(p)
    p.add_argument("--essential", action="store_true", help="include essential sets")
    p.add_argument("--iso", action="store_true", help="also count isomorphism classes")
    p.add_argument("--list", action="store_true", help="list the sets themselves")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("game", help="classical value and quantum strategy of the induced game")
    p.add_argument("target")
    p.add_argument("--sa", required=True, help="Alice's bases, comma separated labels")
    p.add_argument("--sb", required=True, help="Bob's bases, comma separated labels")
    p.add_argument("--export-game", metavar="PATH", help="write inputs, probabilities and win table")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (never changes results)")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("export", help="write a set as a KS-set JSON document")
    p.add_argument("target")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--include-edges", action="store_true", help="also write the orthogonality edge list")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="validate a KS-set file and optionally re-serialize it")
    p.add_argument("path")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--include-edges", action="store_true")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("cnf", help="DIMACS CNF of the KS, B-KS or capability problem")
    p.add_argument("target")
    p.add_argument("--sa")
    p.add_argument("--sb")
    p.add_argument("--capable", metavar="LABELS", help="capability problem for these bases")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_cnf)

    p = sub.add_parser("list", help="catalog summary")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args, argv)
    except UsageError as exc:
        sys.stderr.write(f"bkskit: error: {exc}\n")
        return EXIT_USAGE
    except NotKSSetError as exc:
        sys.stderr.write(f"bkskit: {exc}\n")
        sys.stdout.write(dump_json({"error": "not a KS set", "instance": exc.name,
                                    "witness": exc.witness}) + "\n")
        return EXIT_NOT_KS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
