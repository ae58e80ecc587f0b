"""Command-line entry point.

``condan run`` executes theorem suites and writes a report;
``condan describe`` pretty-prints a serialized conditional object.

Exit codes: 0 all suites pass, 1 some suite failed, 2 configuration or
input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from condan import harness
from condan.analysis import ClosedSet, closed_set_from_json
from condan.boolean_algebra import Algebra, Partition
from condan.core import ConditionalValue, StableSet, support
from condan.errors import CondanError
from condan.linear import CondLinearMap, CondVector, SymmetricBody, lp_norm
from condan.numbers import CondNat, CondReal

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2
NORM_KINDS = ("l1", "l2", "linf")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose errors raise instead of exiting."""

    def error(self, message):
        raise _UsageError(self, message)


class _UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="condan", description="Conditional analysis engine over finite Boolean algebras.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run theorem suites")
    run.add_argument("--suite", default="all", help="comma-separated suite names, or 'all'")
    run.add_argument("--atoms", type=int, default=2)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--tol", type=float, default=1e-9)
    run.add_argument("--trunc", type=int, default=40)
    run.add_argument("--cases", type=int, default=1000)
    run.add_argument("--report", type=Path, default=None, help="write the report to this file")
    run.add_argument("--format", choices=("json", "markdown"), default="json")

    desc = sub.add_parser("describe", help="pretty-print a serialized conditional object")
    desc.add_argument("--input", type=Path, required=True)
    desc.add_argument("--norms", default="l1,l2,linf", help="norm kinds reported for vectors")
    parser.run_parser = run
    return parser


# --------------------------------------------------------------------------
# run


def _suite_names(text: str) -> list[str]:
    if text.strip() == "all":
        return list(harness.SUITES)
    names = [s.strip() for s in text.split(",") if s.strip()]
    unknown = [n for n in names if n not in harness.SUITES]
    if not names or unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown) or text!r}; choose from {', '.join(harness.SUITES)}")
    return names


def markdown_report(reports: list[harness.SuiteReport]) -> str:
    lines = [
        "| suite | cases | passed | failed | max violation | tolerance | runtime ms |",
        "|---|---:|---:|---:|---:|---:|---:|",
    ]
    for r in reports:
        lines.append(
            f"| {r.suite} | {r.cases} | {r.passed} | {r.failed} | {r.max_violation:.3g} "
            f"| {r.tolerance:.3g} | {r.runtime_ms:.0f} |"
        )
    status = "PASS" if all(r.ok for r in reports) else "FAIL"
    lines += ["", f"overall: {status}"]
    for r in reports:
        for w in r.witnesses:
            lines.append(f"- {r.suite} case {w['case']}: {w['failures'][0]['check']}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        names = _suite_names(args.suite)
        base = harness.SuiteConfig(
            names[0], atoms=args.atoms, seed=args.seed, tol=args.tol, truncation=args.trunc, cases=args.cases
        )
    except ValueError as exc:
        build_parser().run_parser.print_usage(sys.stderr)
        print(f"condan run: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    configs = [harness.SuiteConfig(n, *list(base.to_json().values())[1:]) for n in names]
    workers = harness.worker_count()
    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(lambda c: harness.run_suite(c.suite_name, c, threads=1), configs))
    else:
        reports = [harness.run_suite(c.suite_name, c, threads=1) for c in configs]
    # single writer: everything below happens on the calling thread
    summary = markdown_report(reports)
    if args.report is not None:
        text = harness.dumps_report(reports) + "\n" if args.format == "json" else summary
        args.report.write_text(text)
    sys.stdout.write(summary)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED


# --------------------------------------------------------------------------
# describe


class InputError(ValueError):
    """Malformed serialized object."""


def _guess_kind(data: dict) -> str:
    if "kind" in data:
        return data["kind"]
    if "blocks" in data:
        return "partition"
    if "values" in data:
        vals = list(data["values"].values())
        if vals and all(isinstance(v, list) for v in vals):
            return "cond_vector"
        if vals and all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in vals):
            return "cond_nat"
        return "cond_real"
    if "per_atom" in data:
        rows = [r for v in data["per_atom"].values() for r in v]
        if rows and all(isinstance(r, dict) and "u" in r for r in rows):
            return "symmetric_body"
        if "domain" in data or "codomain" in data:
            return "linear_map"
        return "stable_set"
    if "condition" in data:
        return "condition"
    raise InputError("cannot infer the object kind; add a 'kind' field")


_LOADERS = {
    "cond_real": lambda alg, d: CondReal.from_json(alg, d),
    "cond_nat": lambda alg, d: CondNat.from_json(alg, d),
    "cond_vector": lambda alg, d: CondVector.from_json(alg, d),
    "conditional_value": lambda alg, d: ConditionalValue.from_json(alg, d),
    "stable_set": lambda alg, d: StableSet.from_json(alg, d),
    "symmetric_body": lambda alg, d: SymmetricBody.from_json(alg, d),
    "linear_map": lambda alg, d: CondLinearMap.from_json(alg, d),
    "partition": lambda alg, d: Partition.from_json(alg, d),
    "condition": lambda alg, d: alg.condition(d["condition"]),
    "interval_product": closed_set_from_json,
    "hbody": closed_set_from_json,
    "finite_union": closed_set_from_json,
}


def load_object(data) -> tuple[str, object]:
    """Decode ``{"atoms": m, "kind": ..., <object fields>}`` into ``(kind, object)``."""
    if not isinstance(data, dict):
        raise InputError("top-level JSON value must be an object")
    if "atoms" not in data:
        raise InputError("missing 'atoms' (size of the algebra)")
    kind = _guess_kind(data)
    if kind not in _LOADERS:
        raise InputError(f"unknown kind {kind!r}")
    try:
        alg = Algebra(int(data["atoms"]))
        return kind, _LOADERS[kind](alg, data)
    except (KeyError, TypeError, ValueError, CondanError) as exc:
        raise InputError(f"invalid {kind}: {type(exc).__name__}: {exc}") from exc


def dump_object(obj, kind: str | None = None) -> dict:
    """Inverse of :func:`load_object`."""
    if isinstance(obj, CondNat):
        kind = kind or "cond_nat"
    elif isinstance(obj, CondReal):
        kind = kind or "cond_real"
    elif isinstance(obj, CondVector):
        kind = kind or "cond_vector"
    elif isinstance(obj, ConditionalValue):
        kind = kind or "conditional_value"
    elif isinstance(obj, StableSet):
        kind = kind or "stable_set"
    elif isinstance(obj, SymmetricBody):
        kind = kind or "symmetric_body"
    elif isinstance(obj, CondLinearMap):
        kind = kind or "linear_map"
    elif isinstance(obj, Partition):
        kind = kind or "partition"
    if isinstance(obj, ClosedSet):
        out = obj.to_json()
        alg = obj.on.algebra
    else:
        out = {"kind": kind, **obj.to_json()}
        alg = (obj.owner if isinstance(obj, Partition) else obj.on).algebra
    return {"atoms": alg.atom_count, **out}


def _fmt(v) -> str:
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=6, separator=", ")
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def describe(kind: str, obj, norms=NORM_KINDS) -> str:
    lines = [f"kind: {kind}"]
    if isinstance(obj, ConditionalValue):
        lines.append(f"condition: {obj.on.to_json()}")
        if isinstance(obj, CondVector):
            supp = obj.algebra.condition(a for a, v in obj.items() if np.any(v))
        elif isinstance(obj, CondReal):
            supp = support(obj, 0.0)
        else:
            supp = obj.on
        lines.append(f"support: {supp.to_json()}")
        for a, v in obj.items():
            line = f"  atom {a}: {_fmt(v)}"
            if isinstance(obj, CondVector):
                line += "  " + "  ".join(f"{k}={float(lp_norm(k, v)):.10g}" for k in norms)
            lines.append(line)
    elif isinstance(obj, StableSet):
        lines.append(f"condition: {obj.on.to_json()}")
        lines.append(f"support: {obj.on.to_json()}")
        for a in obj.on:
            lines.append(f"  atom {a}: {sorted(obj[a], key=repr)}")
    elif isinstance(obj, SymmetricBody):
        lines.append(f"condition: {obj.on.to_json()}")
        lines.append(f"bounded on: {obj.bounded_condition().to_json()}")
        for a in obj.on:
            lines.append(f"  atom {a} (dim {obj.dim(a)}):")
            lines.append("    direction | offset")
            for u, c in zip(obj.directions(a), obj.offsets(a)):
                lines.append(f"    {_fmt(u)} | {c:.10g}")
    elif isinstance(obj, CondLinearMap):
        lines.append(f"condition: {obj.on.to_json()}")
        nonzero = obj.algebra.condition(a for a, M in obj.items() if np.any(M))
        lines.append(f"support: {nonzero.to_json()}")
        lines.append(f"norms: {obj.domain.kind} -> {obj.codomain.kind}")
        for a, M in obj.items():
            lines.append(f"  atom {a} ({M.shape[0]}x{M.shape[1]}):")
            lines += ["    " + line for line in _fmt(M).splitlines()]
    elif isinstance(obj, Partition):
        lines.append(f"owner: {obj.owner.to_json()}")
        for i, b in enumerate(obj.blocks, start=1):
            lines.append(f"  block {i}: {b.to_json()}")
    elif isinstance(obj, ClosedSet):
        lines.append(json.dumps(obj.to_json(), indent=2))
    else:
        lines.append(f"condition: {obj.to_json()}")
    return "\n".join(lines) + "\n"


def cmd_describe(args) -> int:
    path: Path = args.input
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"condan describe: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"{path}:{exc.lineno}:{exc.colno}: parse error: {exc.msg}", file=sys.stderr)
        return EXIT_CONFIG
    norms = [k.strip() for k in args.norms.split(",") if k.strip()]
    bad = [k for k in norms if k not in NORM_KINDS]
    if bad:
        print(f"condan describe: unknown norm kind(s) {bad}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        kind, obj = load_object(data)
    except InputError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(describe(kind, obj, norms))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"{exc.parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(args)
    return cmd_describe(args)

if __name__ == "__main__":
    sys.exit(main())
