"""Command-line surface and file formats.

Every subcommand writes exactly one JSON document to stdout; diagnostics go
to stderr. Floats are serialized with Python's shortest round-trip
representation, so parse(serialize(J)) reproduces J bit-exactly.

Exit codes: 0 success; 1 validation error (schema or invariant breach,
including NaN/infinite/negative entries and bad total mass); 2 usage error
(bad arguments, unreadable file, malformed JSON); 3 internal invariant
violation (a walk certificate failed, which signals a bug).

File formats:

- distribution file: UTF-8 JSON {"nx": int, "ny": int, "probs": [[real; ny]; nx]}
- walk trace file: JSON lines, one step per line:
  {"label": str, "tv": real, "gap": real, "p"?: probs, "q"?: probs, "s"?: real}
- verify report: one JSON object mirroring the TrialReport fields
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .bounds import continuity_bound, extremal_pair
from .core import (
    DistributionPair,
    JointDistribution,
    ValidationError,
    conditional_entropy,
    tv_distance,
)
from .verify import TrialReport, grid_search_max_gap, verify_trials
from .walk import InvariantViolation, WalkTrace, run_walk

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


class DistributionParseError(ValueError):
    """The document is not well-formed JSON."""


def parse_distribution(text: str) -> JointDistribution:
    """Parse and validate a distribution document.

    Raises DistributionParseError for malformed JSON (with line/column) and
    ValidationError for schema or invariant breaches (with the offending
    field), including NaN and infinite entries.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"expected a JSON object, got {type(doc).__name__}")
    for key in ("nx", "ny", "probs"):
        if key not in doc:
            raise ValidationError(f"missing required field {key!r}")
    nx, ny = doc["nx"], doc["ny"]
    for name, value in (("nx", nx), ("ny", ny)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    probs = doc["probs"]
    if not isinstance(probs, list) or len(probs) != nx:
        raise ValidationError(f"probs must be a list of nx={nx} rows, got {len(probs) if isinstance(probs, list) else probs!r}")
    for i, row in enumerate(probs):
        if not isinstance(row, list) or len(row) != ny:
            raise ValidationError(f"probs[{i}] must be a list of ny={ny} numbers")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ValidationError(f"probs[{i}][{j}] must be a number, got {x!r}")
    return JointDistribution(probs)


def distribution_doc(J: JointDistribution) -> dict[str, Any]:
    return {"nx": J.nx, "ny": J.ny, "probs": J.to_lists()}


def trace_line(step) -> str:
    obj: dict[str, Any] = {"label": step.label, "tv": step.tv, "gap": step.gap}
    if step.p is not None:
        obj["p"] = step.p.to_lists()
    if step.q is not None:
        obj["q"] = step.q.to_lists()
    if step.transferred is not None:
        obj["s"] = step.transferred
    return json.dumps(obj)


def write_trace(trace: WalkTrace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for step in trace.steps:
            fh.write(trace_line(step) + "\n")


def _load(path: str) -> JointDistribution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_distribution(fh.read())


def _cmd_bound(args) -> dict:
    result = continuity_bound(args.epsilon, args.nx)
    return {"value": result.value, "clamped": result.clamped}


def _cmd_entropy(args) -> dict:
    J = _load(args.file)
    return {"conditional_entropy": conditional_entropy(J, args.formula), "formula": args.formula}


def _cmd_tv(args) -> dict:
    return {"tv": tv_distance(_load(args.p_file), _load(args.q_file))}


def _cmd_extremal(args) -> dict:
    pair = extremal_pair(args.epsilon, args.nx, args.ny)
    return {"p": distribution_doc(pair.p), "q": distribution_doc(pair.q)}


def _cmd_walk(args) -> dict:
    pair = DistributionPair(_load(args.p_file), _load(args.q_file))
    trace = run_walk(pair, snapshots=args.snapshots)
    if args.trace_file:
        write_trace(trace, args.trace_file)
    bound_at_initial = continuity_bound(trace.initial_tv, pair.nx).value if pair.nx >= 2 else None
    return {
        "initial_tv": trace.initial_tv,
        "initial_gap": trace.initial_gap,
        "final_tv": trace.final_tv,
        "final_gap": trace.final_gap,
        "bound_at_initial_tv": bound_at_initial,
        "steps": len(trace.steps),
        "certificate_ok": True,
    }


def _report_doc(report: TrialReport) -> dict:
    worst = report.worst_pair
    return {
        "trials": report.trials,
        "violations": report.violations,
        "max_gap_over_bound_ratio": report.max_gap_over_bound_ratio,
        "worst_pair": None if worst is None else {"p": distribution_doc(worst.p), "q": distribution_doc(worst.q)},
        "seed": report.seed,
        "nx": report.nx,
        "ny": report.ny,
    }


def _cmd_verify(args) -> dict:
    report = verify_trials(args.nx, args.ny, args.trials, args.seed, eps=args.eps)
    return _report_doc(report)


def _cmd_search(args) -> dict:
    result = grid_search_max_gap(args.nx, args.ny, args.epsilon, args.steps)
    return {
        "max_gap": result.max_gap,
        "bound": result.bound,
        "argmax_pair": {
            "p": distribution_doc(result.argmax_pair.p),
            "q": distribution_doc(result.argmax_pair.q),
        },
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equibound",
        description="Tight continuity bound for conditional Shannon entropy in total variation distance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="evaluate the bound eps*log2(nx-1) + h(eps)")
    p_bound.add_argument("--epsilon", type=float, required=True)
    p_bound.add_argument("--nx", type=int, required=True)
    p_bound.set_defaults(handler=_cmd_bound)

    p_entropy = sub.add_parser("entropy", help="conditional entropy H(X|Y) of a distribution file")
    p_entropy.add_argument("file")
    p_entropy.add_argument("--formula", choices=["difference", "mixture", "direct"], default="mixture")
    p_entropy.set_defaults(handler=_cmd_entropy)

    p_tv = sub.add_parser("tv", help="total variation distance between two distribution files")
    p_tv.add_argument("p_file")
    p_tv.add_argument("q_file")
    p_tv.set_defaults(handler=_cmd_tv)

    p_walk = sub.add_parser("walk", help="run the invariant-checked simplex walk on a pair")
    p_walk.add_argument("p_file")
    p_walk.add_argument("q_file")
    p_walk.add_argument("--trace-file", default=None, help="write the JSON-lines trace here")
    p_walk.add_argument("--snapshots", choices=["phases", "all", "none"], default="phases")
    p_walk.set_defaults(handler=_cmd_walk)

    p_verify = sub.add_parser("verify", help="seeded random campaign of bound checks and walks")
    p_verify.add_argument("--nx", type=int, required=True)
    p_verify.add_argument("--ny", type=int, required=True)
    p_verify.add_argument("--trials", type=int, required=True)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--eps", type=float, default=None, help="fixed TV radius; omit for independent sampling")
    p_verify.set_defaults(handler=_cmd_verify)

    p_extremal = sub.add_parser("extremal", help="the saturating pair at a given TV radius")
    p_extremal.add_argument("--epsilon", type=float, required=True)
    p_extremal.add_argument("--nx", type=int, required=True)
    p_extremal.add_argument("--ny", type=int, default=1)
    p_extremal.set_defaults(handler=_cmd_extremal)

    p_search = sub.add_parser("search", help="exhaustive grid search for the maximum gap at TV <= epsilon")
    p_search.add_argument("--nx", type=int, required=True)
    p_search.add_argument("--ny", type=int, required=True)
    p_search.add_argument("--epsilon", type=float, required=True)
    p_search.add_argument("--steps", type=int, default=50)
    p_search.set_defaults(handler=_cmd_search)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message; 2 on usage errors
        return int(exc.code or 0)
    try:
        out = args.handler(args)
    except DistributionParseError as exc:
        print(f"error: malformed distribution file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
