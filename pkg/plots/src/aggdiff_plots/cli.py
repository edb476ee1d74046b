"""Command-line batch renderer for solver artifacts.

Either a single figure from flags:

    aggdiff-plots --kind decay --input out/diagnostics.csv --output decay.png

or a batch from a figure-spec file (one JSON list of figure objects):

    aggdiff-plots --spec figures.json

Any deviation from the documented CSV schema aborts with exit code 2 and a
message naming the offending column.
"""

import argparse
import json
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .schema import SchemaError, find_summary


def _spec_from_entry(entry):
    if not isinstance(entry, dict):
        raise SchemaError(f"figure entry must be an object, got {type(entry).__name__}")
    unknown = set(entry) - {"kind", "inputs", "output", "summary", "labels"}
    if unknown:
        raise SchemaError(f"unknown figure-spec keys: {sorted(unknown)}")
    for key in ("kind", "inputs", "output"):
        if key not in entry:
            raise SchemaError(f"figure entry missing required key {key!r}")
    return FigureSpec(
        kind=entry["kind"],
        inputs=tuple(entry["inputs"]),
        output=entry["output"],
        summary=entry.get("summary"),
        labels=tuple(entry.get("labels", ())),
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aggdiff-plots",
        description="Render figures from diagnostics.csv / rates.csv / summary.json",
    )
    parser.add_argument("--spec", help="JSON file with a list of figure objects")
    parser.add_argument("--kind", choices=FIGURE_KINDS)
    parser.add_argument(
        "--input", action="append", default=[],
        help="diagnostics.csv (rates.csv for rate_surface); repeatable",
    )
    parser.add_argument("--output", help="output image path")
    parser.add_argument(
        "--summary",
        help="summary.json for reference exponents "
        "(default: summary.json next to the first input, if present)",
    )
    parser.add_argument(
        "--label", action="append", default=[], help="legend label per input"
    )
    return parser


def _specs_from_args(args):
    if args.spec is not None:
        if args.kind or args.input or args.output:
            raise SchemaError("--spec cannot be combined with --kind/--input/--output")
        with open(args.spec) as fh:
            entries = json.load(fh)
        if not isinstance(entries, list):
            raise SchemaError("figure-spec file must contain a JSON list")
        return [_spec_from_entry(e) for e in entries]
    if not (args.kind and args.input and args.output):
        raise SchemaError("need --spec, or all of --kind, --input, --output")
    summary = args.summary
    if summary is None and args.kind != "rate_surface":
        found = find_summary(args.input[0])
        summary = str(found) if found is not None else None
    return [
        FigureSpec(
            kind=args.kind,
            inputs=tuple(args.input),
            output=args.output,
            summary=summary,
            labels=tuple(args.label),
        )
    ]


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        specs = _specs_from_args(args)
        for spec in specs:
            print(f"{spec.kind}: {render(spec)}")
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
