"""Batch figure renderer: ``ldma-plot <figure-spec.json> [...]``.

Exit codes mirror the scenario runner: 0 success, 2 spec/input error.
"""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpecError, load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ldma-plot", description="Render figures from scenario CSV outputs"
    )
    parser.add_argument("specs", nargs="+", help="figure spec JSON file(s)")
    parser.add_argument(
        "--fixed-timestamp",
        action="store_true",
        help="pin timestamps/metadata so identical inputs give identical bytes",
    )
    args = parser.parse_args(argv)
    try:
        for spec_path in args.specs:
            spec = load_spec(spec_path)
            if args.fixed_timestamp:
                spec.fixed_timestamp = True
            out = render(spec)
            print(f"wrote {out}")
    except FigureSpecError as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
