"""Command line: render one figure preset from a sweep CSV.

    jadce-report --csv results.csv --preset fig5_aer_vs_L --out figs/

Exit codes: 0 success, 1 schema or data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, EmptyDataError, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="jadce-report",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--csv", required=True, help="sweep CSV produced by drjadce")
    ap.add_argument("--preset", required=True, choices=sorted(FIGURE_KINDS))
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    try:
        paths = render(FigureSpec(args.csv, args.preset, args.out))
    except (SchemaError, EmptyDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for kind in ("png", "svg", "md"):
        print(f"wrote {paths[kind]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
