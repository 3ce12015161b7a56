"""``melfs`` command line entry point.

Exit codes: 0 success, 1 at least one run failed, 2 usage error.
"""
from __future__ import annotations

import logging
import sys
from typing import Optional, Sequence

from .harness import UsageError, build_parser, format_table, parse_spec, run_experiment


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        spec = parse_spec(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"melfs: error: {exc}", file=sys.stderr)
        return 2
    rows = run_experiment(spec)
    print(format_table(rows))
    print(f"\nresults written to {spec.out_dir}")
    return 0 if all(r.ok for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
