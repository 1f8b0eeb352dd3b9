#!/usr/bin/env python3
"""Run the bundled balance systems through the standard analyses and print
the text reports.  Usage: python3 scripts/run_catalog.py [name ...]"""

from __future__ import annotations

import sys
from pathlib import Path

from jetbalance.cli import parse_system, render, run

SYSTEMS = Path(__file__).resolve().parent.parent / "systems"


def main(argv) -> int:
    wanted = set(argv)
    for path in sorted(SYSTEMS.glob("*.bal")):
        if wanted and path.stem not in wanted:
            continue
        doc = parse_system(path.read_text())
        print(f"##### {path.name} " + "#" * max(1, 60 - len(path.name)))
        commands = ["higher"] if doc.has_higher_entries else ["equations", "check", "decompose"]
        for command in commands:
            report = run(command, doc)
            sys.stdout.write(render(report, "text").decode())
            print()
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
