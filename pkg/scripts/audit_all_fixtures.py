#!/usr/bin/env python3
"""Audit every fixture model and compare against (or refresh) the
report snapshots in fixtures/snapshots/.

    python3 scripts/audit_all_fixtures.py            # compare
    python3 scripts/audit_all_fixtures.py --write    # regenerate
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from pathlib import Path

from fairaudit.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
SNAPSHOTS = FIXTURES / "snapshots"


def audit_report(path: Path) -> str:
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = cli_main(["audit", str(path), "--notion", "existential"])
    if code not in (0, 1):
        raise RuntimeError(f"audit of {path.name} exited {code}")
    return buffer.getvalue()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--write", action="store_true", help="refresh snapshots")
    args = parser.parse_args()

    SNAPSHOTS.mkdir(exist_ok=True)
    stale = []
    for path in sorted(FIXTURES.glob("*.json")):
        report = audit_report(path)
        snap = SNAPSHOTS / f"{path.stem}.audit.json"
        if args.write:
            snap.write_text(report)
            print(f"wrote {snap.relative_to(ROOT)}")
        elif not snap.exists():
            stale.append(f"{snap.name}: missing (run with --write)")
        elif snap.read_text() != report:
            stale.append(f"{snap.name}: drifted from the current report")
        else:
            print(f"ok {snap.relative_to(ROOT)}")
    for line in stale:
        print(f"STALE {line}")
    return 1 if stale else 0


if __name__ == "__main__":
    sys.exit(main())
