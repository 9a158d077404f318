#!/usr/bin/env python3
"""Sweep the logical invariants over a seeded random-model corpus.

Standalone version of the acceptance property suite with adjustable
size and seed:

    python3 scripts/run_property_suite.py --models 640 --seed 987123
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from fairaudit.propcheck import check_model
from fairaudit.randmodels import random_model

PROFILES = ("any", "none", "only_p", "only_n", "separate")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--models", type=int, default=640)
    parser.add_argument("--seed", type=int, default=987123)
    parser.add_argument("--max-features", type=int, default=8)
    parser.add_argument("--max-domain", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    started = time.perf_counter()
    violations: list[str] = []
    by_profile = {p: 0 for p in PROFILES}
    for i in range(args.models):
        profile = PROFILES[i % len(PROFILES)]
        by_profile[profile] += 1
        rm = random_model(
            rng,
            profile=profile,
            max_features=args.max_features,
            max_domain=args.max_domain,
        )
        for violation in check_model(rm, rng):
            violations.append(f"model {i} [{profile}]: {violation}")
    elapsed = time.perf_counter() - started

    for line in violations:
        print(f"VIOLATION {line}")
    print(
        f"{args.models} models in {elapsed:.1f}s "
        f"({', '.join(f'{p}={c}' for p, c in by_profile.items())})"
    )
    print(f"violations: {len(violations)}")
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())
