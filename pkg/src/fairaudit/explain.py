"""Sufficient reasons for single decisions under constraints.

A weak AXp is a feature set whose values at the decision's instance
force the classifier's output on every constrained instance. AXps are
the subset-minimal ones; prime-implicant explanations are the AXps
whose coverage is not properly contained in another AXp's coverage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .classifier import Classifier
from .errors import CapacityError, ModelSemanticError
from .model import ConstrainedSpace, Instance

DEFAULT_SUBSET_CAP = 20


class ExplanationKind(Enum):
    WEAK_AXP = "WEAK_AXP"
    AXP = "AXP"
    PI = "PI"


@dataclass(frozen=True)
class Explanation:
    features: tuple[int, ...]  # ascending feature indices
    kind: ExplanationKind
    fair: bool
    coverage_size: int

    def feature_set(self) -> frozenset[int]:
        return frozenset(self.features)


@dataclass(frozen=True)
class Decision:
    classifier: Classifier
    instance: Instance
    label: int


def make_decision(cs: ConstrainedSpace, k: Classifier, x: Instance) -> Decision:
    """Decisions exist only at instances inside the constrained space."""
    if not cs.contains(x):
        raise ModelSemanticError(
            f"instance {x!r} does not satisfy the constraints; "
            "no decision is defined there"
        )
    return Decision(k, x, k.evaluate(x))


def is_weak_axp(cs: ConstrainedSpace, d: Decision, features: Iterable[int]) -> bool:
    cov = cs.coverage_mask(d.instance, features)
    good = cs.label_mask(d.classifier, d.label)
    return cov & ~good == 0


def subsumes(
    cs: ConstrainedSpace, x: Instance, a: Iterable[int], b: Iterable[int]
) -> bool:
    """True when fixing x's values on b already forces x's values on a,
    i.e. b's coverage is contained in a's."""
    if not cs.contains(x):
        raise ModelSemanticError(f"instance {x!r} does not satisfy the constraints")
    cov_a = cs.coverage_mask(x, a)
    cov_b = cs.coverage_mask(x, b)
    return cov_b & ~cov_a == 0


def strictly_subsumes(
    cs: ConstrainedSpace, x: Instance, a: Iterable[int], b: Iterable[int]
) -> bool:
    if not cs.contains(x):
        raise ModelSemanticError(f"instance {x!r} does not satisfy the constraints")
    cov_a = cs.coverage_mask(x, a)
    cov_b = cs.coverage_mask(x, b)
    return cov_b & ~cov_a == 0 and cov_a != cov_b


_DENSE_LIMIT = 16
_subset_orders: dict[int, list[tuple[int, tuple[int, ...]]]] = {}


def _subset_order(n: int) -> list[tuple[int, tuple[int, ...]]]:
    """All bitmasks over n features as (mask, indices), sorted by size
    then lexicographic indices; cached per n."""
    order = _subset_orders.get(n)
    if order is None:
        order = sorted(
            (
                (mask, tuple(i for i in range(n) if mask >> i & 1))
                for mask in range(1 << n)
            ),
            key=lambda pair: (len(pair[1]), pair[1]),
        )
        _subset_orders[n] = order
    return order


def _axp_masks(
    cs: ConstrainedSpace, d: Decision, cap: int
) -> list[tuple[tuple[int, ...], int]]:
    """Subset-minimal weak AXps with their coverage masks, smallest
    first and lexicographic within a size."""
    n = cs.space.n
    if n > cap:
        raise CapacityError(f"{n} features exceed the subset-enumeration cap {cap}")
    key = (d.classifier, d.instance)
    found = cs.axp_cache.get(key)
    if found is None:
        good = cs.label_mask(d.classifier, d.label)
        masks = [cs.value_mask(i, d.instance[i]) for i in range(n)]
        full = cs.full_mask
        if n <= _DENSE_LIMIT:
            found = _axp_masks_dense(n, masks, full, good)
        else:
            found = _axp_masks_sparse(n, masks, full, good)
        cs.axp_cache[key] = found
    return found


def _axp_masks_dense(n, masks, full, good) -> list[tuple[tuple[int, ...], int]]:
    # one AND per subset via the lattice: cov[S] = cov[S \ low] & low's mask
    cov = [0] * (1 << n)
    cov[0] = full
    not_good = full & ~good
    weak = [not_good == 0] + [False] * ((1 << n) - 1)
    for mask in range(1, 1 << n):
        low = mask & -mask
        c = cov[mask ^ low] & masks[low.bit_length() - 1]
        cov[mask] = c
        weak[mask] = c & not_good == 0
    found = []
    for mask, indices in _subset_order(n):
        if weak[mask] and all(not weak[mask ^ (1 << i)] for i in indices):
            found.append((indices, cov[mask]))
    return found


def _axp_masks_sparse(n, masks, full, good) -> list[tuple[tuple[int, ...], int]]:
    found: list[tuple[tuple[int, ...], int]] = []
    found_sets: list[frozenset[int]] = []
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            as_set = frozenset(combo)
            # a superset of a smaller AXp is weak but not minimal
            if any(s <= as_set for s in found_sets):
                continue
            cov = full
            for i in combo:
                cov &= masks[i]
            if cov & ~good == 0:
                found.append((combo, cov))
                found_sets.append(as_set)
    return found


def _explanation(
    cs: ConstrainedSpace, features: tuple[int, ...], kind: ExplanationKind, cov: int
) -> Explanation:
    fair = not (set(features) & cs.space.protected)
    return Explanation(features, kind, fair, cov.bit_count())


def all_axps(
    cs: ConstrainedSpace, d: Decision, cap: int = DEFAULT_SUBSET_CAP
) -> list[Explanation]:
    """Every subset-minimal weak AXp, ordered by size then indices."""
    return [
        _explanation(cs, feats, ExplanationKind.AXP, cov)
        for feats, cov in _axp_masks(cs, d, cap)
    ]


def pi_explanations(
    cs: ConstrainedSpace, d: Decision, cap: int = DEFAULT_SUBSET_CAP
) -> list[Explanation]:
    """AXps not strictly subsumed by another AXp, in the all_axps order."""
    axps = _axp_masks(cs, d, cap)
    out = []
    for feats, cov in axps:
        dominated = any(
            cov & ~other == 0 and cov != other for _, other in axps
        )
        if not dominated:
            out.append(_explanation(cs, feats, ExplanationKind.PI, cov))
    return out


def one_axp(
    cs: ConstrainedSpace, d: Decision, seed_order: Sequence[int] | None = None
) -> Explanation:
    """Deletion-based extraction of a single AXp.

    Walks seed_order (default: descending feature index) once, dropping
    every feature whose removal keeps the set a weak AXp. Works above
    the subset-enumeration cap.
    """
    n = cs.space.n
    if seed_order is None:
        seed_order = range(n - 1, -1, -1)
    order = list(seed_order)
    if sorted(order) != list(range(n)):
        raise ModelSemanticError("seed_order must be a permutation of the features")
    good = cs.label_mask(d.classifier, d.label)
    keep = set(range(n))
    for i in order:
        keep.discard(i)
        cov = cs.coverage_mask(d.instance, keep)
        if cov & ~good != 0:
            keep.add(i)
    feats = tuple(sorted(keep))
    return _explanation(
        cs, feats, ExplanationKind.AXP, cs.coverage_mask(d.instance, feats)
    )
