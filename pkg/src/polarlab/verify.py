"""Built-in verification suites: oracle-backed checks runnable from the CLI.

Each suite returns CheckResult rows; a suite passes when every row passes.
The independent oracles (scalar erasure recursion, pairwise-entropy route)
are deliberately kept separate from the code paths they check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blackwell import blackwell_measure
from .channels import Channel, conditional_channel, deterministic_hom, symmetric_capacity
from .groups import enumerate_subgroups, make_group, subgroup_from_members
from .metrics import distance_to_pol
from .polar import capacity_gap, polar_step
from .presets import bec_channel, random_channel, z4_multilevel_channel
from .process import enumerate_paths, martingale_residual

CORPUS_SEED = 20240810
CORPUS_GROUP_ORDERS = ([2], [3], [4], [2, 2], [6])


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: measured={self.measured:.3e} tolerance={self.tolerance:.3e}{extra}"


def random_corpus(seed: int = CORPUS_SEED, count: int = 200) -> list[Channel]:
    """Seeded random channels cycling over the small test groups, 2-6 outputs."""
    channels = []
    for i in range(count):
        group = make_group(CORPUS_GROUP_ORDERS[i % len(CORPUS_GROUP_ORDERS)])
        n_out = int(np.random.default_rng([seed, i]).integers(2, 7))
        channels.append(random_channel(group, n_out, seed + i))
    return channels


def bec_erasure_after(path: str, z0: float) -> float:
    """Scalar erasure-probability recursion: z -> 2z - z^2 (minus) or z^2 (plus)."""
    z = z0
    for sign in path:
        z = 2.0 * z - z * z if sign == "-" else z * z
    return z


def all_paths(depth: int) -> list[str]:
    paths = [""]
    for _ in range(depth):
        paths = [p + s for p in paths for s in "-+"]
    return paths


def martingale_suite(count: int = 200) -> list[CheckResult]:
    worst_residual = 0.0
    worst_asymmetry = 0.0
    for w in random_corpus(count=count):
        r = martingale_residual(w)
        worst_residual = max(worst_residual, r.residual)
        worst_asymmetry = max(worst_asymmetry, r.asymmetry)
    return [
        CheckResult("martingale.identity", worst_residual <= 1e-8, worst_residual, 1e-8,
                    f"{count} random channels"),
        CheckResult("martingale.gap-symmetry", worst_asymmetry <= 1e-8, worst_asymmetry, 1e-8,
                    f"{count} random channels"),
    ]


def lemma_gap_suite(count: int = 200) -> list[CheckResult]:
    worst = 0.0
    failures = 0
    for w in random_corpus(count=count):
        try:
            gap = capacity_gap(blackwell_measure(w))
        except RuntimeError:
            failures += 1
            continue
        worst = max(worst, abs(gap.via_transform - gap.via_pairs))
    return [
        CheckResult(
            "capacity-gap.route-agreement",
            failures == 0 and worst <= 1e-8,
            worst,
            1e-8,
            f"{count} random channels, {failures} route failures",
        )
    ]


def pol_set_suite() -> list[CheckResult]:
    results = []
    for orders in ([2], [3], [4], [2, 2], [6], [2, 4]):
        group = make_group(orders)
        worst_gap = 0.0
        fixed = True
        for sub in enumerate_subgroups(group):
            m = blackwell_measure(deterministic_hom(group, sub))
            worst_gap = max(worst_gap, abs(capacity_gap(m).value))
            dist, nearest = distance_to_pol(m)
            if dist != 0.0 or nearest != sub:
                fixed = False
        name = "x".join(f"Z{d}" for d in orders)
        results.append(
            CheckResult(f"pol-set.gap[{name}]", worst_gap <= 1e-10, worst_gap, 1e-10)
        )
        results.append(
            CheckResult(f"pol-set.fixed-point[{name}]", fixed, 0.0 if fixed else 1.0, 0.0)
        )
    return results


def bec_oracle_suite(depth: int = 8, erasure: float = 0.5) -> list[CheckResult]:
    w = bec_channel(erasure)
    report = enumerate_paths(w, depth)
    worst = 0.0
    max_atoms = 0
    for rec in report.records:
        expected = 1.0 - bec_erasure_after(rec.path, erasure)
        worst = max(worst, abs(rec.capacity - expected))
        max_atoms = max(max_atoms, rec.atom_count)
    return [
        CheckResult(f"bec-oracle.capacity[depth={depth}]", worst <= 1e-6, worst, 1e-6,
                    f"{len(report.records)} paths"),
        CheckResult(f"bec-oracle.atoms[depth={depth}]", max_atoms <= 3, float(max_atoms), 3.0),
    ]


def multilevel_quotient_floor(depth: int = 12, erasure: float = 0.5) -> float:
    """Min of I(W_s[H]) over every node of the transform tree, H = {0,2}."""
    w = z4_multilevel_channel(erasure)
    group = w.require_group()
    sub = subgroup_from_members(group, [0, 2])
    floor = symmetric_capacity(conditional_channel(w, sub))

    def walk(m, remaining):
        nonlocal floor
        if remaining == 0:
            return
        for sign in "-+":
            child = polar_step(m, sign)
            floor = min(
                floor, symmetric_capacity(conditional_channel(child.realize(), sub))
            )
            walk(child, remaining - 1)

    walk(blackwell_measure(w), depth)
    return floor


def multilevel_oracle_class(z: float, delta: float) -> tuple[int, ...] | None:
    """Expected determining subgroup of a multilevel path, from the scalar oracle.

    The quotient level is always noiseless, so the channel is determined by
    the trivial subgroup when the refinement erasure z is below delta and by
    {0,2} when z is above 1 - delta.
    """
    if z < delta:
        return (0,)
    if 1.0 - z < delta:
        return (0, 2)
    return None


def multilevel_suite(depth: int = 12, erasure: float = 0.5, delta: float = 0.1) -> list[CheckResult]:
    report = enumerate_paths(z4_multilevel_channel(erasure), depth, delta=delta)
    mismatches = 0
    oracle_counts: dict[tuple[int, ...] | None, int] = {}
    for rec in report.records:
        z = bec_erasure_after(rec.path, erasure)
        expected = multilevel_oracle_class(z, delta)
        oracle_counts[expected] = oracle_counts.get(expected, 0) + 1
        got = (
            rec.determinedness.best.subgroup.members
            if rec.determinedness.determined
            else None
        )
        if got != expected:
            mismatches += 1
    hist = {sub.members: count for sub, count in report.subgroup_histogram()}
    counts_match = (
        hist.get((0,), 0) == oracle_counts.get((0,), 0)
        and hist.get((0, 2), 0) == oracle_counts.get((0, 2), 0)
    )
    floor = multilevel_quotient_floor(depth, erasure)
    return [
        CheckResult(
            f"multilevel.classification[depth={depth}]",
            mismatches == 0,
            float(mismatches),
            0.0,
            f"{len(report.records)} paths vs scalar oracle",
        ),
        CheckResult(
            f"multilevel.split[depth={depth}]",
            counts_match,
            0.0 if counts_match else 1.0,
            0.0,
            f"oracle split {oracle_counts.get((0,), 0)}/{oracle_counts.get((0, 2), 0)}",
        ),
        CheckResult(
            f"multilevel.quotient-floor[depth={depth}]",
            floor >= 1.0 - 1e-6,
            1.0 - floor,
            1e-6,
        ),
    ]


SUITES = {
    "martingale": martingale_suite,
    "lemma-gap": lemma_gap_suite,
    "pol-set": pol_set_suite,
    "bec-oracle": bec_oracle_suite,
    "multilevel": multilevel_suite,
}


def run_suites(name: str) -> list[CheckResult]:
    if name == "all":
        results = []
        for suite in SUITES.values():
            results.extend(suite())
        return results
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    return SUITES[name]()
