"""The random polarization process: path enumeration, sampling, and traces.

Exhaustive enumeration walks the binary transform tree depth-first so every
child reuses its parent's merged measure. Per-path resource failures (atom
budget) are recorded on the affected paths; the rest of the tree is still
evaluated. All outputs are deterministic given the configuration, including
across thread counts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .blackwell import (
    DEFAULT_MERGE_TAU,
    BlackwellMeasure,
    blackwell_measure,
    capacity_of_measure,
)
from .channels import (
    Channel,
    DeterminednessResult,
    delta_determining_subgroup,
    symmetric_capacity,
)
from .groups import Subgroup
from .metrics import distance_to_pol
from .polar import (
    DEFAULT_ATOM_BUDGET,
    MINUS,
    PLUS,
    AtomBudgetError,
    capacity_gap,
    minus_transform,
    normalize_path,
    plus_transform,
    polar_step,
)

MAX_DEPTH = 16
DEFAULT_DELTA = 0.1
CAPACITY_HIST_BINS = 16
THREADS_ENV_VAR = "POLARLAB_THREADS"


class MartingaleResidual(NamedTuple):
    """|I(W-) + I(W+) - 2 I(W)| and ||I(W-)-I(W)| - |I(W+)-I(W)||, in bits."""

    residual: float
    asymmetry: float


def martingale_residual(w: Channel) -> MartingaleResidual:
    """Conservation check of one polarization step, on raw (unmerged) transforms."""
    i_w = symmetric_capacity(w)
    i_minus = symmetric_capacity(minus_transform(w))
    i_plus = symmetric_capacity(plus_transform(w))
    return MartingaleResidual(
        residual=abs(i_minus + i_plus - 2.0 * i_w),
        asymmetry=abs(abs(i_minus - i_w) - abs(i_plus - i_w)),
    )


@dataclass(frozen=True)
class PathRecord:
    """Evaluation of one synthetic channel at the end of a path."""

    path: str
    capacity: float | None = None
    capacity_gap: float | None = None
    determinedness: DeterminednessResult | None = None
    distance_to_pol: float | None = None
    nearest_subgroup: Subgroup | None = None
    atom_count: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        if not self.ok:
            return {"path": self.path, "error": self.error}
        return {
            "path": self.path,
            "error": None,
            "capacity": self.capacity,
            "capacity_gap": self.capacity_gap,
            "determined": self.determinedness.determined,
            "witnesses": [w.to_dict() for w in self.determinedness.witnesses],
            "distance_to_pol": self.distance_to_pol,
            "nearest_subgroup": self.nearest_subgroup.to_json(),
            "atoms": self.atom_count,
        }


@dataclass(frozen=True)
class TraceRecord:
    """One prefix level of a convergence trace."""

    depth: int
    prefix: str
    capacity: float
    capacity_gap: float
    distance_to_pol: float
    nearest_subgroup: Subgroup

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "prefix": self.prefix,
            "capacity": self.capacity,
            "capacity_gap": self.capacity_gap,
            "distance_to_pol": self.distance_to_pol,
            "nearest_subgroup": self.nearest_subgroup.to_json(),
        }


@dataclass
class PolarizationReport:
    """Per-path records plus aggregates for one polarization experiment."""

    config: dict
    records: list[PathRecord]
    level_gaps: dict[int, list[float]] = field(default_factory=dict)

    @property
    def evaluated(self) -> list[PathRecord]:
        return [r for r in self.records if r.ok]

    @property
    def failed(self) -> list[PathRecord]:
        return [r for r in self.records if not r.ok]

    def fraction_determined(self) -> float:
        done = self.evaluated
        if not done:
            return 0.0
        return sum(1 for r in done if r.determinedness.determined) / len(done)

    def subgroup_histogram(self) -> list[tuple[Subgroup, int]]:
        """Determined-path counts keyed by the best witness subgroup."""
        counts: dict[Subgroup, int] = {}
        for r in self.evaluated:
            if r.determinedness.determined:
                sub = r.determinedness.best.subgroup
                counts[sub] = counts.get(sub, 0) + 1
        return sorted(counts.items(), key=lambda kv: (kv[0].size, kv[0].members))

    def to_dict(self) -> dict:
        group_size = 1
        for d in self.config.get("group", []):
            group_size *= d
        done = self.evaluated
        capacities = [r.capacity for r in done]
        edges = np.linspace(0.0, np.log2(group_size), CAPACITY_HIST_BINS + 1)
        hist = np.histogram(capacities, bins=edges)[0] if capacities else np.zeros(
            CAPACITY_HIST_BINS, dtype=int
        )
        n_eval = len(done)
        return {
            "schema": "polarlab-report/1",
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "levels": [
                {
                    "depth": depth,
                    "median_capacity_gap": float(np.median(gaps)) if gaps else None,
                }
                for depth, gaps in sorted(self.level_gaps.items())
            ],
            "aggregates": {
                "evaluated": n_eval,
                "failed": len(self.failed),
                "fraction_determined": self.fraction_determined(),
                "mean_capacity": float(np.mean(capacities)) if capacities else None,
                "subgroup_histogram": [
                    {
                        "subgroup": sub.to_json(),
                        "count": count,
                        "fraction": count / n_eval,
                    }
                    for sub, count in self.subgroup_histogram()
                ],
                "capacity_histogram": [
                    {
                        "lo": float(edges[i]),
                        "hi": float(edges[i + 1]),
                        "count": int(hist[i]),
                    }
                    for i in range(CAPACITY_HIST_BINS)
                ],
            },
        }


def report_json(report_dict: dict) -> str:
    """Canonical JSON text for a report; re-serializing a parse is identical."""
    return json.dumps(report_dict, indent=2) + "\n"


def report_csv(report_dict: dict) -> str:
    """Flat key,value CSV of the report aggregates."""
    agg = report_dict["aggregates"]
    lines = ["key,value"]
    for key in ("evaluated", "failed", "fraction_determined", "mean_capacity"):
        lines.append(f"{key},{agg[key]}")
    for level in report_dict["levels"]:
        lines.append(f"median_capacity_gap[{level['depth']}],{level['median_capacity_gap']}")
    for item in agg["subgroup_histogram"]:
        sub = "{" + " ".join(str(i) for i in item["subgroup"]) + "}"
        lines.append(f"fraction_determined_by[{sub}],{item['fraction']}")
    for item in agg["capacity_histogram"]:
        lines.append(f"capacity_bin[{item['lo']}:{item['hi']}],{item['count']}")
    return "\n".join(lines) + "\n"


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    return max(1, threads)


@dataclass(frozen=True)
class _Ctx:
    depth: int
    delta: float
    merge_tau: float
    atom_budget: int


def _guarded_gap(m: BlackwellMeasure, atom_budget: int) -> float:
    """Capacity gap of a node, treated as budgeted work like a transform step.

    The gap diagnostic materializes all atom pairs, so a node whose pair set
    exceeds the budget cannot be evaluated, like a blocked minus step.
    """
    k = m.atom_count
    if k * k > atom_budget:
        raise AtomBudgetError(
            f"capacity-gap evaluation would materialize {k * k} atom pairs, "
            f"exceeding the budget of {atom_budget}"
        )
    return capacity_gap(m).value


def _evaluate(m: BlackwellMeasure, path: str, gap: float, ctx: _Ctx) -> PathRecord:
    dist, nearest = distance_to_pol(m)
    det = delta_determining_subgroup(m.realize(), ctx.delta)
    return PathRecord(
        path=path,
        capacity=capacity_of_measure(m),
        capacity_gap=gap,
        determinedness=det,
        distance_to_pol=dist,
        nearest_subgroup=nearest,
        atom_count=m.atom_count,
    )


def _fail_subtree(path: str, remaining: int, message: str, records: list[PathRecord]) -> None:
    if remaining == 0:
        records.append(PathRecord(path=path, error=message))
        return
    for sign in (MINUS, PLUS):
        _fail_subtree(path + sign, remaining - 1, message, records)


def _walk(
    m: BlackwellMeasure,
    path: str,
    ctx: _Ctx,
    records: list[PathRecord],
    level_gaps: dict[int, list[float]],
) -> None:
    try:
        gap = _guarded_gap(m, ctx.atom_budget)
    except AtomBudgetError as exc:
        _fail_subtree(path, ctx.depth - len(path), str(exc), records)
        return
    level_gaps.setdefault(len(path), []).append(gap)
    if len(path) == ctx.depth:
        records.append(_evaluate(m, path, gap, ctx))
        return
    for sign in (MINUS, PLUS):
        try:
            child = polar_step(m, sign, ctx.merge_tau, ctx.atom_budget)
        except AtomBudgetError as exc:
            _fail_subtree(path + sign, ctx.depth - len(path) - 1, str(exc), records)
            continue
        _walk(child, path + sign, ctx, records, level_gaps)


def _merge_levels(into: dict[int, list[float]], part: dict[int, list[float]]) -> None:
    for depth, gaps in part.items():
        into.setdefault(depth, []).extend(gaps)


def enumerate_paths(
    w: Channel,
    depth: int,
    delta: float = DEFAULT_DELTA,
    merge_tau: float = DEFAULT_MERGE_TAU,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
    threads: int | None = None,
    max_depth: int = MAX_DEPTH,
) -> PolarizationReport:
    """Evaluate every sign path of the given depth (2^depth records).

    Records appear in path order with '-' before '+' at every position.
    Subtrees past the split level run on a thread pool when threads > 1;
    results do not depend on the thread count.
    """
    if not 0 <= depth <= max_depth:
        raise ValueError(f"depth must be in [0, {max_depth}]")
    if delta <= 0:
        raise ValueError("delta must be positive")
    threads = resolve_threads(threads)
    ctx = _Ctx(depth, delta, merge_tau, atom_budget)
    config = _config_echo(w, depth, "exhaustive", None, None, ctx)

    root = blackwell_measure(w, merge_tau)
    records: list[PathRecord] = []
    level_gaps: dict[int, list[float]] = {}

    split = 0
    if threads > 1 and depth >= 2:
        split = min(int(np.ceil(np.log2(threads))), depth - 1)
    if split == 0:
        _walk(root, "", ctx, records, level_gaps)
        return PolarizationReport(config, records, level_gaps)

    # Sequential prefix phase down to the split level, then parallel subtrees.
    prefixes: list[tuple[str, BlackwellMeasure | str]] = [("", root)]
    for level in range(split):
        nxt: list[tuple[str, BlackwellMeasure | str]] = []
        for path, node in prefixes:
            if isinstance(node, str):
                nxt.extend(((path + s, node) for s in (MINUS, PLUS)))
                continue
            try:
                gap = _guarded_gap(node, ctx.atom_budget)
            except AtomBudgetError as exc:
                nxt.extend(((path + s, str(exc)) for s in (MINUS, PLUS)))
                continue
            level_gaps.setdefault(level, []).append(gap)
            for sign in (MINUS, PLUS):
                try:
                    nxt.append((path + sign, polar_step(node, sign, ctx.merge_tau, ctx.atom_budget)))
                except AtomBudgetError as exc:
                    nxt.append((path + sign, str(exc)))
        prefixes = nxt

    def run_subtree(item):
        path, node = item
        recs: list[PathRecord] = []
        gaps: dict[int, list[float]] = {}
        if isinstance(node, str):
            _fail_subtree(path, ctx.depth - len(path), node, recs)
        else:
            _walk(node, path, ctx, recs, gaps)
        return recs, gaps

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run_subtree, prefixes))
    for recs, gaps in parts:
        records.extend(recs)
        _merge_levels(level_gaps, gaps)
    return PolarizationReport(config, records, level_gaps)


def sample_paths(
    w: Channel,
    depth: int,
    count: int,
    seed: int,
    delta: float = DEFAULT_DELTA,
    merge_tau: float = DEFAULT_MERGE_TAU,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
    threads: int | None = None,
    max_depth: int = MAX_DEPTH,
) -> PolarizationReport:
    """Evaluate `count` uniform random paths; one record per sample.

    Path i is drawn from a generator seeded by (seed, i), so the sample set
    is independent of evaluation order and thread count.
    """
    if not 0 <= depth <= max_depth:
        raise ValueError(f"depth must be in [0, {max_depth}]")
    if count < 1:
        raise ValueError("sample count must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    threads = resolve_threads(threads)
    ctx = _Ctx(depth, delta, merge_tau, atom_budget)
    config = _config_echo(w, depth, "sample", count, seed, ctx)

    paths = []
    for i in range(count):
        bits = np.random.default_rng([seed, i]).integers(0, 2, size=depth)
        paths.append("".join(PLUS if b else MINUS for b in bits))

    root = blackwell_measure(w, merge_tau)
    cache: dict[str, BlackwellMeasure | str] = {"": root}

    def measure_at(path: str) -> BlackwellMeasure | str:
        node = cache.get(path)
        if node is not None:
            return node
        parent = measure_at(path[:-1])
        if isinstance(parent, str):
            node = parent
        else:
            try:
                node = polar_step(parent, path[-1], ctx.merge_tau, ctx.atom_budget)
            except AtomBudgetError as exc:
                node = str(exc)
        cache[path] = node
        return node

    def run_sample(path: str) -> PathRecord:
        node = measure_at(path)
        if isinstance(node, str):
            return PathRecord(path=path, error=node)
        try:
            gap = _guarded_gap(node, ctx.atom_budget)
        except AtomBudgetError as exc:
            return PathRecord(path=path, error=str(exc))
        return _evaluate(node, path, gap, ctx)

    # Prefix measures are cached sequentially first so threading cannot
    # change which objects get computed.
    for path in paths:
        measure_at(path)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run_sample, paths))
    else:
        records = [run_sample(path) for path in paths]
    return PolarizationReport(config, records, {})


def convergence_trace(
    w: Channel,
    path: str,
    delta: float = DEFAULT_DELTA,
    merge_tau: float = DEFAULT_MERGE_TAU,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
) -> list[TraceRecord]:
    """Capacity, capacity gap and distance-to-fixed-points along path prefixes."""
    steps = normalize_path(path)
    m = blackwell_measure(w, merge_tau)
    out = []
    for k in range(len(steps) + 1):
        dist, nearest = distance_to_pol(m)
        out.append(
            TraceRecord(
                depth=k,
                prefix=steps[:k],
                capacity=capacity_of_measure(m),
                capacity_gap=_guarded_gap(m, atom_budget),
                distance_to_pol=dist,
                nearest_subgroup=nearest,
            )
        )
        if k < len(steps):
            m = polar_step(m, steps[k], merge_tau, atom_budget)
    return out


def _config_echo(w: Channel, depth, mode, count, seed, ctx: _Ctx) -> dict:
    return {
        "group": w.require_group().to_json(),
        "depth": depth,
        "mode": mode,
        "samples": count,
        "seed": seed,
        "delta": ctx.delta,
        "merge_tau": ctx.merge_tau,
        "atom_budget": ctx.atom_budget,
    }
