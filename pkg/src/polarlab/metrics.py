"""Convergence diagnostics on Blackwell measures.

An exact optimal-transport distance (ground metric: total variation between
posteriors) stands in for the weak-* topology; a sampled guessing-probability
gap gives a certified lower bound on the noisiness metric itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .blackwell import BlackwellMeasure, JointSource, blackwell_measure, pc_probability
from .channels import deterministic_hom
from .groups import Group, Subgroup, enumerate_subgroups

MARGINAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Optimal transport plan between two measures' atom sets."""

    source_index: np.ndarray
    target_index: np.ndarray
    mass: np.ndarray
    cost: float

    def __post_init__(self):
        if np.any(self.mass < -MARGINAL_TOL):
            raise ValueError("transport masses must be non-negative")


def _tv_cost_matrix(m1: BlackwellMeasure, m2: BlackwellMeasure) -> np.ndarray:
    return 0.5 * np.abs(m1.posteriors[:, None, :] - m2.posteriors[None, :, :]).sum(axis=2)


def _check_marginals(plan: TransportPlan, m1: BlackwellMeasure, m2: BlackwellMeasure) -> None:
    row = np.zeros(m1.atom_count)
    col = np.zeros(m2.atom_count)
    np.add.at(row, plan.source_index, plan.mass)
    np.add.at(col, plan.target_index, plan.mass)
    if np.abs(row - m1.weights).max() > MARGINAL_TOL or np.abs(col - m2.weights).max() > MARGINAL_TOL:
        raise RuntimeError("transport plan marginals do not match the measures")


def transport_plan(m1: BlackwellMeasure, m2: BlackwellMeasure) -> TransportPlan:
    """Exact solution of the transportation problem between two measures.

    The problem is symmetric in its arguments; to make the reported cost
    bitwise symmetric the LP is always solved in a canonical orientation.
    """
    if m1.group != m2.group:
        raise ValueError("measures live on different groups")
    if m1.identical(m2):
        idx = np.arange(m1.atom_count)
        return TransportPlan(idx, idx, m1.weights.copy(), 0.0)
    if _canonical_key(m2) < _canonical_key(m1):
        flipped = transport_plan(m2, m1)
        return TransportPlan(flipped.target_index, flipped.source_index, flipped.mass, flipped.cost)
    cost = _tv_cost_matrix(m1, m2)
    k1, k2 = cost.shape
    if k1 == 1 or k2 == 1:
        # Product plan is forced when either side is a single atom.
        mass = np.outer(m1.weights, m2.weights)
        src, tgt = np.divmod(np.arange(k1 * k2), k2)
        plan = TransportPlan(src, tgt, mass.ravel(), float((mass * cost).sum()))
        _check_marginals(plan, m1, m2)
        return plan
    # The last column-marginal row is implied by the others; dropping it keeps
    # the system solvable when the two weight totals differ by float dust.
    col_marginals = sp.kron(np.ones((1, k1)), sp.eye(k2, format="csr"), format="csr")
    a_eq = sp.vstack(
        [
            sp.kron(sp.eye(k1, format="csr"), np.ones((1, k2))),
            col_marginals[:-1],
        ],
        format="csr",
    )
    b_eq = np.concatenate([m1.weights, m2.weights[:-1]])
    res = linprog(
        cost.ravel(),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    flow = _repair_flow(res.x.reshape(k1, k2), m1.weights, m2.weights)
    src, tgt = np.nonzero(flow > 0)
    plan = TransportPlan(src, tgt, flow[src, tgt], max(float((flow * cost).sum()), 0.0))
    _check_marginals(plan, m1, m2)
    return plan


def _repair_flow(flow: np.ndarray, supplies: np.ndarray, demands: np.ndarray) -> np.ndarray:
    """Nudge an LP transport solution so its marginals match exactly.

    The solver serves equality constraints only to its feasibility tolerance,
    which can under-serve atoms whose weight is below it. Only residual-scale
    mass is moved, so the cost perturbation is bounded by the solver residual.
    """
    out = np.maximum(flow, 0.0)
    row_need = supplies - out.sum(axis=1)
    col_need = demands - out.sum(axis=0)
    # Jointly under-served pairs: add mass directly.
    while True:
        i = int(np.argmax(row_need))
        j = int(np.argmax(col_need))
        mass = min(row_need[i], col_need[j])
        if mass <= 0.0:
            break
        out[i, j] += mass
        row_need[i] -= mass
        col_need[j] -= mass
    # Column imbalances: shift mass between columns within a row.
    for j in np.flatnonzero(col_need > 0.0):
        for jp in np.argsort(col_need):
            if col_need[j] <= 0.0 or col_need[jp] >= 0.0:
                break
            for i in np.flatnonzero(out[:, jp] > 0.0):
                amt = min(col_need[j], -col_need[jp], out[i, jp])
                if amt > 0.0:
                    out[i, jp] -= amt
                    out[i, j] += amt
                    col_need[jp] += amt
                    col_need[j] -= amt
                if col_need[j] <= 0.0 or col_need[jp] >= 0.0:
                    break
    # Row imbalances: shift mass between rows within a column.
    for i in np.flatnonzero(row_need > 0.0):
        for ip in np.argsort(row_need):
            if row_need[i] <= 0.0 or row_need[ip] >= 0.0:
                break
            for j in np.flatnonzero(out[ip] > 0.0):
                amt = min(row_need[i], -row_need[ip], out[ip, j])
                if amt > 0.0:
                    out[ip, j] -= amt
                    out[i, j] += amt
                    row_need[ip] += amt
                    row_need[i] -= amt
                if row_need[i] <= 0.0 or row_need[ip] >= 0.0:
                    break
    return out


def _canonical_key(m: BlackwellMeasure) -> tuple:
    return (m.atom_count, m.posteriors.tobytes(), m.weights.tobytes())


def wasserstein(m1: BlackwellMeasure, m2: BlackwellMeasure) -> float:
    """Exact optimal-transport distance with total-variation ground metric."""
    return transport_plan(m1, m2).cost


def _atom_source(m: BlackwellMeasure, m_max: int) -> JointSource:
    """Atom-identification source: U is the atom index, X drawn from its posterior."""
    order = np.lexsort((np.arange(m.atom_count), -m.weights))[:m_max]
    probs = m.weights[order, None] * m.posteriors[order]
    return JointSource(probs / probs.sum(), m.group)


def pc_gap_lower_bound(
    m1: BlackwellMeasure,
    m2: BlackwellMeasure,
    trials: int = 64,
    seed: int = 0,
    m_max: int | None = None,
) -> float:
    """Certified lower bound on the noisiness distance between two measures.

    Runs structured sources (each measure's own atom-identification source
    and the diagonal source u = x) plus Dirichlet-random joint sources, and
    returns the largest observed guessing-probability gap. The bound is
    monotone in `trials` for a fixed seed.
    """
    if m1.group != m2.group:
        raise ValueError("measures live on different groups")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    size = m1.group.size
    if m_max is None:
        m_max = size
    if m_max < 1:
        raise ValueError("m_max must be >= 1")

    sources = [_atom_source(m1, m_max), _atom_source(m2, m_max)]
    if m_max >= size:
        sources.append(JointSource(np.eye(size) / size, m1.group))
    best = 0.0
    for src in sources:
        best = max(best, abs(pc_probability(src, m1) - pc_probability(src, m2)))
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        m_u = int(rng.integers(1, m_max + 1))
        probs = rng.dirichlet(np.ones(m_u * size)).reshape(m_u, size)
        src = JointSource(probs, m1.group)
        best = max(best, abs(pc_probability(src, m1) - pc_probability(src, m2)))
    return best


@lru_cache(maxsize=None)
def pol_set(group: Group) -> tuple[tuple[Subgroup, BlackwellMeasure], ...]:
    """The finite fixed-point set: Blackwell measures of all quotient projections."""
    return tuple(
        (sub, blackwell_measure(deterministic_hom(group, sub)))
        for sub in enumerate_subgroups(group)
    )


def distance_to_pol(m: BlackwellMeasure, group: Group | None = None) -> tuple[float, Subgroup]:
    """Distance to the nearest quotient-projection measure, with its subgroup."""
    group = group or m.group
    if group != m.group:
        raise ValueError("measure group does not match")
    best_dist = None
    best_sub = None
    for sub, target in pol_set(group):
        d = wasserstein(m, target)
        if best_dist is None or d < best_dist:
            best_dist, best_sub = d, sub
    return float(best_dist), best_sub
