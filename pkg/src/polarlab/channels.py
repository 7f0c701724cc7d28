"""Discrete memoryless channels and operations on them.

A channel is a row-stochastic kernel W(y|x) over finite alphabets. Channels
whose input alphabet is a finite Abelian group (rows indexed by element
enumeration order) support the coset-structured operations below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ._util import row_entropies_bits
from .groups import Group, Subgroup, enumerate_subgroups, make_group, quotient

ROW_SUM_TOL = 1e-12
DEGRADATION_TOL = 1e-7


class Channel:
    """Finite-input finite-output channel with an optional group binding."""

    def __init__(
        self,
        kernel: np.ndarray,
        outputs: Sequence[str] | None = None,
        group: Group | None = None,
    ):
        kernel = np.array(kernel, dtype=float)
        if kernel.ndim != 2 or kernel.size == 0:
            raise ValueError("kernel must be a non-empty 2-D matrix")
        if kernel.min() < -ROW_SUM_TOL or kernel.max() > 1.0 + 1e-9:
            bad = np.unravel_index(
                int(np.argmax(np.maximum(-kernel, kernel - 1.0))), kernel.shape
            )
            raise ValueError(f"kernel entry at row {bad[0]}, column {bad[1]} outside [0, 1]")
        row_sums = kernel.sum(axis=1)
        off = np.abs(row_sums - 1.0)
        if off.max() > ROW_SUM_TOL:
            row = int(np.argmax(off))
            raise ValueError(f"row {row} sums to {row_sums[row]!r}, expected 1")
        if outputs is None:
            outputs = tuple(f"y{j}" for j in range(kernel.shape[1]))
        else:
            outputs = tuple(str(o) for o in outputs)
        if len(outputs) != kernel.shape[1]:
            raise ValueError("outputs length does not match kernel columns")
        if len(set(outputs)) != len(outputs):
            raise ValueError("output labels must be distinct")
        if group is not None and group.size != kernel.shape[0]:
            raise ValueError(
                f"kernel has {kernel.shape[0]} rows but group has {group.size} elements"
            )
        kernel.setflags(write=False)
        self.kernel = kernel
        self.outputs = outputs
        self.group = group

    @property
    def n_inputs(self) -> int:
        return self.kernel.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.kernel.shape[1]

    def require_group(self) -> Group:
        if self.group is None:
            raise ValueError("channel is not bound to a group")
        return self.group

    def __repr__(self) -> str:
        g = f", group={self.group!r}" if self.group is not None else ""
        return f"Channel({self.n_inputs}x{self.n_outputs}{g})"


@dataclass(frozen=True)
class DeterminednessWitness:
    subgroup: Subgroup
    gap_capacity: float
    gap_quotient: float

    def to_dict(self) -> dict:
        return {
            "subgroup": self.subgroup.to_json(),
            "gap_capacity": self.gap_capacity,
            "gap_quotient": self.gap_quotient,
        }


@dataclass(frozen=True)
class DeterminednessResult:
    """Outcome of testing a channel against every subgroup at threshold delta.

    A subgroup qualifies when both the capacity gap |I(W) - log2|G/H|| and
    the quotient gap |I(W[H]) - log2|G/H|| are strictly below delta.
    Witnesses are sorted best-first by their larger gap.
    """

    determined: bool
    delta: float
    witnesses: tuple[DeterminednessWitness, ...]

    @property
    def best(self) -> DeterminednessWitness | None:
        return self.witnesses[0] if self.witnesses else None

    def to_dict(self) -> dict:
        return {
            "determined": self.determined,
            "delta": self.delta,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def compose(v: Channel, w: Channel) -> Channel:
    """Channel (V o W)(z|x) = sum_y V(z|y) W(y|x); W feeds into V."""
    if v.n_inputs != w.n_outputs:
        raise ValueError(
            f"composition mismatch: V has {v.n_inputs} inputs, W has {w.n_outputs} outputs"
        )
    return Channel(w.kernel @ v.kernel, v.outputs, w.group)


def symmetric_capacity(w: Channel) -> float:
    """Mutual information in bits between a uniform input and the output."""
    m = w.n_inputs
    p_y = w.kernel.sum(axis=0) / m
    live = p_y > 0.0
    posteriors = (w.kernel[:, live] / (m * p_y[live])).T
    return float(np.log2(m) - p_y[live] @ row_entropies_bits(posteriors))


def deterministic_hom(group: Group, sub: Subgroup) -> Channel:
    """Deterministic channel mapping each element to its coset modulo the subgroup."""
    q = quotient(group, sub)
    kernel = np.zeros((group.size, q.count))
    kernel[np.arange(group.size), q.coset_of] = 1.0
    outputs = tuple(q.coset_label(j) for j in range(q.count))
    return Channel(kernel, outputs, group)


def conditional_channel(w: Channel, sub: Subgroup) -> Channel:
    """Coset-input channel: rows of W averaged over each coset of the subgroup."""
    group = w.require_group()
    q = quotient(group, sub)
    kernel = np.zeros((q.count, w.n_outputs))
    np.add.at(kernel, q.coset_of, w.kernel)
    kernel /= sub.size
    return Channel(kernel, w.outputs)


def degradation_residual(w: Channel, other: Channel) -> float:
    """Smallest max-abs residual ||W - V o W'||_inf over row-stochastic V.

    Solved as a linear program: variables are the entries of V plus the
    residual bound t; zero residual means W is exactly a degradation of W'.
    """
    if w.n_inputs != other.n_inputs:
        raise ValueError(
            f"input alphabet mismatch: {w.n_inputs} vs {other.n_inputs}"
        )
    m, n = w.kernel.shape
    n_src = other.n_outputs
    n_vars = n_src * n + 1
    mix = sp.kron(sp.csr_matrix(other.kernel), sp.eye(n, format="csr"))
    minus_t = sp.csr_matrix(-np.ones((m * n, 1)))
    a_ub = sp.vstack(
        [sp.hstack([mix, minus_t]), sp.hstack([-mix, minus_t])], format="csr"
    )
    b_ub = np.concatenate([w.kernel.ravel(), -w.kernel.ravel()])
    a_eq = sp.hstack(
        [sp.kron(sp.eye(n_src, format="csr"), np.ones((1, n))), sp.csr_matrix((n_src, 1))],
        format="csr",
    )
    b_eq = np.ones(n_src)
    c = np.zeros(n_vars)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"degradation LP failed: {res.message}")
    return float(res.fun)


def is_degraded(w: Channel, other: Channel, tol: float = DEGRADATION_TOL) -> bool:
    """Whether W equals V o W' for some channel V, up to the residual tolerance."""
    return degradation_residual(w, other) <= tol


def delta_determining_subgroup(w: Channel, delta: float) -> DeterminednessResult:
    """Find all subgroups whose quotient structure explains the channel at level delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    group = w.require_group()
    capacity = symmetric_capacity(w)
    witnesses = []
    for sub in enumerate_subgroups(group):
        target = float(np.log2(group.size // sub.size))
        gap_capacity = abs(capacity - target)
        if gap_capacity >= delta:
            continue
        gap_quotient = abs(symmetric_capacity(conditional_channel(w, sub)) - target)
        if gap_quotient < delta:
            witnesses.append(DeterminednessWitness(sub, gap_capacity, gap_quotient))
    witnesses.sort(key=lambda wit: (max(wit.gap_capacity, wit.gap_quotient), wit.subgroup.members))
    return DeterminednessResult(bool(witnesses), float(delta), tuple(witnesses))


def channel_to_json(w: Channel) -> dict:
    return {
        "group": w.group.to_json() if w.group is not None else None,
        "outputs": list(w.outputs),
        "rows": [[float(v) for v in row] for row in w.kernel],
    }


def channel_from_json(obj: dict) -> Channel:
    if not isinstance(obj, dict):
        raise ValueError("channel JSON must be an object")
    for key in ("outputs", "rows"):
        if key not in obj:
            raise ValueError(f"channel JSON missing field {key!r}")
    group = None
    if obj.get("group") is not None:
        if not isinstance(obj["group"], list):
            raise ValueError("field 'group' must be a list of cyclic orders")
        group = make_group(obj["group"])
    rows = obj["rows"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValueError("field 'rows' must be a list of rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("field 'rows' has ragged rows")
    return Channel(np.array(rows, dtype=float), obj["outputs"], group)
