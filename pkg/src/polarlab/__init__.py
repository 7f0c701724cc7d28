"""Polarization of channels over finite Abelian groups.

Simulates the Arikan-style minus/plus transform process on group-input
channels, tracks synthetic channels through their canonical Blackwell
measures, and provides numeric convergence diagnostics: capacity gaps,
delta-determinedness classification, and exact optimal-transport distances
to the deterministic quotient-projection channels.
"""

from .blackwell import (
    BlackwellMeasure,
    JointSource,
    blackwell_measure,
    canonicalize,
    capacity_of_measure,
    entropy,
    merge_outputs,
    pc_probability,
)
from .channels import (
    Channel,
    DeterminednessResult,
    DeterminednessWitness,
    channel_from_json,
    channel_to_json,
    compose,
    conditional_channel,
    degradation_residual,
    delta_determining_subgroup,
    deterministic_hom,
    is_degraded,
    symmetric_capacity,
)
from .groups import (
    Group,
    QuotientMap,
    Subgroup,
    closure,
    difference_span,
    enumerate_subgroups,
    make_group,
    quotient,
    subgroup_from_members,
)
from .metrics import (
    TransportPlan,
    distance_to_pol,
    pc_gap_lower_bound,
    pol_set,
    transport_plan,
    wasserstein,
)
from .polar import (
    AtomBudgetError,
    CapacityGap,
    capacity_gap,
    convolve_dist,
    minus_on_measure,
    minus_transform,
    plus_on_measure,
    plus_transform,
    polar_step,
    synthetic,
    translate_dist,
)
from .process import (
    MartingaleResidual,
    PathRecord,
    PolarizationReport,
    TraceRecord,
    convergence_trace,
    enumerate_paths,
    martingale_residual,
    sample_paths,
)

__version__ = "0.1.0"

__all__ = [
    "AtomBudgetError",
    "BlackwellMeasure",
    "CapacityGap",
    "Channel",
    "DeterminednessResult",
    "DeterminednessWitness",
    "Group",
    "JointSource",
    "MartingaleResidual",
    "PathRecord",
    "PolarizationReport",
    "QuotientMap",
    "Subgroup",
    "TraceRecord",
    "TransportPlan",
    "blackwell_measure",
    "canonicalize",
    "capacity_gap",
    "capacity_of_measure",
    "channel_from_json",
    "channel_to_json",
    "closure",
    "compose",
    "conditional_channel",
    "convergence_trace",
    "convolve_dist",
    "degradation_residual",
    "delta_determining_subgroup",
    "deterministic_hom",
    "difference_span",
    "distance_to_pol",
    "entropy",
    "enumerate_paths",
    "enumerate_subgroups",
    "is_degraded",
    "make_group",
    "martingale_residual",
    "merge_outputs",
    "minus_on_measure",
    "minus_transform",
    "pc_gap_lower_bound",
    "pc_probability",
    "plus_on_measure",
    "plus_transform",
    "pol_set",
    "polar_step",
    "quotient",
    "sample_paths",
    "subgroup_from_members",
    "symmetric_capacity",
    "synthetic",
    "translate_dist",
    "transport_plan",
    "wasserstein",
]
