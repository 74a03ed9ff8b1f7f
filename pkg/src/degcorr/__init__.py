"""Degree-degree correlation measures, random graph samplers and their local limits."""

from .errors import (
    DegcorrError,
    EdgeListFormatError,
    InfiniteMoment,
    InsufficientConditioning,
    InvalidConfig,
    InvalidNode,
    NoEdges,
    RadiusTooLarge,
    SelfLoop,
    TransformDomain,
)
from .graph import (
    EmpiricalDistributions,
    Graph,
    directed_edge_fold,
    empirical_distributions,
    from_edge_list,
    from_labeled_edges,
    read_edge_list,
    write_edge_list,
)
from .metrics import (
    UNDEFINED,
    MetricReport,
    annd,
    annr,
    compute_report,
    degree_distance,
    kendall,
    pearson,
    spearman,
)
from .models import RggParams, SampledGraph, WeightLaw, sample_irg, sample_rgg, weight_moments

__version__ = "0.1.0"
