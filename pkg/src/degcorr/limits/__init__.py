"""Local-limit values of the degree-degree measures."""

from .estimators import (
    LimitTables,
    LimitValue,
    evaluate_limit,
    limit_annd,
    limit_metric,
    limit_pearson,
    limit_tables,
)
from .geometry import LensGeometry, ball_volume, lens_volume, p_conn, unit_ball_volume
from .laws import ABSENT, LimitLaw, rv_sampler, sample_joint_irg, sample_joint_rgg

__all__ = [
    "ABSENT",
    "LensGeometry",
    "LimitLaw",
    "LimitTables",
    "LimitValue",
    "ball_volume",
    "evaluate_limit",
    "lens_volume",
    "limit_annd",
    "limit_metric",
    "limit_pearson",
    "limit_tables",
    "p_conn",
    "rv_sampler",
    "sample_joint_irg",
    "sample_joint_rgg",
    "unit_ball_volume",
]
