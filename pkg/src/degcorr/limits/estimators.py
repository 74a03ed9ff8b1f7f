"""Limit values of the degree-degree measures under a :class:`LimitLaw`.

Closed forms are used where they exist (ANND for both models, Pearson for the
RGG). Everything else is a Monte Carlo estimate of the corresponding
expectation over the local limit. Expectations that carry a ``d_o`` weight
are importance-weighted ratios over plain draws, so isolated roots contribute
nothing. Spearman and Kendall need the limiting CDFs ``F*`` and ``H``; those
are tabulated from a first, independent batch of draws (pass 1) and plugged
into the outer expectation (pass 2).

Draws are made in (at most) 100 batches, each from its own derived stream;
standard errors are batch-means estimates.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from ..errors import InsufficientConditioning
from ..metrics import Transform, resolve_transform
from ..rng import stream
from .geometry import ball_volume, p_conn
from .laws import LimitLaw

__all__ = [
    "LimitValue",
    "LimitTables",
    "MIN_CONDITIONAL_DRAWS",
    "limit_annd",
    "limit_pearson",
    "limit_metric",
    "limit_tables",
    "evaluate_limit",
]

N_BATCHES = 100
MIN_CONDITIONAL_DRAWS = 1000


@dataclass(frozen=True)
class LimitValue:
    value: float
    stderr: float
    method: str  # "closed_form" or "monte_carlo"

    def to_json(self) -> dict:
        return asdict(self)


def _batch_sizes(total: int) -> list[int]:
    if total < 1:
        raise ValueError("need at least one Monte Carlo sample")
    b = min(N_BATCHES, total)
    return [len(x) for x in np.array_split(np.empty(total), b)]


def _draw(law: LimitLaw, seed: int, tag: str, total: int):
    """Yield ``(d_o, d_V)`` batches; batch ``i`` uses stream ``(seed, tag, i)``."""
    for i, size in enumerate(_batch_sizes(total)):
        yield law.sample_joint(stream(seed, "limit", tag, i), size)


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """Ratio-of-sums estimate and its batch-means standard error."""
    num, den = np.asarray(num, float), np.asarray(den, float)
    est = num.sum() / den.sum()
    b = len(num)
    if b < 2:
        return float(est), math.nan
    resid = num - est * den
    se = math.sqrt(np.sum(resid * resid) / (b * (b - 1))) / den.mean()
    return float(est), float(se)


# -- closed forms ----------------------------------------------------------------

def limit_annd(law: LimitLaw, k: int) -> float:
    """Limiting average nearest neighbour degree of degree-``k`` vertices."""
    if law.kind == "irg":
        m1, m2 = law.weight.moment(1), law.weight.moment(2)
        if m1 == 0:
            raise ValueError("E[W] = 0: the limit has no edges")
        return 1.0 + law.degree_scale * m2 / m1
    if k < 1:
        raise ValueError("ANND is defined for k >= 1")
    p = law.rgg.edge_prob
    pc = p_conn(law.rgg.dim)
    omega = ball_volume(law.rgg.dim, law.rgg.radius)
    return 1.0 + p * omega * (1.0 - pc) + (k - 1) * pc


def limit_pearson(law: LimitLaw, mc_samples: int = 10**6, seed: int = 0) -> LimitValue:
    """Limit of Pearson's r: ``p_conn`` for the RGG, Monte Carlo for the IRG."""
    if law.kind == "rgg":
        return LimitValue(p_conn(law.rgg.dim), 0.0, "closed_form")
    law.require_root_moment(3)
    rows = []
    for d_o, d_v in _draw(law, seed, "pearson", mc_samples):
        x = d_o.astype(float)
        has = d_o > 0
        rows.append([x.sum(), (x * x).sum(), (x ** 3).sum(), (x[has] ** 2 * d_v[has]).sum(), len(x)])
    sums = np.array(rows)

    def pearson_of(s1, s2, s3, sx, n):
        e1, e2, e3, ex = s1 / n, s2 / n, s3 / n, sx / n
        return (ex - e2 * e2 / e1) / (e3 - e2 * e2 / e1)

    value = pearson_of(*sums.sum(axis=0))
    per_batch = np.array([pearson_of(*r) for r in sums])
    se = float(per_batch.std(ddof=1) / math.sqrt(len(per_batch))) if len(per_batch) > 1 else math.nan
    return LimitValue(float(value), se, "monte_carlo")


# -- plug-in CDF tables ----------------------------------------------------------

class LimitTables:
    """Size-biased root CDF ``F*`` and joint CDF ``H`` of ``(d_o, d_V)``.

    Built from importance-weighted draws unless a closed-form ``F*`` is given.
    """

    def __init__(self, d_o: np.ndarray, d_v: np.ndarray,
                 closed_F_star: Callable[[np.ndarray], np.ndarray] | None = None):
        w = d_o.astype(float)
        total = w.sum()
        if total == 0:
            raise ValueError("no draw had a neighbour; the limit has no edges")
        self._F = np.cumsum(np.bincount(d_o, weights=w)) / total
        has = d_o > 0
        ko, kv = d_o[has], d_v[has]
        joint = np.zeros((ko.max() + 1, kv.max() + 1))
        np.add.at(joint, (ko, kv), w[has])
        self._H = joint.cumsum(axis=0).cumsum(axis=1) / total
        self._closed = closed_F_star

    def F_star(self, k) -> np.ndarray:
        k = np.asarray(k)
        if self._closed is not None:
            return self._closed(k)
        idx = np.clip(k, 0, len(self._F) - 1)
        return np.where(k < 0, 0.0, np.where(k >= len(self._F), 1.0, self._F[idx]))

    def F_tied(self, k) -> np.ndarray:
        k = np.asarray(k)
        return self.F_star(k) + self.F_star(k - 1)

    def H(self, k, l) -> np.ndarray:
        k, l = np.asarray(k), np.asarray(l)
        i = np.clip(k, 0, self._H.shape[0] - 1)
        j = np.clip(l, 0, self._H.shape[1] - 1)
        return np.where((k < 0) | (l < 0), 0.0, self._H[i, j])

    def H_tied(self, k, l) -> np.ndarray:
        k, l = np.asarray(k), np.asarray(l)
        return self.H(k, l) + self.H(k - 1, l) + self.H(k, l - 1) + self.H(k - 1, l - 1)


def _closed_form_F_star(law: LimitLaw):
    # Po(c)* = 1 + Po(c), hence F*(k) = P(Po(c) <= k - 1).
    if law.kind == "irg" and law.weight.kind == "constant":
        mean = law.degree_scale * law.weight.params[0]
        return lambda k: stats.poisson.cdf(np.asarray(k) - 1, mean)
    return None


def limit_tables(law: LimitLaw, mc_samples: int, seed: int, *, use_closed_form: bool = True) -> LimitTables:
    batches = list(_draw(law, seed, "pass1", mc_samples))
    d_o = np.concatenate([b[0] for b in batches])
    d_v = np.concatenate([b[1] for b in batches])
    return LimitTables(d_o, d_v, _closed_form_F_star(law) if use_closed_form else None)


# -- Monte Carlo limits ----------------------------------------------------------

_MOMENT_ORDER = {"spearman": 1, "kendall": 1, "annr": 1, "annd_mc": 2}


def _transform_array(func: Callable[[int], float], values: np.ndarray) -> np.ndarray:
    uniq, inv = np.unique(values, return_inverse=True)
    return np.array([float(func(int(v))) for v in uniq])[inv]


def limit_metric(law: LimitLaw, which: str, mc_samples: int = 10**6, seed: int = 0, *,
                 k: int | None = None, g: Transform = "identity") -> LimitValue:
    """Monte Carlo limit of ``which`` in {spearman, kendall, ddist, annr, annd_mc}.

    ``annr`` and ``annd_mc`` condition on ``d_o = k`` by rejection and raise
    :class:`InsufficientConditioning` if fewer than 1000 second-pass draws hit.
    """
    if which == "degree_distance":
        which = "ddist"
    if which in ("annr", "annd_mc"):
        if k is None:
            raise ValueError(f"{which} needs a degree k")
    if which == "ddist":
        name, func = resolve_transform(g)
        law.require_root_moment(2 if name == "identity" else 1)
    elif which in _MOMENT_ORDER:
        law.require_root_moment(_MOMENT_ORDER[which])
    else:
        raise ValueError(f"unknown limit metric {which!r}")

    tables = limit_tables(law, mc_samples, seed) if which in ("spearman", "kendall", "annr") else None
    num, den = [], []
    for d_o, d_v in _draw(law, seed, "pass2", mc_samples):
        if which in ("annr", "annd_mc"):
            sel = d_o == k
            vals = d_v[sel]
            num.append((tables.F_star(vals) if which == "annr" else vals.astype(float)).sum())
            den.append(sel.sum())
            continue
        has = d_o > 0
        x, y = d_o[has], d_v[has]
        if which == "spearman":
            term = x * tables.F_tied(x) * tables.F_tied(y)
        elif which == "kendall":
            term = x * tables.H_tied(x, y)
        else:
            term = x * np.abs(_transform_array(func, x) - _transform_array(func, y))
        num.append(term.sum())
        den.append(d_o.sum())

    if which in ("annr", "annd_mc") and sum(den) < MIN_CONDITIONAL_DRAWS:
        raise InsufficientConditioning(
            f"only {int(sum(den))} of {mc_samples} draws had d_o = {k}; need {MIN_CONDITIONAL_DRAWS}")
    est, se = _ratio(np.array(num), np.array(den))
    if which == "spearman":
        return LimitValue(3 * est - 3, 3 * se, "monte_carlo")
    if which == "kendall":
        return LimitValue(est - 1, se, "monte_carlo")
    return LimitValue(est, se, "monte_carlo")


def evaluate_limit(law: LimitLaw, metric: str, *, k: int | None = None, g: Transform = "identity",
                   mc_samples: int = 10**6, seed: int = 0) -> LimitValue:
    """Dispatch by metric name as used on the command line and in experiments."""
    if metric == "pearson":
        return limit_pearson(law, mc_samples, seed)
    if metric == "annd":
        if k is None:
            raise ValueError("annd needs a degree k")
        return LimitValue(limit_annd(law, k), 0.0, "closed_form")
    return limit_metric(law, metric, mc_samples, seed, k=k, g=g)
