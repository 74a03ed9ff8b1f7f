import math

import numpy as np
import pytest
from scipy import stats

from degcorr import InfiniteMoment, RadiusTooLarge, RggParams, WeightLaw, sample_irg, sample_rgg, weight_moments
from degcorr.graph import write_edge_list
from degcorr.models import _grid_pairs, torus_distance
from degcorr.oracles import moment_quadrature
from degcorr.rng import mix, stream


def _chi2_pvalue(observed_degrees, pmf, min_expected=5.0):
    """Chi-square goodness of fit of a degree sample to ``pmf(k)``, pooling sparse bins."""
    n = len(observed_degrees)
    kmax = int(observed_degrees.max()) + 1
    ks = np.arange(kmax + 1)
    expected = n * pmf(ks)
    expected[-1] += n - expected.sum()  # upper tail
    obs = np.bincount(observed_degrees, minlength=kmax + 1).astype(float)
    # pool adjacent bins until each has enough expected mass
    eo, ee, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(obs, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            eo.append(acc_o)
            ee.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e:
        eo[-1] += acc_o
        ee[-1] += acc_e
    return stats.chisquare(eo, ee).pvalue


# -- weight laws ------------------------------------------------------------------

@pytest.mark.parametrize("text", ["const:2", "exp:1", "pareto:3:1", "gamma:2:0.5", "discrete:1,4:0.25,0.75"])
def test_parse_roundtrip(text):
    w = WeightLaw.parse(text)
    assert WeightLaw.parse(str(w)) == w


@pytest.mark.parametrize("text", ["", "const", "exp:-1", "pareto:0", "discrete:1,2:0.5", "weird:1"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        WeightLaw.parse(text)


@pytest.mark.parametrize("law,expected", [
    (WeightLaw.constant(2), (2, 4)),
    (WeightLaw.exponential(1), (1, 2)),
    (WeightLaw.pareto(3, 1), (1.5, 3)),
])
def test_weight_moments(law, expected):
    assert weight_moments(law) == pytest.approx(expected, rel=1e-12)
    assert (moment_quadrature(law, 1), moment_quadrature(law, 2)) == pytest.approx(expected, rel=1e-8)


def test_pareto_infinite_moment():
    w = WeightLaw.pareto(2.5, 1)
    assert w.moment(2) == pytest.approx(5)
    with pytest.raises(InfiniteMoment):
        w.moment(3)
    assert moment_quadrature(w, 3) == math.inf
    with pytest.raises(InfiniteMoment):
        WeightLaw.pareto(0.9).size_biased()


@pytest.mark.parametrize("law", [
    WeightLaw.exponential(1.5),
    WeightLaw.pareto(3, 1),
    WeightLaw.gamma(2.5, 2.0),
    WeightLaw.finite_discrete([0.5, 1, 3], [0.2, 0.5, 0.3]),
])
def test_size_biased_law_matches_rejection_oracle(law):
    # Accept W with probability W / M; the accepted values follow the size-biased law (up to tail mass above M).
    rng = stream(5, "size-bias", str(law))
    cap = 200.0
    draws = law.sample(rng, 4_000_000)
    accepted = draws[rng.random(len(draws)) * cap < np.minimum(draws, cap)]
    direct = law.size_biased().sample(stream(6, "size-bias", str(law)), len(accepted))
    assert len(accepted) > 10_000
    if law.kind == "finite_discrete":
        vals = np.array(law.params[0])
        obs = np.array([(accepted == v).sum() for v in vals])
        probs = np.array(law.size_biased().params[1])
        assert stats.chisquare(obs, probs * len(accepted)).pvalue > 1e-3
    else:
        assert stats.ks_2samp(accepted, direct).pvalue > 1e-3


def test_size_biased_closed_forms():
    assert WeightLaw.constant(3).size_biased() == WeightLaw.constant(3)
    assert WeightLaw.exponential(2).size_biased() == WeightLaw.gamma(2, 2)
    assert WeightLaw.pareto(3, 1).size_biased() == WeightLaw.pareto(2, 1)
    sb = WeightLaw.finite_discrete([1, 3], [0.5, 0.5]).size_biased()
    assert sb.params[1] == pytest.approx((0.25, 0.75))


# -- IRG ------------------------------------------------------------------------

def test_irg_trivial_cases():
    assert sample_irg(1, WeightLaw.exponential(1), 0).graph.edge_count == 0
    assert sample_irg(500, WeightLaw.constant(0), 0).graph.edge_count == 0


def test_irg_deterministic(tmp_path):
    a = sample_irg(3000, WeightLaw.pareto(2.5), 42)
    b = sample_irg(3000, WeightLaw.pareto(2.5), 42)
    assert a.graph == b.graph
    write_edge_list(a.graph, tmp_path / "a")
    write_edge_list(b.graph, tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert sample_irg(3000, WeightLaw.pareto(2.5), 43).graph != a.graph


def test_irg_mean_degree_example():
    n = 20_000
    means = [sample_irg(n, WeightLaw.constant(2), mix(1, s)).graph.degree.mean() for s in range(10)]
    assert abs(np.mean(means) - 4 * (n - 1) / n) < 0.1


def test_irg_total_weight_normalization_mean_degree():
    n = 20_000
    means = [sample_irg(n, WeightLaw.constant(2), mix(2, s), normalization="total_weight").graph.degree.mean()
             for s in range(10)]
    assert abs(np.mean(means) - 2 * (n - 1) / n) < 0.05


def test_irg_unknown_normalization():
    with pytest.raises(ValueError):
        sample_irg(10, WeightLaw.constant(1), 0, normalization="sqrt")


@pytest.mark.parametrize("law", [WeightLaw.constant(2), WeightLaw.exponential(0.5), WeightLaw.pareto(2.2, 1)])
def test_irg_skip_sampler_matches_pair_probabilities(law, monkeypatch):
    # Force both code paths at the same n and compare the number of edges per weight class.
    n = 1500
    import degcorr.models as models

    def edge_stats(threshold):
        monkeypatch.setattr(models, "PAIR_SCAN_MAX_N", threshold)
        counts = []
        for s in range(20):
            sg = sample_irg(n, law, mix(3, s))
            counts.append(sg.graph.edge_count)
        return np.array(counts)

    scan, skip = edge_stats(10**9), edge_stats(0)
    assert stats.ttest_ind(scan, skip).pvalue > 1e-3


def test_irg_skip_sampler_edge_marginals():
    # For fixed weights the skip sampler must give P(ij) = min(w_i w_j / n, 1); check by pooling pairs by weight class.
    import degcorr.models as models

    w = np.repeat([0.5, 2.0, 40.0], [200, 200, 10]).astype(float)
    n = len(w)
    hits = np.zeros((3, 3))
    reps = 300
    cls = np.repeat([0, 1, 2], [200, 200, 10])
    for s in range(reps):
        e = models._irg_skip(w, float(n), stream(4, s))
        np.add.at(hits, (cls[e[:, 0]], cls[e[:, 1]]), 1)
        np.add.at(hits, (cls[e[:, 1]], cls[e[:, 0]]), 1)
    sizes = np.array([200, 200, 10])
    pairs = np.outer(sizes, sizes) - np.diag(sizes)
    vals = np.array([0.5, 2.0, 40.0])
    p = np.minimum(np.outer(vals, vals) / n, 1)
    # hits counts ordered class pairs, so a within-class edge lands twice on the diagonal
    expected = pairs * p * reps
    se = np.sqrt(expected * (1 - p) * np.where(np.eye(3, dtype=bool), 2, 1))
    z = np.abs(hits - expected) / np.maximum(se, 1e-9)
    assert z.max() < 4.5, z


def test_irg_degree_law_fits_binomial():
    n, c = 10_000, 2.0
    p = c * c / n
    # total variation between Bin(n-1, c^2/n) and Po(c^2)
    ks = np.arange(0, 60)
    tv = 0.5 * np.abs(stats.binom.pmf(ks, n - 1, p) - stats.poisson.pmf(ks, c * c)).sum()
    assert tv < 0.01
    passes = sum(
        _chi2_pvalue(sample_irg(n, WeightLaw.constant(c), mix(5, s)).graph.degree, lambda k: stats.binom.pmf(k, n - 1, p))
        > 0.01 for s in range(10))
    assert passes >= 6


# -- RGG ------------------------------------------------------------------------

def test_rgg_params_validation():
    with pytest.raises(ValueError):
        RggParams(0, 1)
    with pytest.raises(ValueError):
        RggParams(2, -1)
    with pytest.raises(ValueError):
        RggParams(2, 1, 0)
    with pytest.raises(RadiusTooLarge):
        sample_rgg(16, RggParams(2, 2.0), 0)


def test_torus_distance_properties():
    rng = stream(0, "torus")
    side = 7.0
    a = (rng.random((1000, 3)) - 0.5) * side
    b = (rng.random((1000, 3)) - 0.5) * side
    d = torus_distance(a, b, side)
    assert np.allclose(d, torus_distance(b, a, side))
    assert d.max() <= side * math.sqrt(3) / 2 + 1e-12
    shift = (rng.random(3) - 0.5) * side
    wrap = lambda x: (x + side / 2) % side - side / 2  # noqa: E731
    assert np.allclose(d, torus_distance(wrap(a + shift), wrap(b + shift), side))


@pytest.mark.parametrize("d,radius", [(1, 2.0), (2, 1.3), (3, 1.1)])
def test_grid_search_matches_brute_force(d, radius):
    n = 1500
    side = n ** (1 / d)
    pos = (stream(d, "grid").random((n, d)) - 0.5) * side
    got = {tuple(e) for e in _grid_pairs(pos, side, radius).tolist()}
    i, j = np.triu_indices(n, 1)
    close = torus_distance(pos[i], pos[j], side) <= radius
    assert got == set(zip(i[close].tolist(), j[close].tolist()))


@pytest.mark.parametrize("d,radius", [(1, 2.0), (2, 1.0), (3, 0.9)])
def test_rgg_translation_invariance(d, radius):
    n = 3000
    side = n ** (1 / d)
    pos = (stream(7, "shift").random((n, d)) - 0.5) * side
    base = _grid_pairs(pos, side, radius)
    shift = (stream(8, "shift").random(d) - 0.5) * side
    moved = (pos + shift + side / 2) % side - side / 2
    assert np.array_equal(_grid_pairs(moved, side, radius), base)


def test_rgg_small_radius_many_cells_and_tight_fit():
    # 2R just below the side: only the three-cell-wide grid is possible
    g = sample_rgg(9, RggParams(2, 1.49), 1).graph
    assert g.node_count == 9


def test_rgg_thinning_is_a_subset():
    params = RggParams(2, 1.2, 1.0)
    full = {tuple(e) for e in sample_rgg(5000, params, 9).graph.edges.tolist()}
    for p in (0.8, 0.5, 0.1):
        thin = {tuple(e) for e in sample_rgg(5000, RggParams(2, 1.2, p), 9).graph.edges.tolist()}
        assert thin <= full
        assert abs(len(thin) / len(full) - p) < 0.03
    positions = [sample_rgg(5000, RggParams(2, 1.2, p), 9).positions for p in (1.0, 0.3)]
    assert np.array_equal(*positions)


def test_rgg_deterministic():
    a = sample_rgg(4000, RggParams(3, 0.8, 0.7), 11)
    b = sample_rgg(4000, RggParams(3, 0.8, 0.7), 11)
    assert a.graph == b.graph and np.array_equal(a.positions, b.positions)
    assert np.all(np.abs(a.positions) <= 4000 ** (1 / 3) / 2)


@pytest.mark.parametrize("d,radius,p,target,tol", [
    (1, 2.0, 1.0, 4.0, 0.15),
    (2, 1.5957, 0.5, 4.0, 0.2),
])
def test_rgg_mean_degree_examples(d, radius, p, target, tol):
    n = 10_000
    means = [sample_rgg(n, RggParams(d, radius, p), mix(12, s)).graph.degree.mean() for s in range(10)]
    assert abs(np.mean(means) - target * (n - 1) / n) < tol


@pytest.mark.parametrize("d,radius,p", [(1, 2.0, 1.0), (2, 1.0, 0.6)])
def test_rgg_degree_law_fits_poisson(d, radius, p):
    n = 10_000
    mean = p * math.pi ** (d / 2) / math.gamma(1 + d / 2) * radius ** d
    passes = sum(_chi2_pvalue(sample_rgg(n, RggParams(d, radius, p), mix(13, s)).graph.degree,
                              lambda k: stats.poisson.pmf(k, mean)) > 0.01 for s in range(10))
    assert passes >= 6


@pytest.mark.parametrize("d,radius,p", [(1, 2.0, 1.0), (2, 1.0, 0.6), (3, 0.8, 0.9)])
def test_rgg_single_vertex_degree_law(d, radius, p):
    # One vertex per independent graph, so the chi-square independence assumption holds.
    n = 2000
    mean = p * math.pi ** (d / 2) / math.gamma(1 + d / 2) * radius ** d
    deg0 = np.array([sample_rgg(n, RggParams(d, radius, p), mix(99, d, s)).graph.degree[0] for s in range(3000)])
    assert _chi2_pvalue(deg0, lambda k: stats.binom.pmf(k, n - 1, mean / n)) > 0.01
