import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import stats

from sevbayes.random_fields import (
    FixedCoefficients,
    GaussianDraw,
    RngPolicy,
    draw_truth,
    expected_squared_norm,
    synthesize_data,
    truth_from_csv,
)
from sevbayes.spectral_model import (
    ModelParams,
    SpaceTag,
    ValidationError,
    build_exponential_problem,
    sobolev_norm,
)


def test_fixed_truth_passes_through():
    e1 = (1.0, 0.0, 0.0, 0.0)
    u = draw_truth(FixedCoefficients(e1), 4, RngPolicy(1))
    assert tuple(u.coeffs) == e1
    assert u.space_tag is SpaceTag.TRUTH
    with pytest.raises(ValidationError):
        draw_truth(FixedCoefficients(e1), 5, RngPolicy(1))


def test_truth_from_csv(tmp_path):
    (tmp_path / "u.csv").write_text("1.5\n-2\n0.25\n")
    u = draw_truth(truth_from_csv(tmp_path / "u.csv"), 3, RngPolicy())
    assert list(u.coeffs) == [1.5, -2.0, 0.25]


def test_gaussian_truth_is_deterministic():
    spec = GaussianDraw(1.0)
    a = draw_truth(spec, 100, RngPolicy(42)).coeffs
    b = draw_truth(spec, 100, RngPolicy(42)).coeffs
    c = draw_truth(spec, 100, RngPolicy(43)).coeffs
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gaussian_truth_second_moment():
    spec = GaussianDraw(1.0)
    exact = expected_squared_norm(spec, 100)
    sq = np.array([np.sum(draw_truth(GaussianDraw(1.0, seed_id=i), 100, RngPolicy(5)).coeffs ** 2)
                   for i in range(10_000)])
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert abs(sq.mean() - exact) < 3 * se


def test_gaussian_truth_in_h_gamma():
    for seed in range(100):
        u = draw_truth(GaussianDraw(1.0), 2000, RngPolicy(seed)).coeffs
        assert math.isfinite(sobolev_norm(u, 1.0))


def test_gaussian_draw_needs_positive_epsilon():
    with pytest.raises(ValidationError):
        GaussianDraw(1.0, epsilon=0.0)


def test_substreams_independent_of_order_and_threads():
    rng = RngPolicy(2024)
    ids = [(row, r) for row in range(4) for r in range(8)]
    serial = [rng.substream("noise", *i).standard_normal(16) for i in ids]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda i: rng.substream("noise", *i).standard_normal(16), reversed(ids)))
    for s, p in zip(serial, reversed(parallel)):
        np.testing.assert_array_equal(s, p)
    assert not np.array_equal(rng.substream("noise", 0, 1).standard_normal(4),
                              rng.substream("truth", 0, 1).standard_normal(4))
    assert not np.array_equal(rng.substream("noise", 1).standard_normal(4),
                              rng.substream("noise", 0, 1).standard_normal(4))


def test_seed_range():
    RngPolicy(2**64 - 1)
    with pytest.raises(ValidationError):
        RngPolicy(-1)
    with pytest.raises(ValidationError):
        RngPolicy(2**64)


def test_noiseless_data():
    p = build_exponential_problem(ModelParams(j_max=20))
    u = np.linspace(1, 2, 20)
    d = synthesize_data(p, u, noiseless=True)
    np.testing.assert_array_equal(d.coeffs, p.l * u)
    assert d.space_tag is SpaceTag.DATA


def test_data_moments():
    prm = ModelParams(beta=1.0, n=4.0, j_max=3)
    p = build_exponential_problem(prm)
    u = np.array([2.0, 1.0, 0.5])
    rng = RngPolicy(11)
    d1 = np.array([synthesize_data(p, u, rng, r).coeffs[1] for r in range(100_000)])
    mean, var = p.l[1] * u[1], p.c1[1] / prm.n
    assert abs(d1.mean() - mean) < 3 * math.sqrt(var / d1.size)
    # standard error of the sample variance for a Gaussian is var sqrt(2/(N-1))
    assert abs(d1.var(ddof=1) - var) < 3 * var * math.sqrt(2 / (d1.size - 1))


def test_white_noise_is_standard_normal():
    p = build_exponential_problem(ModelParams(beta=0.0, n=1.0, j_max=5))
    u = np.ones(5)
    rng = RngPolicy(99)
    resid = np.array([synthesize_data(p, u, rng, r).coeffs - p.l * u for r in range(10_000)])
    assert stats.kstest(resid[:, 0], "norm").pvalue > 0.01
    # i.i.d. across modes as well
    assert stats.kstest(resid.ravel(), "norm").pvalue > 0.01


def test_data_length_checked():
    p = build_exponential_problem(ModelParams(j_max=4))
    with pytest.raises(ValidationError):
        synthesize_data(p, np.ones(3), RngPolicy(), 0)
    with pytest.raises(ValidationError):
        synthesize_data(p, np.ones(4))
