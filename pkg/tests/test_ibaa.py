import numpy as np
import pytest

from ratelens.apoptosis import ApoptosisModel, exp_source, hamming_like, rectified_squared
from ratelens.blahut import BaaConfig, baa_solve, tilt
from ratelens.errors import ZeroProbability
from ratelens.ibaa import (
    estimate_distortion,
    ibaa_from_counts,
    roundtrip_validate,
    tilde_distortion,
)
from ratelens.probcore import (
    CountMatrix,
    DistortionMatrix,
    Pmf,
    Strategy,
    joint_from_strategy,
)

# -ln(1.6), 30-digit mpmath evaluation
NEG_LN_1_6 = -0.470003629245735553650937031148


def random_problem(seed, nx=5, ny=4):
    rng = np.random.default_rng(seed)
    p_x = Pmf.from_weights(rng.random(nx) + 0.05)
    v = rng.random((nx, ny)) * 3
    v -= v.min(axis=1, keepdims=True)
    return p_x, DistortionMatrix(v)


def test_tilde_examples():
    t = tilde_distortion(Strategy([[0.8, 0.2], [0.2, 0.8]]), Pmf([0.5, 0.5]))
    assert t[0, 0] == pytest.approx(NEG_LN_1_6, abs=1e-15)
    assert np.allclose(tilde_distortion(Strategy([[0.3, 0.7]] * 3), Pmf([0.3, 0.7])), 0)


def test_zero_probability():
    with pytest.raises(ZeroProbability):
        tilde_distortion(Strategy([[1.0, 0.0], [0.5, 0.5]]), Pmf([0.75, 0.25]))
    with pytest.raises(ZeroProbability):
        tilde_distortion(Strategy([[0.5, 0.5]]), Pmf([1.0, 0.0]))


def test_independent_strategy_gives_zero_distortion():
    res = estimate_distortion(Strategy([[0.25, 0.75]] * 2), Pmf([0.25, 0.75]))
    assert np.all(res.distortion.values == 0)
    assert res.lambda_assumed == 1.0


def test_all_zero_counts():
    res = ibaa_from_counts(CountMatrix(np.zeros((3, 4))))
    assert np.all(res.distortion.values == 0)
    assert list(res.row_counts) == [0, 0, 0]


def test_single_input_row():
    res = ibaa_from_counts(CountMatrix([[5, 0, 12]]))
    assert np.allclose(res.distortion.values, 0, atol=1e-15)


def test_sidecar_fields():
    side = ibaa_from_counts(CountMatrix([[4, 1], [0, 7]])).sidecar()
    assert set(side) == {"lambda_assumed", "max_tilde", "min_tilde", "row_counts"}
    assert side["row_counts"] == [5, 7]


@pytest.mark.parametrize(
    "make_d, lam",
    [(hamming_like, 3.44), (rectified_squared, 1.2), (hamming_like, 4.6), (rectified_squared, 2.93)],
)
def test_apoptosis_roundtrip(make_d, lam):
    m = ApoptosisModel()
    rep = roundtrip_validate(exp_source(m), make_d(m), lam)
    assert rep.max_abs_error <= 1e-6
    if rep.support.all():
        assert rep.recovered_scale == pytest.approx(lam, rel=1e-6)


def test_roundtrip_lambda_zero():
    p_x, d = random_problem(0)
    rep = roundtrip_validate(p_x, d, 0.0)
    assert np.all(rep.estimated == 0)
    assert rep.recovered_scale == 0.0


@pytest.mark.parametrize("seed", range(100))
def test_exact_recovery_property(seed):
    p_x, d = random_problem(seed)
    lam = 0.2 + 4.8 * np.random.default_rng(1000 + seed).random()
    rep = roundtrip_validate(p_x, d, lam, tol=1e-12)
    assert rep.max_abs_error <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_strategy_reconstruction(seed):
    p_x, d = random_problem(seed)
    res = baa_solve(p_x, d, BaaConfig(2.2, tol=1e-12))
    est = estimate_distortion(res.strategy, res.output_dist)
    again = tilt(res.output_dist.probs, est.distortion.values, 1.0)
    assert np.max(np.abs(again - res.strategy.rows)) <= 1e-10
    assert np.all(est.distortion.values.min(axis=1) == 0)


def test_offset_insensitivity():
    p_x, d = random_problem(3)
    shifted = DistortionMatrix(d.values + np.array([0.0, 1.0, 4.0, 0.3, 2.0])[:, None])
    r1 = baa_solve(p_x, d, BaaConfig(1.5, tol=1e-13))
    r2 = baa_solve(p_x, shifted, BaaConfig(1.5, tol=1e-13))
    e1 = estimate_distortion(r1.strategy, r1.output_dist).distortion.values
    e2 = estimate_distortion(r2.strategy, r2.output_dist).distortion.values
    assert np.max(np.abs(e1 - e2)) <= 1e-9


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_scale_covariance(a):
    p_x, d = random_problem(4)
    r1 = baa_solve(p_x, d, BaaConfig(1.8, tol=1e-13))
    r2 = baa_solve(p_x, d.scaled(a), BaaConfig(1.8 / a, tol=1e-13))
    e1 = estimate_distortion(r1.strategy, r1.output_dist).distortion.values
    e2 = estimate_distortion(r2.strategy, r2.output_dist).distortion.values
    assert np.max(np.abs(e1 - e2)) <= 1e-9


def test_recovery_from_sampled_counts():
    # Small threshold model so that lambda = 2 is away from the zero-rate regime.
    m = ApoptosisModel(gamma=0.5, unit_scale=10, x_max=20, x_th=10)
    p_x, d = exp_source(m), hamming_like(m)
    res = baa_solve(p_x, d, BaaConfig(2.0, tol=1e-12))
    joint = joint_from_strategy(p_x, res.strategy).probs
    counts = np.random.default_rng(12).multinomial(10**7, joint.ravel()).reshape(joint.shape)
    est = ibaa_from_counts(CountMatrix(counts)).distortion.values
    assert np.max(np.abs(est - 2 * d.values)) <= 0.02


def test_non_optimal_strategy_still_produces_matrix():
    est = ibaa_from_counts(CountMatrix([[10, 0, 3], [1, 1, 1], [0, 50, 2]])).distortion.values
    assert np.all(np.isfinite(est)) and np.all(est.min(axis=1) == 0)
