import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from epfamily import (
    EPFamily,
    Exponential,
    Weibull,
    density_at_zero,
    eep,
    ewp,
    log_norm_const,
    norm_const,
    q_transform,
    sample_latent,
    sample_ztp,
)
from epfamily.family import DomainError, _log_ratio, _log_ratio_scalar, ztp_pmf

from conftest import interior_grid

lams = st.one_of(
    st.floats(-50, -1e-6), st.floats(1e-6, 50), st.sampled_from([-700.0, 700.0, 1e-9])
)
probs = st.floats(0.0, 1.0)


# -- normalising constant ---------------------------------------------------

# high-precision reference values (mpmath, 30 digits)
@pytest.mark.parametrize(
    "lam, expected",
    [(1.0, 1.5819767068693264), (-1.0, 0.58197670686932642), (1e-9, 1.0), (-1e-9, 1.0)],
)
def test_norm_const_values(lam, expected):
    assert norm_const(lam) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("lam", [-700.0, -30.0, -1e-3, 1e-3, 30.0, 700.0])
def test_log_norm_const_finite_at_extremes(lam):
    v = log_norm_const(lam)
    assert np.isfinite(v)
    if abs(lam) < 30:
        assert v == pytest.approx(math.log(lam / -math.expm1(-lam)), rel=1e-12)


def test_non_finite_lambda_rejected():
    for bad in (math.nan, math.inf, -math.inf, 701.0):
        with pytest.raises(DomainError):
            norm_const(bad)
        with pytest.raises(DomainError):
            eep(bad, 1.0)


@given(st.floats(-700, 700))
def test_log_ratio_vector_matches_scalar(x):
    assert _log_ratio(np.array([x]))[0] == pytest.approx(_log_ratio_scalar(x), rel=1e-12, abs=1e-14)


@given(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-12))
def test_log_ratio_against_direct_formula(x):
    direct = math.log(-math.expm1(-x) / x)
    assert _log_ratio_scalar(x) == pytest.approx(direct, rel=1e-10, abs=1e-13)


# -- cdf / pdf / survival / hazard -------------------------------------------

def test_cdf_at_baseline_median():
    m = eep(2.0, 1.0)
    assert m.cdf(math.log(2.0)) == pytest.approx(0.26894142136999512, rel=1e-13)


def test_eep_pdf_closed_form_point():
    assert eep(2.0, 3.0).pdf(0.5) == pytest.approx(0.99095377236736798, rel=1e-13)


@pytest.mark.parametrize("lam", [-5.0, -0.3, 0.7, 4.0])
def test_eep_pdf_matches_closed_form(lam):
    beta = 1.7
    t = np.linspace(0.0, 4.0, 60)
    closed = lam * beta * np.exp(-beta * t - lam * np.exp(-beta * t)) / (1 - np.exp(-lam))
    np.testing.assert_allclose(eep(lam, beta).pdf(t), closed, rtol=1e-12)


def test_pdf_is_derivative_of_cdf(model):
    t = interior_grid(model, 25, 0.05, 0.95)
    h = 1e-6 * np.maximum(1.0, np.abs(t))
    num = (model.cdf(t + h) - model.cdf(t - h)) / (2 * h)
    np.testing.assert_allclose(num, model.pdf(t), rtol=1e-6)


def test_boundaries(model):
    lo, hi = model.support
    if np.isfinite(lo):
        assert model.cdf(lo) == 0.0
        assert model.sf(lo) == 1.0
    assert model.cdf(model.ppf(1 - 1e-15)) == pytest.approx(1.0, abs=1e-13)


def test_survival_and_hazard_identities(model):
    t = interior_grid(model, 101, 1e-3, 1 - 1e-3)
    G, S, g, h = model.cdf(t), model.sf(t), model.pdf(t), model.hazard(t)
    np.testing.assert_allclose(S, 1 - G, rtol=1e-10, atol=1e-15)
    np.testing.assert_allclose(h, g / S, rtol=1e-10)
    np.testing.assert_allclose(model.logpdf(t), np.log(g), rtol=1e-12)


@pytest.mark.parametrize("lam", [-3.0, 2.5])
def test_hazard_closed_form(lam):
    beta = 0.8
    m = ewp(lam, beta, 1.4)
    t = np.linspace(0.05, 3, 40)
    f = m.baseline.pdf(t)
    Fbar = m.baseline.sf(t)
    np.testing.assert_allclose(m.hazard(t), lam * f / np.expm1(lam * Fbar), rtol=1e-11)


def test_hazard_undefined_where_survival_zero():
    from epfamily import egevp

    m = egevp(1.0, 0.0, 1.0, -0.5)  # finite upper endpoint at 2
    with pytest.raises(DomainError):
        m.hazard(m.support[1])


def test_outside_support_raises():
    m = eep(1.0, 1.0)
    for fn in (m.pdf, m.cdf, m.sf, m.hazard, m.logpdf):
        with pytest.raises(DomainError):
            fn(-0.1)


@pytest.mark.parametrize("lam", [-700.0, -200.0, 200.0, 700.0])
def test_extreme_lambda_no_overflow(lam):
    m = eep(lam, 1.0)
    p = np.array([1e-6, 0.01, 0.5, 0.99, 1 - 1e-6])
    t = m.ppf(p)
    assert np.all(np.isfinite(t))
    assert np.all(np.isfinite(m.logpdf(t)))
    np.testing.assert_allclose(m.cdf(t), p, rtol=1e-6)


@pytest.mark.parametrize("lam", [-1e-6, 1e-6])
def test_lambda_continuity(lam):
    base = Weibull(1.3, 0.8)
    m = EPFamily(base, lam)
    t = np.linspace(0, 10, 200)
    assert np.max(np.abs(m.cdf(t) - base.cdf(t))) < 1e-5


def test_below_threshold_is_exact_baseline():
    base = Weibull(1.3, 0.8)
    m = EPFamily(base, 5e-9)
    t = np.linspace(0.1, 5, 30)
    np.testing.assert_array_equal(m.pdf(t), base.pdf(t))
    np.testing.assert_array_equal(m.ppf([0.2, 0.7]), base.ppf([0.2, 0.7]))


def test_monotone_in_lambda():
    lam_grid = np.array([-20, -5, -1, -0.1, -1e-9, 0.1, 1, 5, 20])
    t = np.linspace(0.01, 5, 50)
    cdfs = np.array([eep(l, 1.0).cdf(t) for l in lam_grid])
    assert np.all(np.diff(cdfs, axis=0) <= 1e-15)


@pytest.mark.parametrize("lam", [-5.0, -1.0, -0.1, 0.1, 1.0, 5.0])
@pytest.mark.parametrize("make", [lambda l: eep(l, 2.0), lambda l: ewp(l, 0.5, 1.7)])
def test_density_integrates_to_one(lam, make):
    m = make(lam)
    total, _ = integrate.quad(m.pdf, 0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


# -- unification with the minimum construction --------------------------------

@pytest.mark.parametrize("phi", [5.0, 1.0, 0.1])
def test_min_form_density_equals_family_density(phi):
    base = Weibull(0.7, 1.6)
    t = np.linspace(0.01, 4, 100)
    F, f = base.cdf(t), base.pdf(t)
    min_form = phi / (1 - math.exp(-phi)) * f * np.exp(-phi * F)
    np.testing.assert_allclose(EPFamily(base, -phi).pdf(t), min_form, rtol=1e-12)


# -- quantile transform and quantiles ---------------------------------------

def test_q_transform_values():
    assert q_transform(0.5, 1.0) == pytest.approx(0.62011450695827752, rel=1e-14)
    assert q_transform(0.3, 1e-10) == 0.3


@given(lams)
def test_q_transform_endpoints(lam):
    assert q_transform(0.0, lam) == 0.0
    assert q_transform(1.0, lam) == pytest.approx(1.0, abs=1e-15)


@given(probs, lams)
def test_q_transform_in_unit_interval(p, lam):
    q = q_transform(p, lam)
    assert 0.0 <= q <= 1.0


def test_q_transform_rejects_bad_probability():
    with pytest.raises(DomainError):
        q_transform(1.5, 1.0)
    with pytest.raises(DomainError):
        q_transform(-0.1, 1.0)


@pytest.mark.parametrize("lam", [-4.0, 0.5, 3.0])
def test_eep_ewp_quantile_closed_forms(lam):
    p = np.array([0.1, 0.5, 0.9])
    q = q_transform(p, lam)
    np.testing.assert_allclose(eep(lam, 2.0).ppf(p), -np.log1p(-q) / 2.0, rtol=1e-12)
    np.testing.assert_allclose(
        ewp(lam, 2.0, 0.6).ppf(p), (-np.log1p(-q) / 2.0) ** (1 / 0.6), rtol=1e-12
    )


def test_quantile_roundtrip(model):
    p = np.array([1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.9999])
    assert np.max(np.abs(model.cdf(model.ppf(p)) - p)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 1 - 1e-4), st.floats(-30, 30).filter(lambda x: abs(x) > 1e-6),
       st.floats(0.05, 5), st.floats(0.3, 3))
def test_quantile_roundtrip_property(p, lam, beta, alpha):
    m = ewp(lam, beta, alpha)
    assert abs(m.cdf(m.ppf(p)) - p) < 1e-9


def test_ppf_boundaries():
    m = eep(1.0, 1.0)
    assert m.ppf(0.0) == 0.0
    with pytest.raises(DomainError):
        m.ppf(1.0)
    with pytest.raises(DomainError):
        m.ppf(1.2)


def test_rvs_deterministic_and_distributed():
    m = ewp(-2.0, 1.0, 1.5)
    a, b = m.rvs(5000, seed=11), m.rvs(5000, seed=11)
    np.testing.assert_array_equal(a, b)
    assert stats.kstest(a, m.cdf).pvalue > 0.001


# -- zero-truncated Poisson and latent sampler --------------------------------

@pytest.mark.parametrize("phi", [0.01, 1.0, 7.5, 60.0])
def test_ztp_pmf_sums_to_one(phi):
    n = np.arange(0, 400)
    pmf = ztp_pmf(n, phi)
    assert pmf[0] == 0.0
    assert pmf.sum() == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("phi", [0.2, 3.0, 40.0])
def test_ztp_sampler_matches_pmf(phi):
    x = sample_ztp(phi, size=40000, seed=3)
    assert x.min() >= 1
    assert x.dtype.kind == "i"
    mean = phi / -math.expm1(-phi)
    var = mean * (1 + phi - mean)
    assert abs(x.mean() - mean) < 5 * math.sqrt(var / x.size)


def test_ztp_scalar_and_errors():
    v = sample_ztp(2.0, seed=1)
    assert isinstance(v, int) and v >= 1
    with pytest.raises(DomainError):
        sample_ztp(0.0)
    with pytest.raises(DomainError):
        sample_ztp(-1.0)


@pytest.mark.parametrize("lam", [-2.0, 2.0])
def test_latent_and_inverse_samplers_agree(lam):
    n = 100_000
    m = eep(lam, 1.0)
    latent = sample_latent(m, n, seed=101)
    inverse = m.rvs(n, seed=202)
    ks = stats.ks_2samp(latent, inverse).statistic
    assert ks < 1.628 * math.sqrt(2.0 / n)


def test_latent_rejects_zero_lambda():
    with pytest.raises(DomainError):
        sample_latent(eep(0.0, 1.0), 10)


# -- density at zero -----------------------------------------------------------

def test_density_at_zero_eep():
    m = eep(2.0, 1.0)
    z = density_at_zero(m)
    assert z == pytest.approx(0.3130352854993313, rel=1e-13)
    t = np.array([1e-7, 1e-8, 1e-9])
    np.testing.assert_allclose(m.pdf(t), z, atol=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_density_at_zero_absent_for_weibull(alpha):
    assert density_at_zero(ewp(1.0, 1.0, alpha)) is None


def test_density_at_zero_baseline_limit():
    assert density_at_zero(EPFamily(Exponential(2.5), 0.0)) == pytest.approx(2.5)


@given(st.floats(-50, 50).filter(lambda x: abs(x) > 1e-6), st.floats(0.1, 10))
def test_density_at_zero_equals_pdf_at_zero(lam, beta):
    m = eep(lam, beta)
    assert density_at_zero(m) == pytest.approx(m.pdf(0.0), rel=1e-12)
