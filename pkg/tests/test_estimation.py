import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimrate.core import DomainError
from claimrate.estimation import (
    ClaimRecord,
    FitResult,
    empirical_moments,
    fit_mle,
    fit_moments,
    fit_moments_gamma,
    fit_moments_invgamma,
    log_likelihood,
    make_params,
    moment_fit_standard_errors,
    normalize_family,
    read_records_csv,
    write_records_csv,
)
from claimrate.poisson_gamma import GammaMixParams
from claimrate.poisson_inv_gamma import InvGammaMixParams
from claimrate.simulation import SimConfig, sample_portfolio


def records(counts, exposure=1.0):
    return [ClaimRecord(f"P{i}", exposure, c) for i, c in enumerate(counts)]


@pytest.fixture(scope="module")
def nb_portfolio():
    return sample_portfolio(SimConfig(GammaMixParams(1.0, 1.0), 1.0, 100_000, seed=11))


@pytest.fixture(scope="module")
def pig_portfolio():
    return sample_portfolio(SimConfig(InvGammaMixParams(2.0, 3.0), 1.0, 100_000, seed=12))


class TestRecords:
    def test_validation(self):
        with pytest.raises(DomainError):
            ClaimRecord("a", 0.0, 1)
        with pytest.raises(DomainError):
            ClaimRecord("a", 1.0, -1)
        with pytest.raises(DomainError):
            ClaimRecord("a", 1.0, 1.5)
        assert ClaimRecord(7, 1.0, 2.0).policy_id == "7"

    def test_csv_round_trip(self, tmp_path):
        recs = [ClaimRecord("A1", 0.5, 0), ClaimRecord("B2", 1.25, 3), ClaimRecord("C3", 2.0, 11)]
        text = write_records_csv(recs)
        assert text.splitlines()[0] == "policy_id,exposure_years,claim_count"
        assert read_records_csv(io.StringIO(text)) == recs
        path = tmp_path / "claims.csv"
        assert write_records_csv(recs, path) is None
        assert read_records_csv(path) == recs

    def test_csv_missing_column(self):
        with pytest.raises(DomainError, match="claim_count"):
            read_records_csv(io.StringIO("policy_id,exposure_years\nA,1\n"))

    @pytest.mark.parametrize("alias, canonical", [("NB", "gamma"), ("gamma", "gamma"), ("inv-gamma", "invgamma"),
                                                  ("inverse-gamma", "invgamma"), ("invgamma", "invgamma")])
    def test_family_aliases(self, alias, canonical):
        assert normalize_family(alias) == canonical

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            normalize_family("lognormal")

    def test_make_params(self):
        assert make_params("nb", 2, 3) == GammaMixParams(2, 3)
        assert make_params("inv-gamma", 2, 3) == InvGammaMixParams(2, 3)


class TestEmpiricalMoments:
    def test_example(self):
        em = empirical_moments(records([0, 0, 1, 1]))
        assert (em.mean, em.variance, em.exposure) == (0.5, pytest.approx(1 / 3, rel=1e-15), 1.0)

    def test_all_zero(self):
        with pytest.raises(DomainError, match="variance"):
            empirical_moments(records([0, 0, 0, 0]))

    def test_underdispersed_rejected_when_required(self):
        with pytest.raises(DomainError, match="variance"):
            empirical_moments(records([0, 0, 1, 1]), require_overdispersion=True)

    def test_mixed_exposures(self):
        recs = [ClaimRecord("a", 1.0, 0), ClaimRecord("b", 2.0, 3)]
        with pytest.raises(DomainError, match="maximum likelihood"):
            empirical_moments(recs)

    @pytest.mark.parametrize("bad", [[], [3]])
    def test_too_few(self, bad):
        with pytest.raises(DomainError):
            empirical_moments(records(bad))


class TestMomentFits:
    @pytest.mark.parametrize(
        "mean, var, alpha, beta",
        [(0.001, 0.00101, 0.1, 100.0), (1.0, 2.0, 1.0, 1.0)],
    )
    def test_gamma_examples(self, mean, var, alpha, beta):
        assert fit_moments_gamma(mean, var, 1.0) == GammaMixParams(alpha, beta)

    @pytest.mark.parametrize(
        "mean, var, m, s",
        [(0.001, 0.00101, 0.0011, 2.1), (1.0, 2.0, 2.0, 3.0), (10.0, 20.0, 110.0, 12.0)],
    )
    def test_invgamma_examples_exact(self, mean, var, m, s):
        p = fit_moments_invgamma(mean, var, 1.0)
        assert (p.m, p.s) == (m, s)

    @pytest.mark.parametrize("fit", [fit_moments_gamma, fit_moments_invgamma])
    @pytest.mark.parametrize("mean, var", [(0.5, 0.5), (1.0, 0.9), (0.0, 1.0), (1.0, math.inf)])
    def test_no_overdispersion(self, fit, mean, var):
        with pytest.raises(DomainError):
            fit(mean, var, 1.0)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(1e-4, 1e3), st.floats(1e-3, 1e3), st.floats(0.1, 10.0))
    def test_round_trip(self, mean, ratio, exposure):
        var = mean * (1.0 + ratio)
        got = fit_moments_gamma(mean, var, exposure).moments(exposure)
        assert got.mean == pytest.approx(mean, rel=1e-12)
        assert got.variance == pytest.approx(var, rel=1e-12)

        p = fit_moments_invgamma(mean, var, exposure)
        got = p.moments(exposure)
        # a stored s near 2 fixes s - 2 only to ulp(s) / (s - 2) relative
        representable = 2 * math.ulp(p.s) / (p.s - 2.0)
        assert got.mean == pytest.approx(mean, rel=1e-12)
        assert got.variance == pytest.approx(var, rel=max(1e-12, representable))

    def test_invgamma_shape_above_two(self):
        assert fit_moments_invgamma(1.0, 1e9, 1.0).s > 2

    def test_from_records(self):
        recs = records([0, 0, 0, 1, 3])
        em = empirical_moments(recs)
        assert fit_moments("nb", recs) == fit_moments_gamma(em.mean, em.variance, 1.0)
        assert fit_moments("invgamma", recs) == fit_moments_invgamma(em.mean, em.variance, 1.0)


class TestMle:
    def test_dominates_moment_fit(self):
        recs = records([0] * 50 + [1] * 20 + [2] * 8 + [3] * 3 + [7, 12])
        for family in ("gamma", "invgamma"):
            mle = fit_mle(family, recs)
            assert isinstance(mle, FitResult) and mle.method == "mle" and mle.converged
            assert mle.log_likelihood >= log_likelihood(fit_moments(family, recs), recs)
            assert mle.log_likelihood == pytest.approx(log_likelihood(mle.params, recs), rel=1e-14)

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.integers(0, 6), min_size=20, max_size=60), st.sampled_from(["gamma", "invgamma"]))
    def test_dominance_property(self, counts, family):
        recs = records(counts)
        try:
            start = fit_moments(family, recs)
        except DomainError:
            return
        fit = fit_mle(family, recs)
        assert fit.log_likelihood >= log_likelihood(start, recs)

    def test_reordering(self):
        recs = records([0] * 40 + [1] * 15 + [2] * 6 + [4, 5, 9])
        shuffled = list(recs)
        random.Random(3).shuffle(shuffled)
        for family in ("gamma", "invgamma"):
            a, b = fit_mle(family, recs), fit_mle(family, shuffled)
            for x, y in zip(a.params.__dict__.values(), b.params.__dict__.values()):
                assert x == pytest.approx(y, rel=1e-6)

    def test_heterogeneous_exposure(self):
        recs = [ClaimRecord(str(i), 0.5 + (i % 3), c) for i, c in enumerate([0, 1, 0, 2, 0, 0, 5, 1, 0, 3] * 5)]
        fit = fit_mle("gamma", recs)
        assert fit.converged and math.isfinite(fit.log_likelihood)

    def test_single_record_not_identifiable(self):
        fit = fit_mle("gamma", records([2]))
        assert not fit.identifiable
        assert fit.messages
        assert not fit_mle("invgamma", records([0])).identifiable

    def test_empty(self):
        with pytest.raises(DomainError):
            fit_mle("gamma", [])


class TestRecovery:
    def test_nb_mle(self, nb_portfolio):
        p = fit_mle("gamma", nb_portfolio).params
        assert p.alpha == pytest.approx(1.0, rel=0.05)
        assert p.beta == pytest.approx(1.0, rel=0.05)

    def test_pig_mle(self, pig_portfolio):
        p = fit_mle("invgamma", pig_portfolio).params
        assert p.m == pytest.approx(2.0, rel=0.10)
        assert p.s == pytest.approx(3.0, rel=0.10)

    def test_nb_moments_within_standard_errors(self, nb_portfolio):
        p = fit_moments("gamma", nb_portfolio)
        se = moment_fit_standard_errors("gamma", nb_portfolio)
        assert abs(p.alpha - 1.0) <= 3 * se["alpha"]
        assert abs(p.beta - 1.0) <= 3 * se["beta"]
