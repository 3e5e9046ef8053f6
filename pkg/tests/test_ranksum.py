import numpy as np
import pytest

from depthrank.core.errors import DegenerateVarianceError, DomainError
from depthrank.services.depth import DepthSpec
from depthrank.services.model import GaussianMixture, RngStream, alternative_families, sample
from depthrank.services.ranksum import (
    general_test,
    null_test,
    null_z,
    q_components,
    q_result,
    q_statistic,
    two_sided_p,
    variance_estimates,
)
from depthrank.services.theory import asymptotic_sigmas, closed_form_q

MAHALANOBIS = DepthSpec(method="mahalanobis")
EXACT_SPECS = [
    MAHALANOBIS,
    DepthSpec(method="halfspace"),
    DepthSpec(method="projection"),
    DepthSpec(method="projection", location_scale="mean-sd"),
]


class TestStatistic:
    def test_wilcoxon_identity(self):
        gen = RngStream(31).generator()
        for _ in range(100):
            m, n = int(gen.integers(1, 40)), int(gen.integers(1, 40))
            x, y = gen.standard_normal(m), gen.standard_normal(n)
            q = q_statistic(x, y, DepthSpec(method="cdf1d"))
            pairs = int(np.sum(x[:, None] < y[None, :]))
            assert q * m * n == pytest.approx(pairs, abs=1e-9)

    def test_same_sample(self, normal_pair):
        X, _ = normal_pair
        assert q_statistic(X, X, MAHALANOBIS) == pytest.approx(31 / 60)

    def test_range(self, normal_pair):
        X, Y = normal_pair
        for spec in (MAHALANOBIS, DepthSpec(method="halfspace"), DepthSpec(method="projection")):
            assert 0.0 <= q_statistic(X, Y, spec) <= 1.0

    def test_components(self, normal_pair):
        X, Y = normal_pair
        parts = q_components(X, Y, MAHALANOBIS)
        assert parts.ranks.shape == (30,)
        assert parts.survivals.shape == (30,)
        # both averages count the pairs with D(X_i) <= D(Y_j)
        assert np.mean(parts.survivals) == pytest.approx(parts.q)

    @pytest.mark.parametrize(
        "spec", EXACT_SPECS + [DepthSpec(method="projection", mode="approximate", n_directions=300)]
    )
    def test_row_order_does_not_matter(self, normal_pair, spec):
        X, Y = normal_pair
        gen = RngStream(41).generator()
        expected = q_statistic(X, Y, spec, RngStream(3))
        for _ in range(3):
            Xp, Yp = X[gen.permutation(30)], Y[gen.permutation(30)]
            assert q_statistic(Xp, Yp, spec, RngStream(3)) == expected

    @pytest.mark.parametrize("spec", EXACT_SPECS)
    def test_affine_invariant(self, spec):
        gen = RngStream(42).generator()
        X = gen.standard_normal((20, 2))
        Y = 1.5 * gen.standard_normal((20, 2)) + 0.3
        A = np.array([[2.0, 0.5], [-0.3, 1.2]])
        b = np.array([1.0, -4.0])
        assert q_statistic(X @ A.T + b, Y @ A.T + b, spec) == q_statistic(X, Y, spec)

    @pytest.mark.parametrize("spec", [MAHALANOBIS, DepthSpec(method="halfspace")])
    def test_linear_in_second_sample(self, normal_pair, spec):
        X, Y = normal_pair
        Y1, Y2 = Y[:17], Y[17:] + 0.5
        whole = q_statistic(X, np.vstack([Y1, Y2]), spec)
        parts = (17 * q_statistic(X, Y1, spec) + 13 * q_statistic(X, Y2, spec)) / 30
        assert whole == pytest.approx(parts, abs=1e-12)

    def test_pair_count_is_exact(self, normal_pair):
        X, Y = normal_pair
        parts = q_components(X, Y, DepthSpec(method="halfspace"))
        assert parts.q == parts.pairs / 900
        assert parts.pairs == int(np.sum(parts.survival_counts))

    def test_dilation_lowers_q(self):
        gen = RngStream(2).generator()
        X = sample(GaussianMixture.standard(), 400, gen)
        Y = sample(GaussianMixture.normal([0, 0], 4.0 * np.eye(2)), 400, gen)
        assert q_statistic(X, Y, MAHALANOBIS) < 0.35

    def test_sample_checks(self, normal_pair):
        X, _ = normal_pair
        with pytest.raises(DomainError):
            q_statistic(X, np.zeros((0, 2)), MAHALANOBIS)
        with pytest.raises(DomainError):
            q_statistic(X, np.zeros((3, 3)), MAHALANOBIS)


class TestNullTest:
    def test_z_and_p(self):
        assert null_z(0.5, 10, 20) == 0.0
        assert two_sided_p(0.0) == 1.0
        assert two_sided_p(1.959963984540054) == pytest.approx(0.05, abs=1e-12)

    def test_report(self, normal_pair):
        X, Y = normal_pair
        report = null_test(X, Y, MAHALANOBIS, alpha=0.05)
        expected_z = (report.statistic - 0.5) / np.sqrt((1 / 30 + 1 / 30) / 12)
        assert report.test == "q"
        assert report.z == pytest.approx(expected_z)
        assert report.reject == (report.p_value < 0.05)
        assert report.method == "mahalanobis"
        assert report.mode == "exact"

    def test_same_sample_not_rejected(self, normal_pair):
        X, _ = normal_pair
        assert not null_test(X, X, MAHALANOBIS).reject

    def test_detects_large_dilation(self):
        gen = RngStream(4).generator()
        X = gen.standard_normal((100, 2))
        Y = 3.0 * gen.standard_normal((100, 2))
        assert null_test(X, Y, MAHALANOBIS).reject

    def test_alpha_domain(self, normal_pair):
        X, Y = normal_pair
        with pytest.raises(DomainError):
            null_test(X, Y, MAHALANOBIS, alpha=1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "spec",
        [
            DepthSpec(method="mahalanobis"),
            DepthSpec(method="halfspace"),
            DepthSpec(method="projection", mode="approximate", n_directions=500),
        ],
    )
    def test_null_calibration(self, spec):
        rejects = 0
        reps = 2000
        for r in range(reps):
            gen = RngStream(2024, r).generator()
            X = gen.standard_normal((100, 2))
            Y = gen.standard_normal((100, 2))
            rejects += null_test(X, Y, spec, rng=gen).reject
        assert 0.03 <= rejects / reps <= 0.07


class TestVariance:
    def test_plug_in_under_null(self):
        gen = RngStream(8).generator()
        X = gen.standard_normal((2000, 2))
        Y = gen.standard_normal((2000, 2))
        sigma2_gf, sigma2_fg = variance_estimates(X, Y, MAHALANOBIS)
        assert sigma2_gf == pytest.approx(1 / 12, abs=0.01)
        assert sigma2_fg == pytest.approx(1 / 12, abs=0.01)

    def test_plug_in_matches_asymptotic_values(self):
        G = alternative_families("pure-scale", 2.0)
        gen = RngStream(9).generator()
        X = sample(GaussianMixture.standard(), 4000, gen)
        Y = sample(G, 4000, gen)
        sigma2_gf, sigma2_fg = variance_estimates(X, Y, MAHALANOBIS)
        expected_gf, expected_fg = asymptotic_sigmas(G)
        assert sigma2_fg == pytest.approx(expected_fg, abs=0.01)
        assert sigma2_gf == pytest.approx(expected_gf, abs=0.01)

    def test_result_fields(self, normal_pair):
        X, Y = normal_pair
        res = q_result(X, Y, MAHALANOBIS)
        assert (res.m, res.n) == (30, 30)
        assert res.sigma2_gf_hat >= 0.0 and res.sigma2_fg_hat >= 0.0
        assert 0.0 <= res.p_null <= 1.0


class TestGeneralTest:
    def test_interval_contains_estimate(self, normal_pair):
        X, Y = normal_pair
        report = general_test(X, Y, MAHALANOBIS, q0=0.5)
        assert report.ci_low <= report.statistic <= report.ci_high
        assert report.q0 == 0.5
        assert report.reject == (report.p_value < 0.05)

    def test_degenerate_variance(self, normal_pair):
        X, _ = normal_pair
        Y = np.full((5, 2), 100.0)
        with pytest.raises(DegenerateVarianceError):
            general_test(X, Y, MAHALANOBIS, q0=0.5)

    def test_q0_at_estimate(self, normal_pair):
        X, Y = normal_pair
        q = q_statistic(X, Y, MAHALANOBIS)
        report = general_test(X, Y, MAHALANOBIS, q0=q)
        assert report.z == 0.0
        assert report.p_value == 1.0

    @pytest.mark.slow
    def test_interval_coverage(self):
        mu = [0.3, 0.3]
        truth = closed_form_q(mu, np.eye(2))
        G = GaussianMixture.normal(mu, np.eye(2))
        covered = 0
        reps = 1000
        for r in range(reps):
            gen = RngStream(77, r).generator()
            X = sample(GaussianMixture.standard(), 500, gen)
            Y = sample(G, 500, gen)
            report = general_test(X, Y, MAHALANOBIS, q0=truth)
            covered += report.ci_low <= truth <= report.ci_high
        assert 0.93 <= covered / reps <= 0.97

    @pytest.mark.slow
    def test_agrees_with_null_test_under_null(self):
        agree = 0
        reps = 1000
        for r in range(reps):
            gen = RngStream(78, r).generator()
            X = gen.standard_normal((500, 2))
            Y = gen.standard_normal((500, 2))
            general = general_test(X, Y, MAHALANOBIS, q0=0.5)
            null = null_test(X, Y, MAHALANOBIS)
            assert general.statistic == null.statistic
            agree += general.reject == null.reject
        assert agree / reps >= 0.99

    def test_q0_domain(self, normal_pair):
        X, Y = normal_pair
        with pytest.raises(DomainError):
            general_test(X, Y, MAHALANOBIS, q0=1.5)
