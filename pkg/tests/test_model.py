import numpy as np
import pytest

from depthrank.core.errors import DomainError, FactorizationError
from depthrank.services.model import (
    FAMILIES,
    GaussianComponent,
    GaussianMixture,
    RngStream,
    alternative_families,
    mixture_from_json,
    mixture_to_json,
    null_param,
    sample,
)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(7, 3).generator().standard_normal(5)
        b = RngStream(7, 3).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(7, 3).generator().standard_normal(5)
        b = RngStream(7, 4).generator().standard_normal(5)
        c = RngStream(8, 3).generator().standard_normal(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestMixture:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            GaussianMixture([GaussianComponent(0.5, np.zeros(2), np.eye(2))])

    def test_dimensions_must_agree(self):
        with pytest.raises(DomainError):
            GaussianMixture(
                [
                    GaussianComponent(0.5, np.zeros(2), np.eye(2)),
                    GaussianComponent(0.5, np.zeros(3), np.eye(3)),
                ]
            )

    def test_component_shape_checked(self):
        with pytest.raises(DomainError):
            GaussianComponent(1.0, np.zeros(2), np.eye(3))

    def test_isotropic(self):
        assert GaussianMixture.normal([0, 0], 2.0 * np.eye(2)).is_isotropic()
        assert not GaussianMixture.normal([0, 0], np.diag([1.0, 2.0])).is_isotropic()

    def test_json_document(self):
        mix = alternative_families("contaminated-location", 0.2)
        back = mixture_from_json(mixture_to_json(mix))
        np.testing.assert_array_equal(back.weights, mix.weights)
        for a, b in zip(back.components, mix.components):
            np.testing.assert_array_equal(a.mean, b.mean)
            np.testing.assert_array_equal(a.cov, b.cov)

    def test_json_rejects_bad_document(self):
        with pytest.raises(DomainError):
            mixture_from_json('{"dim": 2, "components": [{"weight": 1.0, "mean": [0], "cov": [1]}]}')
        with pytest.raises(DomainError):
            mixture_from_json("not json")


class TestSampling:
    def test_shape_and_moments(self):
        mix = GaussianMixture.normal([1.0, -2.0], [[2.0, 0.5], [0.5, 1.0]])
        X = sample(mix, 20000, RngStream(11))
        assert X.shape == (20000, 2)
        np.testing.assert_allclose(X.mean(axis=0), [1.0, -2.0], atol=0.05)
        np.testing.assert_allclose(np.cov(X, rowvar=False), [[2.0, 0.5], [0.5, 1.0]], atol=0.08)

    def test_component_frequencies(self):
        mix = alternative_families("contaminated-scale", 1.6)
        _, labels = sample(mix, 20000, RngStream(5), return_labels=True)
        assert np.mean(labels == 1) == pytest.approx(0.1, abs=0.01)

    def test_deterministic(self):
        mix = alternative_families("location-scale", 0.3)
        np.testing.assert_array_equal(sample(mix, 10, RngStream(1, 2)), sample(mix, 10, RngStream(1, 2)))

    def test_generator_continues_stream(self):
        gen = RngStream(3).generator()
        first = sample(GaussianMixture.standard(), 4, gen)
        second = sample(GaussianMixture.standard(), 4, gen)
        assert not np.array_equal(first, second)

    def test_non_spd_covariance(self):
        mix = GaussianMixture.normal([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(FactorizationError):
            sample(mix, 5, RngStream(0))

    def test_positive_size(self):
        with pytest.raises(DomainError):
            sample(GaussianMixture.standard(), 0, RngStream(0))


class TestFamilies:
    @pytest.mark.parametrize("kind", FAMILIES)
    def test_null_parameter_gives_standard_normal(self, kind):
        mix = alternative_families(kind, null_param(kind))
        for comp in mix.components:
            np.testing.assert_allclose(comp.mean, np.zeros(2), atol=0)
            np.testing.assert_allclose(comp.cov, np.eye(2), atol=0)

    def test_contaminated_location(self):
        mix = alternative_families("contaminated-location", 0.25)
        main, contaminant = mix.components
        assert main.weight == pytest.approx(0.9)
        np.testing.assert_array_equal(main.mean, [0.25, 0.25])
        np.testing.assert_allclose(contaminant.cov, (1 + 10 * 0.25 * 16) * np.eye(2))

    def test_contaminated_scale(self):
        mix = alternative_families("contaminated-scale", 1.44)
        main, contaminant = mix.components
        np.testing.assert_allclose(main.cov, 1.44 * np.eye(2))
        np.testing.assert_allclose(contaminant.mean, [0.2, 0.2])

    def test_location_scale(self):
        mix = alternative_families("location-scale", 0.5)
        np.testing.assert_allclose(mix.components[0].cov, 2.25 * np.eye(2))

    @pytest.mark.parametrize(
        "kind, param",
        [("location-scale", -0.1), ("pure-location", np.nan), ("pure-scale", 0.5), ("contaminated-scale", 0.9)],
    )
    def test_out_of_range(self, kind, param):
        with pytest.raises(DomainError):
            alternative_families(kind, param)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            alternative_families("shear", 1.0)
