import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError
from scipy.integrate import trapezoid

from spicereg.errors import DataError
from spicereg.models import FeatureKind, FeatureMapConfig, MeanKind
from spicereg.services.feature_service import FeatureMap


def laplace_map(kind, d, m, half_widths, mean=MeanKind.NONE, centers=None):
    return FeatureMap(FeatureMapConfig(
        kind=kind, mean_kind=mean, d=d, m=m, half_widths=half_widths, centers=centers,
    ))


def test_single_sine_peaks_at_box_center():
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=1, half_widths=[1.0])
    assert_allclose(fmap.evaluate([0.0]), [1.0], atol=1e-15)


def test_laplace_values_at_known_point():
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=2, half_widths=[2.0])
    assert_allclose(fmap.evaluate([1.0]), [0.5, -1.0 / math.sqrt(2.0)], atol=1e-12)


def test_linear_with_constant_mean():
    fmap = FeatureMap(FeatureMapConfig(kind=FeatureKind.LINEAR, mean_kind=MeanKind.CONSTANT, d=2))
    assert_allclose(fmap.evaluate([3.0, -1.0]), [1.0, 3.0, -1.0])
    assert (fmap.u, fmap.q, fmap.p) == (1, 2, 3)


def test_linear_with_affine_mean_repeats_inputs():
    fmap = FeatureMap(FeatureMapConfig(kind=FeatureKind.LINEAR, mean_kind=MeanKind.AFFINE, d=2))
    assert_allclose(fmap.evaluate([3.0, -1.0]), [1.0, 3.0, -1.0, 3.0, -1.0])
    assert fmap.u == 3


@pytest.mark.parametrize("mean,u", [(MeanKind.NONE, 0), (MeanKind.CONSTANT, 1), (MeanKind.AFFINE, None)])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 4])
def test_dimensions_match_evaluation(mean, u, d, m):
    expected_u = 1 + d if u is None else u
    half_widths = [1.0] * d
    tensor = laplace_map(FeatureKind.LAPLACE_TENSOR, d, m, half_widths, mean=mean)
    additive = laplace_map(FeatureKind.LAPLACE_ADDITIVE, d, m, half_widths, mean=mean)
    x = np.linspace(-0.5, 0.5, d)

    assert tensor.u == expected_u and tensor.q == m ** d
    assert additive.u == expected_u and additive.q == m * d
    assert tensor.evaluate(x).shape == (tensor.p,)
    assert additive.evaluate(x).shape == (additive.p,)


def test_tensor_basis_vanishes_at_lower_corner():
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=2, m=3, half_widths=[1.5, 0.5])
    assert_allclose(fmap.evaluate([-1.5, 0.3]), np.zeros(9), atol=1e-12)


def test_additive_basis_vanishes_only_in_its_dimension():
    fmap = laplace_map(FeatureKind.LAPLACE_ADDITIVE, d=2, m=3, half_widths=[1.5, 0.5])
    phi = fmap.evaluate([-1.5, 0.3])
    assert_allclose(phi[:3], np.zeros(3), atol=1e-12)
    assert np.all(np.abs(phi[3:]) > 1e-3)


def test_one_dimensional_basis_is_orthonormal_on_the_box():
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=3, half_widths=[2.0])
    x = np.linspace(-2.0, 2.0, 10001)
    Psi = fmap.evaluate_batch(x[:, None])
    gram = np.array([[trapezoid(Psi[:, i] * Psi[:, j], x) for j in range(3)] for i in range(3)])
    assert_allclose(gram, np.eye(3), atol=1e-6)


def test_tensor_ordering_has_first_dimension_fastest():
    x = [0.2, -0.4]
    first = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=2, half_widths=[1.0]).evaluate([x[0]])
    second = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=2, half_widths=[1.0]).evaluate([x[1]])
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=2, m=2, half_widths=[1.0, 1.0])

    expected = [first[0] * second[0], first[1] * second[0], first[0] * second[1], first[1] * second[1]]
    assert_allclose(fmap.evaluate(x), expected, rtol=1e-12)


def test_additive_stacks_one_dimensional_bases():
    x = [0.7, -0.1]
    fmap = laplace_map(FeatureKind.LAPLACE_ADDITIVE, d=2, m=3, half_widths=[1.0, 2.0])
    first = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=3, half_widths=[1.0]).evaluate([x[0]])
    second = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=3, half_widths=[2.0]).evaluate([x[1]])
    assert_allclose(fmap.evaluate(x), np.concatenate([first, second]), rtol=1e-12)


def test_centers_shift_the_box():
    centered = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=4, half_widths=[2.0], centers=[1.0])
    plain = laplace_map(FeatureKind.LAPLACE_TENSOR, d=1, m=4, half_widths=[2.0])
    assert_allclose(centered.evaluate([1.0]), plain.evaluate([0.0]), atol=1e-12)


def test_batch_matches_rowwise(rng):
    fmap = laplace_map(FeatureKind.LAPLACE_TENSOR, d=2, m=3, half_widths=[1.0, 1.0], mean=MeanKind.AFFINE)
    X = rng.uniform(-1.0, 1.0, size=(7, 2))
    expected = np.vstack([fmap.evaluate(x) for x in X])
    assert_allclose(fmap.evaluate_batch(X), expected)


def test_wrong_input_dimension_is_rejected():
    fmap = FeatureMap(FeatureMapConfig(d=3))
    with pytest.raises(DataError):
        fmap.evaluate([1.0, 2.0])
    with pytest.raises(DataError):
        fmap.evaluate_batch(np.zeros((4, 2)))


def test_laplace_config_requires_m_and_half_widths():
    with pytest.raises(ValidationError):
        FeatureMapConfig(kind=FeatureKind.LAPLACE_TENSOR, d=1, half_widths=[1.0])
    with pytest.raises(ValidationError):
        FeatureMapConfig(kind=FeatureKind.LAPLACE_ADDITIVE, d=2, m=3, half_widths=[1.0])
    with pytest.raises(ValidationError):
        FeatureMapConfig(kind=FeatureKind.LAPLACE_ADDITIVE, d=1, m=3, half_widths=[0.0])


def test_oversized_tensor_basis_is_rejected():
    with pytest.raises(ValidationError, match="too large"):
        FeatureMapConfig(kind=FeatureKind.LAPLACE_TENSOR, d=7, m=8, half_widths=[1.0] * 7)


def test_config_survives_dict_conversion():
    fmap = laplace_map(FeatureKind.LAPLACE_ADDITIVE, d=2, m=3, half_widths=[1.0, 2.5], centers=[0.5, -1.0])
    restored = FeatureMap.from_dict(fmap.to_dict())
    assert restored.config == fmap.config
