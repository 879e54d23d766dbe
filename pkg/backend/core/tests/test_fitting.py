from __future__ import annotations

import numpy as np
import pytest

from cascadebai.errors import ConfigError, DegeneratePoints
from cascadebai.harness.fitting import FitResult, ScalingModel, fit_scaling


def test_linear_points_fit_exactly():
    fit = fit_scaling([(K, 3 * K + 7) for K in (4, 8, 12, 16)], "linear")
    assert fit.model is ScalingModel.LINEAR
    assert fit.c1 == pytest.approx(3.0)
    assert fit.c2 == pytest.approx(7.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points == 4


def test_quadratic_points_fit_exactly():
    fit = fit_scaling([(K, 2 * K ** 2 + 5) for K in (2, 3, 5, 8)], ScalingModel.QUADRATIC)
    assert fit.c1 == pytest.approx(2.0)
    assert fit.c2 == pytest.approx(5.0)
    assert fit.r_squared == pytest.approx(1.0)
    np.testing.assert_allclose(fit.predict([10]), [205.0])


def test_constant_target():
    fit = fit_scaling([(1, 10.0), (2, 10.0), (3, 10.0)], "linear")
    assert (fit.c1, fit.c2, fit.r_squared) == (0.0, 10.0, 0.0)


def test_noisy_points_have_partial_r_squared(rng):
    K = np.arange(5, 30, 5, dtype=float)
    y = 4 * K + 3 + rng.normal(0, 5, size=K.size)
    fit = fit_scaling(zip(K, y), "LinearInK")
    assert 0.0 < fit.r_squared <= 1.0
    assert fit.c1 > 0


def test_too_few_points():
    with pytest.raises(DegeneratePoints):
        fit_scaling([(1, 2.0), (2, 3.0)], "linear")


def test_repeated_k():
    with pytest.raises(DegeneratePoints):
        fit_scaling([(1, 2.0), (1, 3.0), (2, 4.0)], "quadratic")


def test_model_names():
    assert ScalingModel.parse("Quadratic") is ScalingModel.QUADRATIC
    assert ScalingModel.parse("LinearInK") is ScalingModel.LINEAR
    assert ScalingModel.QUADRATIC.power == 2
    with pytest.raises(ConfigError):
        ScalingModel.parse("cubic")


def test_fit_row():
    row = FitResult(ScalingModel.LINEAR, 1.5, 2.0, 0.9, 5).as_row()
    assert row == {"model": "LinearInK", "c1": 1.5, "c2": 2.0, "r_squared": 0.9, "n_points": 5}
