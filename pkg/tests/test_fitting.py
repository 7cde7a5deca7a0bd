import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoqubits.fitting import fit_decay, model_function


def test_exact_exponential_recovered():
    m = np.array([1, 2, 4, 8, 16, 32, 64, 128], dtype=float)
    fit = fit_decay(m, 0.7 * 0.98**m + 0.283)
    assert fit.converged and not fit.degenerate
    for k, v in {"A": 0.7, "alpha": 0.98, "B": 0.283}.items():
        assert fit.params[k] == pytest.approx(v, abs=1e-9)


def test_noisy_gaussian_envelope(rng):
    t = np.linspace(0, 12, 60)
    y = 0.5 * np.exp(-(t / 3.5) ** 2) + 0.5 + rng.normal(0, 0.01, t.size)
    fit = fit_decay(t, y, np.full(t.size, 0.01), "gaussian_envelope")
    assert fit.params["tau"] == pytest.approx(3.5, rel=0.03)
    lo, hi = fit.ci("tau", 3)
    assert lo < 3.5 < hi


def test_damped_cosine():
    t = np.linspace(0, 400, 800)
    y = 0.45 * np.exp(-(t / 250) ** 2) * np.cos(2 * np.pi * 0.05 * t + 0.3) + 0.5
    fit = fit_decay(t, y, None, "damped_cosine")
    assert fit.params["f"] == pytest.approx(0.05, rel=1e-6)
    assert fit.params["tau"] == pytest.approx(250, rel=1e-6)


def test_constant_data_is_degenerate():
    m = np.array([1, 2, 4, 8, 16], dtype=float)
    fit = fit_decay(m, np.full(5, 0.9), np.full(5, 0.01))
    assert fit.degenerate or fit.ci("alpha")[1] >= 1


def test_fixed_offset():
    m = np.array([1, 50, 100, 200, 400], dtype=float)
    y = 0.9 * 0.999**m
    fit = fit_decay(m, y, np.full(5, 1e-4), fixed={"B": 0.0})
    assert fit.params["B"] == 0.0 and fit.stderr["B"] == 0.0
    assert fit.params["alpha"] == pytest.approx(0.999, abs=1e-9)


def test_bad_arguments():
    with pytest.raises(ValueError):
        fit_decay([1, 2], [1, 1])
    with pytest.raises(ValueError):
        fit_decay([1, 2, 3, 4], [1, 1, 1, 1], model="linear")
    with pytest.raises(ValueError):
        fit_decay([1, 2, 3, 4], [1, 1, 1, 1], fixed={"C": 0})


@given(st.floats(0.2, 1.0), st.floats(0.8, 0.995), st.floats(0.0, 0.5))
def test_exponential_roundtrip(a, alpha, b):
    m = np.array([1, 3, 6, 12, 24, 48, 96], dtype=float)
    fit = fit_decay(m, model_function("exponential")(m, a, alpha, b))
    assert fit.params["alpha"] == pytest.approx(alpha, abs=1e-7)
    assert math.isfinite(fit.residual_norm)
