import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import full_model
from sllg import StepperConfig, build_basis
from sllg import model as mdl
from sllg.algebra import cross, dot
from sllg.ensemble import summarize
from sllg.integrators import step_implicit_midpoint
from sllg.io import fmt
from sllg.wiener import counter_normals

N = 8
BASIS = build_basis(2.0, N)
MODEL = full_model(N, length=2 * np.pi)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
coeffs = arrays(np.float64, (N, 3), elements=finite)
vectors = arrays(np.float64, (5, 3), elements=finite)


@given(coeffs)
def test_transform_round_trip(c):
    np.testing.assert_allclose(BASIS.to_coeffs(BASIS.to_physical(c)), c, atol=1e-11)


@given(vectors, vectors)
def test_cross_is_antisymmetric_and_orthogonal(a, b):
    c = cross(a, b)
    np.testing.assert_array_equal(c, -cross(b, a))
    scale = 1e-12 * (1 + np.abs(a).max() * np.abs(b).max()) * (1 + np.abs(a).max())
    assert np.all(np.abs(dot(c, a)) <= scale * 10)


@settings(max_examples=50)
@given(coeffs)
def test_drift_and_noise_orthogonal_to_state(c):
    u = c / (1 + np.arange(N))[:, None] ** 2
    nu = np.linalg.norm(u)
    for F in (mdl.strat_drift(u, MODEL), *mdl.noise_all(u, MODEL)):
        assert abs(np.sum(F * u)) <= 1e-10 * (np.linalg.norm(F) * nu + 1e-300)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (2,), elements=st.floats(-0.1, 0.1)), st.integers(0, 1000))
def test_midpoint_step_conserves_norm(dW, seed):
    u = np.random.default_rng(seed).standard_normal((N, 3)) / (1 + np.arange(N))[:, None] ** 2
    v = step_implicit_midpoint(u, dW, MODEL, StepperConfig("implicit_midpoint", 2**-8, 2**-8))
    assert abs(np.linalg.norm(v) - np.linalg.norm(u)) <= 1e-11 * np.linalg.norm(u)


@given(st.lists(finite, min_size=1, max_size=40), st.randoms())
def test_summary_ignores_order(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert summarize(values) == summarize(shuffled)
    s = summarize(values)
    assert s.se >= 0 and s.min <= s.mean <= s.max


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(fmt(x)) == x


@settings(max_examples=25)
@given(st.integers(0, 500), st.integers(0, 2**32), st.integers(0, 100))
def test_counter_stream_prefix(n, seed, replica):
    assert np.array_equal(counter_normals(n, seed, replica), counter_normals(n + 7, seed, replica)[:n])
