import numpy as np
import pytest

from conftest import full_model
from oracles import dense_integral, series
from sllg import Observer, StepperConfig, TestFunction, WienerPath, build_basis, integrate
from sllg import model as mdl
from sllg.diagnostics import (COLUMNS, holder_quotient, ito_balance_defect, pointwise_diagnostics,
                              sphere_deviation_study, weak_residual, weak_residual_terms)
from sllg.verify import random_state


def test_column_order_is_fixed():
    assert COLUMNS == ("time", "l2", "v_norm", "energy", "exchange", "anisotropy",
                       "cum_dissipation", "sphere_dev", "xneg_beta")


def _c2_nodes(u, m):
    U = m.basis.to_physical(u)
    R = m.basis.to_physical(mdl.effective_field(u, m))
    return np.cross(U, np.cross(U, R))


def test_l32_surrogate_is_the_quadrature_sum(model16, rng):
    m = model16
    u = random_state(m.basis, rng)
    mag = np.linalg.norm(_c2_nodes(u, m), axis=1)
    expected = np.sum(m.basis.weights * mag**1.5) ** (4 / 3)
    assert np.isclose(pointwise_diagnostics(u, m)["l32_sq"], expected, rtol=1e-8)


def test_l32_surrogate_converges_to_dense_integral(rng):
    m = full_model(16)
    u = random_state(m.basis, rng)
    rho = mdl.effective_field(u, m)

    def integrand(x):
        U, R = series(u, x, np.pi), series(rho, x, np.pi)
        return np.linalg.norm(np.cross(U, np.cross(U, R)), axis=1) ** 1.5

    ref = dense_integral(integrand, np.pi, 200001) ** (4 / 3)
    errs = [abs(pointwise_diagnostics(u, m.with_basis(build_basis(np.pi, 16, os_)))["l32_sq"] - ref)
            for os_ in (4, 16)]
    assert errs[1] < errs[0] and errs[1] / ref < 1e-4


def test_dual_norm_and_energy_columns(model16, rng):
    m = model16
    u = random_state(m.basis, rng)
    d = pointwise_diagnostics(u, m, beta=0.3)
    xi = m.basis.to_coeffs(_c2_nodes(u, m))
    lam = m.basis.eigenvalues
    assert np.isclose(d["xneg_beta"], np.sqrt(np.sum((1 + lam)[:, None] ** -0.6 * xi**2)))
    assert np.isclose(d["energy"], d["exchange"] + d["anisotropy"])
    assert np.isclose(d["v_norm"] ** 2, np.sum(u**2) + np.sum(lam[:, None] * u**2))


def test_observer_integrals_are_left_endpoint_sums():
    m = full_model(8)
    cfg = StepperConfig("implicit_midpoint", 0.01, 0.05)
    path = WienerPath.generate(5, 2, 0.01, 1)
    rec = integrate(m, cfg, path, Observer(), keep_states=True)
    diss = [pointwise_diagnostics(u, m)["dissipation"] for u in rec.states]
    assert np.isclose(rec.integrals["dissipation"], 0.01 * sum(diss[:-1]), rtol=1e-12)
    np.testing.assert_allclose(rec.column("cum_dissipation")[-1], rec.integrals["dissipation"])


def test_strides_and_snapshots():
    m = full_model(8)
    cfg = StepperConfig("implicit_midpoint", 0.01, 0.1)
    rec = integrate(m, cfg, WienerPath.generate(10, 2, 0.01), Observer(stride=3, snapshot_stride=5))
    np.testing.assert_allclose(rec.times, [0, 0.03, 0.06, 0.09, 0.1])
    np.testing.assert_allclose(rec.snapshot_times, [0, 0.05, 0.1])
    assert holder_quotient(rec, 0.25) > 0
    with pytest.raises(ValueError):
        holder_quotient(rec, 0.5)
    with pytest.raises(ValueError):
        Observer(stride=0)


def test_holder_quotient_needs_two_snapshots():
    m = full_model(8)
    rec = integrate(m, StepperConfig(dt=0.01, T=0.0), WienerPath.zeros(0, 2, 0.01))
    with pytest.raises(ValueError):
        holder_quotient(rec)


def test_weak_residual_deterministic_run_shrinks():
    m = full_model(8, length=2 * np.pi)
    psi = TestFunction(2, (0.0, 1.0, 0.0))
    res = []
    for dt in (2**-5, 2**-6, 2**-7):
        n = int(0.5 / dt)
        path = WienerPath.zeros(n, 2, dt)
        rec = integrate(m, StepperConfig("implicit_midpoint", dt, 0.5), path, keep_states=True)
        res.append(weak_residual(rec.states, path, psi, m, drift_rule="midpoint"))
    assert res[2] < res[1] < res[0]


def test_weak_residual_terms_consistent(model16):
    m = model16
    path = WienerPath.generate(20, 2, 2**-8, 4)
    rec = integrate(m, StepperConfig("implicit_midpoint", 2**-8, 20 * 2**-8), path, keep_states=True)
    t = weak_residual_terms(rec.states, path, TestFunction(), m)
    assert np.isclose(t["rhs"], t["initial"] + t["drift"] + t["stochastic"])
    assert np.isclose(t["residual"], t["lhs"] - t["rhs"])
    with pytest.raises(ValueError):
        weak_residual_terms(rec.states[:1], path, TestFunction(), m)
    with pytest.raises(ValueError):
        weak_residual_terms(rec.states, path, TestFunction(), m, stratonovich="ito")


def test_ito_balance_defect_small(model16):
    m = full_model(8, length=2 * np.pi)
    dt = 2**-10
    path = WienerPath.generate(256, 2, dt, 2)
    rec = integrate(m, StepperConfig("euler_maruyama_ito", dt, 256 * dt), path, keep_states=True)
    change = abs(mdl.energy(rec.states[-1], m) - mdl.energy(rec.states[0], m))
    assert abs(ito_balance_defect(rec.states, path, m)) < 0.1 * max(change, 1e-3)


def test_sphere_study_rows():
    m = full_model(8)
    cfg = StepperConfig("implicit_midpoint", 1e-3, 0.01)
    rows = sphere_deviation_study(m, (8, 16), cfg, WienerPath.generate(10, 2, 1e-3))
    assert [r["n_modes"] for r in rows] == [8, 16]
    assert rows[1]["initial_sphere_dev"] < rows[0]["initial_sphere_dev"]
