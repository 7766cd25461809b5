import numpy as np
import pytest

import berger


def basis(dim, i):
    e = np.zeros(dim)
    e[i] = 1.0
    return e


def unit_state(rng, n, delta):
    xi = rng.normal(size=2 * n)
    xi /= np.linalg.norm(xi)
    w = rng.normal(size=2 * n)
    w -= w.dot(xi) * xi
    w *= 0.5 / np.linalg.norm(w)
    return xi, w, rng.normal(size=2 * n)


def test_riemann_example():
    e1, e2 = basis(2, 0), basis(2, 1)
    np.testing.assert_allclose(berger.riemann(e1, e2, e1, n=1, m=4.0), -4.0 * e2)


def test_script_R_is_skew_and_J_commuting():
    rng = np.random.default_rng(1)
    R = berger.script_R_matrix(rng.normal(size=8), rng.normal(size=8), n=4, m=4.0, delta=0.7)
    J = np.column_stack([berger.apply_J(basis(8, i)) for i in range(8)])
    assert np.abs(R + R.T).max() < 1e-13
    assert np.abs(R @ J - J @ R).max() < 1e-13


def test_lifted_inner_hopf_direction():
    xi = basis(4, 0)
    jxi = berger.apply_J(xi)
    zero = np.zeros(4)
    assert berger.lifted_inner(xi, zero, jxi, zero, jxi, delta=0.5) == pytest.approx(1.25)


def test_connection_sweep():
    res = berger.connection_sweep(n=2, m=4.0, delta=0.7, jets=50, xi_norms=[0.3, 1.0])
    assert max(res.values()) <= 1e-10


def test_vertical_vertical_vanishes_for_sasaki():
    rng = np.random.default_rng(2)
    h, v = berger.lifted_connection("v", "v", *rng.normal(size=(5, 4)), n=2, delta=0.0)
    assert not h.any() and not v.any()


def test_integrate_conserves_on_unit_bundle():
    rng = np.random.default_rng(3)
    xi, w, u = unit_state(rng, 2, 0.8)
    traj = berger.integrate(xi, w, u, bundle="T1M", n=2, delta=0.8, sigma_max=2.0, sample_stride=10)
    assert traj["u"].shape == (201, 4)
    assert np.ptp(traj["c"]) < 1e-10
    assert np.ptp(traj["mu"]) < 1e-10


def test_curvatures_sixth_vanishes():
    rng = np.random.default_rng(4)
    xi, w, u = unit_state(rng, 4, 0.5)
    traj = berger.integrate(xi, w, u, n=4, delta=0.5, sigma_max=0.01)
    k = berger.curvatures(traj["u"][0], traj["xi"][0], traj["w"][0], n=4, delta=0.5, p_max=8)
    assert len(k) <= 5
    assert min(k) > 0.0


def test_errors_map_to_exceptions():
    with pytest.raises(berger.InfeasibleSpeed):
        berger.integrate(basis(2, 0), 2.0 * basis(2, 1), basis(2, 1), n=1)
    with pytest.raises(berger.DimensionMismatch):
        berger.riemann(basis(2, 0), basis(2, 1), basis(2, 0), n=2)


def test_run_command(tmp_path):
    code, report = berger.run("verify-connection", {"samples": 20, "out": str(tmp_path)})
    assert code == 0
    assert report["overall_pass"]
    assert (tmp_path / "verify-connection_report.json").exists()
