import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elliptica import potential as pot
from elliptica import radial as rad
from elliptica.errors import NonPositive, NotSuperharmonic, RangeError


def test_profile_validation():
    r = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        rad.RadialProfile(3, r, r[:5], r, 0.1)
    with pytest.raises(ValueError):
        rad.RadialProfile(3, r[::-1], r, r, 0.1)


def test_profile_window_and_csv(tmp_path):
    r = np.linspace(0.0, 10.0, 101)
    prof = rad.RadialProfile(3, r, np.exp(-r), -np.exp(-r), 0.1)
    win = prof.window(2.0, 5.0)
    assert win.r[0] >= 2.0 and win.r[-1] <= 5.0
    p = tmp_path / "prof.csv"
    prof.to_csv(p)
    head = p.read_text().splitlines()[0]
    assert head == "r,v,dv"
    back = np.loadtxt(p, delimiter=",", skiprows=1)
    assert np.allclose(back[:, 1], prof.v)


def test_singular_power_solves_equation():
    # v = A r^{-q} solves v'' + (n-1)/r v' = -lam v^p; verify by central FD
    n, p, lam = 3, 4.0, 1.0
    r = np.linspace(0.5, 5.0, 91)
    h = 1e-5
    v = rad.singular_power_solution(n, p, lam, r)
    vp = rad.singular_power_solution(n, p, lam, r + h)
    vm = rad.singular_power_solution(n, p, lam, r - h)
    lap = (vp - 2 * v + vm) / h ** 2 + (n - 1) / r * (vp - vm) / (2 * h)
    assert np.max(np.abs(lap + lam * v ** p)) < 1e-4


def test_integrate_radial_equilibrium():
    W = pot.double_well()
    prof, cls = rad.integrate_radial(W, 3, 0.0, W.b, 0.0, 20.0, 0.01)
    assert cls.kind == "ApproachesB"
    assert np.max(np.abs(prof.v - W.b)) < 1e-12


def test_integrate_radial_exit_event():
    W = pot.double_well()
    _, cls = rad.integrate_radial(W, 3, 0.0, 0.5, 0.0, 50.0, 0.01)
    assert cls.kind == "ExitsBelow_a"
    assert cls.exit_radius is not None and 0.0 < cls.exit_radius < 50.0


def test_shoot_batch_double_well_all_exit():
    W = pot.double_well()
    classes = rad.shoot_batch(W, 3, [0.2, 0.5, 0.8], 50.0, 0.01)
    assert all(c.kind == "ExitsBelow_a" for c in classes)


def test_shoot_entire_single_class_returns_none():
    W = pot.double_well()
    assert rad.shoot_entire(W, 3, 50.0, num_scan=16, step=0.02) is None


def test_heteroclinic_matches_tanh():
    W = pot.double_well()
    prof = rad.heteroclinic(W, 5.0)
    exact = -np.tanh(prof.r / np.sqrt(2.0))
    # e(-inf) = 1, e(0) = 0; the exact orbit is e(s) = -tanh(s/sqrt(2))
    assert np.max(np.abs(prof.v - exact)) < 1e-6
    assert np.all(np.diff(prof.v) <= 1e-9)


def test_pohozaev_exact_profile():
    con = pot.EntireDecayingConstruction(3, 4.0, 1.0)
    W = con.potential()
    res = []
    for step in (0.02, 0.01):
        prof = con.profile(rmax=20.0, step=step)
        res.append(abs(rad.pohozaev_residual(W, prof, 20.0).residual))
    assert res[1] <= res[0] and res[1] < 1e-8


def test_pohozaev_range_error():
    con = pot.EntireDecayingConstruction(3, 4.0, 1.0)
    prof = con.profile(rmax=10.0, step=0.1)
    with pytest.raises(RangeError):
        rad.pohozaev_residual(con.potential(), prof, 50.0)


@given(st.floats(-3.0, -0.5), st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_decay_exponent_recovers_power_law(alpha, c):
    r = np.linspace(1.0, 50.0, 401)
    v = c * r ** alpha
    prof = rad.RadialProfile(3, r, v, alpha * c * r ** (alpha - 1.0), r[1] - r[0])
    a_fit, c_fit, r2 = rad.decay_exponent(prof, 2.0, 40.0)
    assert a_fit == pytest.approx(alpha, abs=1e-9)
    assert c_fit == pytest.approx(c, rel=1e-9)
    assert r2 > 1.0 - 1e-12


def test_decay_exponent_nonpositive():
    r = np.linspace(1.0, 10.0, 51)
    prof = rad.RadialProfile(3, r, 5.0 - r, -np.ones_like(r), r[1] - r[0])
    with pytest.raises(NonPositive):
        rad.decay_exponent(prof, 2.0, 9.0)


def test_superharmonic_bound_on_decreasing_profile():
    con = pot.EntireDecayingConstruction(3, 4.0, 1.0)
    prof = con.profile(rmax=60.0, step=0.01)
    c, holds = rad.superharmonic_lower_bound(prof, 1.0)
    assert holds
    assert c == pytest.approx(prof.v[100] * prof.r[100], rel=1e-12)


def test_superharmonic_screen_rejects_subharmonic():
    r = np.linspace(0.5, 10.0, 201)
    prof = rad.RadialProfile(3, r, r ** 2, 2 * r, r[1] - r[0])
    with pytest.raises(NotSuperharmonic):
        rad.superharmonic_lower_bound(prof, 1.0)


def test_limit_classifier_bands():
    r = np.linspace(0.0, 10.0, 101)
    z = np.zeros_like(r)
    flat = lambda val: rad.RadialProfile(3, r, z + val, z, 0.1)
    assert rad.limit_classifier(flat(0.001), 0.0, 1.0, 0.02) == "A"
    assert rad.limit_classifier(flat(0.999), 0.0, 1.0, 0.02) == "B"
    assert rad.limit_classifier(flat(0.5), 0.0, 1.0, 0.02) == "Neither"
    # large terminal slope defeats classification
    steep = rad.RadialProfile(3, r, z + 0.999, z + 1.0, 0.1)
    assert rad.limit_classifier(steep, 0.0, 1.0, 0.02) == "Neither"


def test_angular_profile_linear_limit():
    # with negligible c the equation is g'' = -(2/(p-1))^2 g, so the first
    # zero of cos sits at theta = pi (p-1)/4
    theta, _ = rad.angular_profile(1e-12, 2.0, 1.0)
    assert theta == pytest.approx(np.pi / 4.0, abs=1e-6)
