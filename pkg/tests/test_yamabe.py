import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elliptica import potential as pot
from elliptica import yamabe as yam
from elliptica.errors import ConstraintViolated


def T3(k=100):
    return yam.BubbleTower(3, k)


# ---------------------------------------------------------------------------
# bubbles

def test_bubble_values():
    # U(0) = 2^{(n-2)/2}; U = 1 on the unit sphere
    assert yam.bubble(3, np.zeros(3)) == pytest.approx(np.sqrt(2.0))
    assert yam.bubble(4, np.zeros(4)) == pytest.approx(2.0)
    e1 = np.array([1.0, 0.0, 0.0])
    assert yam.bubble(3, e1) == pytest.approx(1.0)


def test_bubble_solves_critical_equation():
    # -Delta U = n(n-2)/4 U^{(n+2)/(n-2)} checked by central differences
    n = 3
    x = np.array([0.3, -0.7, 0.4])
    h = 1e-4
    lap = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        lap += (yam.bubble(n, x + e) - 2 * yam.bubble(n, x)
                + yam.bubble(n, x - e)) / h ** 2
    rhs = n * (n - 2.0) / 4.0 * yam.bubble(n, x) ** ((n + 2.0) / (n - 2.0))
    assert -lap == pytest.approx(rhs, rel=1e-6)


def test_bubble_rescaling_invariance():
    # mu^{-(n-2)/2} U((x-xi)/mu) at x = xi equals mu^{-(n-2)/2} U(0)
    xi = np.array([1.0, 0.0, 0.0])
    mu = 0.01
    v = yam.bubble(3, xi, mu=mu, xi=xi)
    assert v == pytest.approx(mu ** -0.5 * np.sqrt(2.0))


# ---------------------------------------------------------------------------
# towers

def test_tower_scaling_guards():
    with pytest.raises(ValueError):
        yam.BubbleTower(2, 5)
    with pytest.raises(ValueError):
        yam.BubbleTower(3, 1)
    with pytest.raises(ConstraintViolated):
        yam.BubbleTower(4, 5, c_n=100.0)


def test_tower_k0_is_single_bubble():
    T = yam.BubbleTower(3, 0)
    x = np.array([0.2, 0.5, -0.1])
    assert yam.tower_eval(T, x) == yam.bubble(3, x)
    assert abs(yam.yamabe_residual(T, x)) < 1e-14


def test_tower_negative_at_centers():
    T = T3()
    assert yam.tower_eval(T, T.centers[0]) < -1.0


@given(st.integers(0, 99))
@settings(max_examples=30, deadline=None)
def test_tower_discrete_rotation_symmetry(j):
    # v_k is invariant under rotation by 2 pi / k in the (x1, x2) plane
    T = T3()
    ang = 2.0 * np.pi / T.k
    x = np.array([0.8 * np.cos(j * 0.37), 0.8 * np.sin(j * 0.37), 0.3])
    c, s = np.cos(ang), np.sin(ang)
    xr = np.array([c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]])
    assert yam.tower_eval(T, xr) == pytest.approx(yam.tower_eval(T, x),
                                                 abs=1e-12)


def test_tower_mirror_symmetry():
    T = T3()
    x = np.array([0.4, 0.9, -0.2])
    xm = np.array([0.4, -0.9, -0.2])
    assert yam.tower_eval(T, x) == pytest.approx(yam.tower_eval(T, xm),
                                                abs=1e-12)


def test_tower_far_field_decay():
    # v_k ~ r^{-(n-2)} with positive coefficient at large r
    T = T3()
    r = np.array([50.0, 100.0, 200.0])
    v = yam.tower_eval(T, np.column_stack([r, 0 * r, 0 * r]))
    assert np.all(v > 0)
    slope = np.polyfit(np.log(r), np.log(v), 1)[0]
    assert slope == pytest.approx(-(T.n - 2.0), abs=0.02)


def test_residual_fd_agreement():
    T = T3()
    x = np.array([0.5, 0.2, 0.1])
    exact = yam.yamabe_residual(T, x)
    fd = yam.fd_yamabe_residual(T, x, 1e-3)
    assert fd == pytest.approx(exact, rel=1e-3, abs=1e-8)


def test_residual_small_far_out():
    T = T3()
    x = np.array([30.0, 0.0, 0.0])
    v = yam.tower_eval(T, x)
    r30 = abs(yam.yamabe_residual(T, x))
    assert r30 < 1e-4 * abs(v)
    r100 = abs(yam.yamabe_residual(T, np.array([100.0, 0.0, 0.0])))
    assert r100 < r30


# ---------------------------------------------------------------------------
# certificates

def test_positivity_scan_and_chain():
    T = T3()
    r_bar, cert = yam.positivity_scan(T, angle_samples=180)
    assert r_bar is not None and np.isfinite(r_bar)
    # beyond r_bar every sampled margin is positive
    sel = cert.table[:, 0] > r_bar
    assert np.all(cert.table[sel, 4] > 0.0)
    # the analytic chain bound certifies some tail on its own, later than
    # (or at) the sampled transition
    assert cert.chain_certified_from is not None
    assert cert.chain_certified_from >= r_bar


def test_chain_bound_is_a_lower_bound():
    T = T3()
    r = np.geomspace(3.0, 300.0, 50)
    lb = yam.chain_lower_bound(T, r)
    v = yam.tower_eval(T, np.column_stack([r, 0 * r, 0 * r]))
    assert np.all(v >= lb - 1e-12)


def test_certificate_csv(tmp_path):
    _, cert = yam.positivity_scan(T3(), r_grid=np.geomspace(1.5, 50.0, 20),
                                  angle_samples=90)
    p = tmp_path / "cert.csv"
    cert.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "r,theta,v_k,two_thirds_U,margin"
    assert len(lines) == 21


def test_nonradiality():
    T = T3()
    assert yam.nonradiality_measure(T, 1.0) > 0.1
    assert yam.nonradiality_measure(T, 100.0) < 1e-8
    T0 = yam.BubbleTower(3, 0)
    assert yam.nonradiality_measure(T0, 1.0) < 1e-14


def test_tower_sup_norm_dominates_samples():
    T = T3()
    M = yam.tower_sup_norm(T)
    assert M >= abs(yam.tower_eval(T, T.centers[0]))
    assert M >= yam.bubble(3, np.zeros(3))


# ---------------------------------------------------------------------------
# the derived potential

def test_tower_potential():
    T = T3()
    M = yam.tower_sup_norm(T)
    W = yam.build_tower_potential(T, M, 1.1 * M)
    assert pot.validate(W)
    # odd-power region reproduces the critical nonlinearity
    n, q = 3, 4.0 / (3 - 2.0)
    coef = n * (n - 2.0) / 4.0
    for t in (0.5 * M, -0.5 * M, 1e-3):
        assert W.dw(t) == pytest.approx(-coef * np.abs(t) ** q * t, rel=1e-12)
    ss = np.linspace(1e-6, W.b - 1e-6, 501)
    assert np.all(W.dw(ss) < 0.0)
    with pytest.raises(ConstraintViolated):
        yam.build_tower_potential(T, M, 0.5 * M)
