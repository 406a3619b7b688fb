import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elliptica import potential as pot
from elliptica.errors import ConstraintViolated, ConstructionFailed, Degenerate


# ---------------------------------------------------------------------------
# cubic roots

def test_ch_roots_delta0():
    z = pot.ch_roots(0.0)
    assert abs(z.z1 + 1.0) < 1e-12
    assert abs(z.z2) < 1e-12
    assert abs(z.z3 - 1.0) < 1e-12


def test_ch_roots_known_value():
    # delta = 0.2: cubic t^3 - t + 0.2
    z = pot.ch_roots(0.2)
    for t in (z.z1, z.z2, z.z3):
        assert abs(t ** 3 - t + 0.2) < 1e-12


def test_ch_roots_degenerate():
    with pytest.raises(Degenerate):
        pot.ch_roots(2.0 / (3.0 * np.sqrt(3.0)))
    with pytest.raises(Degenerate):
        pot.ch_roots(1.0)


@given(st.floats(-0.999, 0.999))
@settings(max_examples=200, deadline=None)
def test_ch_roots_interlacing(frac):
    delta = frac * 2.0 / (3.0 * np.sqrt(3.0))
    z = pot.ch_roots(delta)
    lim = 1.0 / np.sqrt(3.0)
    assert z.z1 < -lim < z.z2 < lim < z.z3
    for t in (z.z1, z.z2, z.z3):
        assert abs(t ** 3 - t + delta) < 1e-11


# ---------------------------------------------------------------------------
# potentials and invariants

def test_double_well_values():
    W = pot.double_well()
    assert W.a == 0.0 and W.b == 1.0
    # W(t) = t^4/4 - t^2/2 + const with W(a) = 0
    s = np.linspace(0.0, 1.0, 11)
    assert np.allclose(W.w(s), s ** 4 / 4 - s ** 2 / 2)
    assert np.allclose(W.dw(s), s ** 3 - s)
    assert pot.validate(W)


def test_cahn_hilliard_shifted():
    W = pot.cahn_hilliard(0.1)
    z = pot.ch_roots(0.1)
    assert W.a == pytest.approx(z.z2, abs=1e-12)
    assert W.b == pytest.approx(z.z3, abs=1e-12)
    assert pot.validate(W)


def test_w_is_exact_primitive():
    W = pot.double_well()
    # finite difference of w matches dw
    s = np.linspace(0.05, 0.95, 50)
    d = 1e-6
    fd = (W.w(s + d) - W.w(s - d)) / (2 * d)
    assert np.max(np.abs(fd - W.dw(s))) < 1e-8


@given(st.floats(-0.9, 0.9), st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_json_roundtrip(frac, spos):
    delta = frac * 2.0 / (3.0 * np.sqrt(3.0))
    W = pot.cahn_hilliard(delta)
    W2 = pot.Potential.from_json(W.to_json())
    s = W.a + spos * (W.b - W.a)
    assert W.dw(s) == W2.dw(s)
    assert W.w(s) == W2.w(s)


def test_truncate_preserves_core():
    W = pot.double_well()
    Wt = pot.truncate_potential(W)
    s = np.linspace(0.0, 1.0, 201)
    assert np.allclose(Wt.dw(s), W.dw(s))
    # constant continuation outside
    assert Wt.dw(-0.5) == 0.0 and Wt.dw(1.5) == 0.0
    assert Wt.w(-0.5) == Wt.w(0.0)


def test_extend_even():
    W = pot.extend_even_double_well(pot.double_well())
    s = np.linspace(0.0, 1.0, 33)
    assert np.allclose(W.w(-s), W.w(s))
    assert np.allclose(W.dw(-s), -W.dw(s))


# ---------------------------------------------------------------------------
# growth conditions

def test_check_growth_double_well():
    g = pot.check_growth(pot.double_well(), 3)
    assert g.holds_nondeg and g.holds_nondeg2


def test_check_growth_entire_decaying_fails_nondeg2():
    W, _ = pot.build_entire_decaying_potential(3, 4.0, 1.0)
    g = pot.check_growth(W, 3)
    assert not g.holds_nondeg2
    assert not g.holds_nondeg


# ---------------------------------------------------------------------------
# singular amplitude and the counterexample construction

def test_singular_amplitude_value():
    # n=3, p=4, lam=1: A^3 = q(n-2-q) with q=2/3
    assert pot.singular_amplitude(3, 4.0, 1.0) == pytest.approx(
        (2.0 / 9.0) ** (1.0 / 3.0), abs=1e-15)


def test_amplitude_identity_matrix():
    for n in (3, 4, 5):
        lo, hi = n / (n - 2.0), (n + 2.0) / (n - 2.0)
        for p in np.linspace(lo, hi, 5)[1:-1]:
            for lam in (0.5, 1.0, 2.0):
                q = 2.0 / (p - 1.0)
                A = pot.singular_amplitude(n, p, lam)
                assert abs(A ** (p - 1.0) * lam - q * (n - 2.0 - q)) < 1e-14


def test_entire_decaying_construction():
    con = pot.EntireDecayingConstruction(3, 4.0, 1.0)
    W = con.potential()
    assert pot.validate(W)
    r = np.linspace(0.0, 50.0, 20011)
    resid = np.max(np.abs(con.laplacian(r) - W.dw(con.u(r))))
    assert resid < 1e-8
    # pure power behaviour near the origin of the state space
    for u in (1e-2 * con.s3, 1e-4 * con.s3):
        assert W.dw(u) / u ** 4 == pytest.approx(-1.0, rel=1e-12)
    # nondegenerate minimum at the plateau value
    assert con.H_u0 < 0.0 < con.dH_u0


def test_obstruction_pohozaev_positive():
    W = pot.build_obstruction_potential(3, 4.0, 1.0, 1.0)
    u = np.linspace(1e-9, 1.0, 1001)
    comb = pot.pohozaev_combination(W, 3, u)
    eps = 3.0 / 5.0 - 0.5
    assert np.max(np.abs(comb - eps * 1.0 * u ** 5)) < 1e-12
    ub = np.linspace(1e-6, W.b, 2001)
    assert np.min(pot.pohozaev_combination(W, 3, ub)) > 0.0


def test_obstruction_constraint():
    with pytest.raises(ConstraintViolated):
        pot.build_obstruction_potential(3, 4.0, 1.0, 1.0, kappa=1.3, mu=1.1)


def test_power_well():
    W = pot.power_well(c=1.0, p=2, t1=0.5, b=1.0)
    assert pot.validate(W)
    s = np.linspace(0.0, 0.5, 21)
    assert np.allclose(W.dw(s), -s ** 2)
    ss = np.linspace(1e-6, 1.0 - 1e-6, 501)
    assert np.all(W.dw(ss) >= -1.0 * ss ** 2 - 1e-12)
