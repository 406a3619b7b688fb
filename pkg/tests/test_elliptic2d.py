import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elliptica import elliptic2d as e2
from elliptica import potential as pot
from elliptica import radial as rad
from elliptica.errors import ConstraintViolated, OutOfMask


# ---------------------------------------------------------------------------
# grids and fields

def test_box_grid_tags():
    g = e2.DomainGrid.box(((0.0, 1.0), (0.0, 1.0)), 0.25)
    assert g.mask.shape == (5, 5)
    assert g.interior.sum() == 9
    assert g.boundary.sum() == 16
    assert g.defined.all()


def test_ball_grid_radius():
    g = e2.DomainGrid.ball(2.0, 0.1)
    xx, yy = g.meshgrid()
    r = np.hypot(xx, yy)
    assert np.all(r[g.defined] < 2.0 + 1e-12)
    assert not np.any(g.interior & (r > 2.0))


def test_dumbbell_grid_symmetry():
    g = e2.DomainGrid.dumbbell(0.3, 0.5, 10.0, 0.25)
    assert np.array_equal(g.mask, g.mask[::-1, :])
    assert np.array_equal(g.mask, g.mask[:, ::-1])


def test_neck_width():
    lam, eps = 0.3, 0.5
    s = np.linspace(-2.0, 2.0, 401)
    w = e2.neck_width(s, lam, eps)
    assert np.all(w > 0.0)
    assert np.min(w) == pytest.approx(lam * eps / 2.0, rel=1e-12)
    # the neck pinches strictly below the outer cone width
    assert e2.neck_width(eps - 1e-9, lam, eps) < e2.neck_width(eps + 1e-9, lam, eps)
    assert np.allclose(w, w[::-1])


def test_laplacian_exact_on_quadratic():
    g = e2.DomainGrid.box(((-1.0, 1.0), (-1.0, 1.0)), 0.1)
    f = e2.Field.from_function(g, lambda x, y: x ** 2 + y ** 2)
    lap = e2.laplacian_5pt(f)
    assert np.max(np.abs(lap.values[g.interior] - 4.0)) < 1e-10


def test_field_csv(tmp_path):
    g = e2.DomainGrid.box(((0.0, 1.0), (0.0, 1.0)), 0.5)
    f = e2.Field.from_function(g, lambda x, y: x + 2 * y)
    p = tmp_path / "f.csv"
    f.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + g.defined.sum()


# ---------------------------------------------------------------------------
# monotone iteration

def test_monotone_iteration_fixed_point():
    # boundary data at the stable state: the supersolution b is the solution
    W = pot.truncate_potential(pot.double_well())
    g = e2.DomainGrid.box(((0.0, 2.0), (0.0, 2.0)), 0.1)
    sub = e2.Field.full(g, W.a)
    super_ = e2.Field.full(g, W.b)
    u, log = e2.monotone_iteration(W, sub, super_, tol=1e-10)
    assert log.converged
    assert np.max(np.abs(u.values[g.defined] - W.b)) < 1e-8
    assert all(log.ordering_ok)
    # energy is nonincreasing along the iterates
    assert all(b <= a + 1e-12 for a, b in zip(log.energies, log.energies[1:]))


def test_monotone_iteration_rejects_bad_order():
    W = pot.truncate_potential(pot.double_well())
    g = e2.DomainGrid.box(((0.0, 1.0), (0.0, 1.0)), 0.25)
    with pytest.raises(ConstraintViolated):
        e2.monotone_iteration(W, e2.Field.full(g, W.b), e2.Field.full(g, W.a))


def test_monotone_iteration_two_sided_agreement():
    W = pot.truncate_potential(pot.double_well())
    g = e2.DomainGrid.box(((0.0, 3.0), (0.0, 3.0)), 0.15)
    bnd = e2.Field.from_function(g, lambda x, y: 0.5 * np.ones_like(x))
    sub = e2.Field.full(g, W.a)
    super_ = e2.Field.full(g, W.b)
    tol = 1e-9
    ud, _ = e2.monotone_iteration(W, sub, super_, tol=tol, start="super",
                                  boundary=bnd)
    uu, _ = e2.monotone_iteration(W, sub, super_, tol=tol, start="sub",
                                  boundary=bnd)
    gap = np.max(np.abs(ud.values[g.defined] - uu.values[g.defined]))
    assert gap < 1e-6


def test_screen_barrier_flags_defect():
    W = pot.truncate_potential(pot.double_well())
    g = e2.DomainGrid.box(((0.0, 1.0), (0.0, 1.0)), 0.1)
    good = e2.Field.full(g, W.b)  # exact solution: zero defect
    d, frac = e2.screen_barrier(W, good, "super")
    assert d < 1e-12 and frac == 1.0
    bad = e2.Field.from_function(g, lambda x, y: W.b - 0.2 * x * (1 - x))
    d2, _ = e2.screen_barrier(W, bad, "super")
    assert d2 > 0.1


# ---------------------------------------------------------------------------
# envelopes and bilinear sampling

def test_radial_envelope_of_plane():
    g = e2.DomainGrid.ball(2.0, 0.05)
    f = e2.Field.from_function(g, lambda x, y: x)
    radii = np.linspace(0.2, 1.5, 40)
    env = e2.radial_envelope(f, 64, radii=radii)
    # min of x over the circle of radius r is -r; bilinear is exact on planes
    assert np.max(np.abs(env.v + radii)) < 1e-10


def test_radial_envelope_out_of_mask():
    g = e2.DomainGrid.ball(2.0, 0.1)
    f = e2.Field.from_function(g, lambda x, y: x)
    with pytest.raises(OutOfMask):
        e2.radial_envelope(f, 32, radii=np.array([5.0]))


@given(st.integers(3, 7))
@settings(max_examples=10, deadline=None)
def test_radial_envelope_more_angles_never_larger(k):
    g = e2.DomainGrid.ball(2.0, 0.1)
    f = e2.Field.from_function(g, lambda x, y: np.cos(3 * np.arctan2(y, x)) + x * y)
    radii = np.linspace(0.3, 1.2, 10)
    coarse = e2.radial_envelope(f, 2 ** k, radii=radii)
    fine = e2.radial_envelope(f, 2 ** (k + 1), radii=radii)
    assert np.all(fine.v <= coarse.v + 1e-12)


# ---------------------------------------------------------------------------
# exterior annuli

def test_exterior_solve_barriers():
    W = pot.truncate_potential(pot.double_well())
    (prof,) = e2.exterior_solve(W, 1.0, [20.0], 0.5, n=3, h=0.05)
    assert prof.v[0] == pytest.approx(0.5)
    sub = W.a + (0.5 - W.a) * 1.0 / prof.r
    assert np.all(prof.v >= sub - 1e-8)
    assert np.all(prof.v <= W.b + 1e-12)
    assert rad.limit_classifier(prof.window(1.0, 10.0), W.a, W.b, 0.02) == "B"


def test_exterior_solve_bad_datum():
    W = pot.truncate_potential(pot.double_well())
    with pytest.raises(ConstraintViolated):
        e2.exterior_solve(W, 1.0, [10.0], 1.5, n=3)


# ---------------------------------------------------------------------------
# ball minimizers

def test_energy_minimize_ball_basic():
    W = pot.truncate_potential(pot.double_well())
    prof, delta = e2.energy_minimize_ball(W, 5.0, 0.0, 0.1, n=3)
    assert prof.v[-1] == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < delta < W.b
    assert np.all(prof.v >= -1e-9) and np.all(prof.v <= W.b + 1e-9)
    # beats the trivial competitor v = 0
    e_min = e2.radial_energy(W, prof.r, prof.v, 3)
    e_triv = e2.radial_energy(W, prof.r, np.zeros_like(prof.r), 3)
    assert e_min < e_triv


def test_delta_r_shrinks_with_radius():
    W = pot.truncate_potential(pot.double_well())
    _, d5 = e2.energy_minimize_ball(W, 5.0, 0.0, 0.1, n=3)
    _, d10 = e2.energy_minimize_ball(W, 10.0, 0.0, 0.1, n=3)
    assert d10 < d5


# ---------------------------------------------------------------------------
# dumbbell barriers (coarse smoke; the full solve runs in the acceptance suite)

def test_dumbbell_barriers_ordered():
    W = pot.power_well()
    g = e2.DomainGrid.dumbbell(0.3, 0.5, 10.0, 0.25)
    super_ = e2.dumbbell_supersolution(1.0, 2, 0.3, 0.5, W.b, g)
    sub = e2.dumbbell_subsolution(W, g)
    d = g.defined
    assert np.all(sub.values[d] <= super_.values[d] + 1e-12)
    assert np.all(super_.values[d] <= W.b + 1e-12)
    assert np.all(sub.values[d] >= W.a - 1e-12)
    # the subsolution carries the 1-D connection on the left, a on the right
    xx, _ = g.meshgrid()
    assert np.all(sub.values[d & (xx > 0)] == W.a)
    assert np.min(sub.values[d & (xx < -8.0)]) > 0.9 * W.b


def test_sector_profile_positive_inside():
    theta_star, gfun = e2.sector_profile(1.0, 2.0, 1.0)
    th = np.linspace(0.0, 0.999 * theta_star, 100)
    assert np.all(gfun(th) > 0.0)
    assert gfun(theta_star + 0.5) == 0.0


# ---------------------------------------------------------------------------
# domain statistics

def test_domain_ball_stats_box():
    g = e2.DomainGrid.box(((-3.0, 3.0), (-3.0, 3.0)), 0.1)
    r_in, r_out = e2.domain_ball_stats(g)
    assert r_in == pytest.approx(3.0, abs=0.15)
    assert r_out == 0.0


def test_domain_ball_stats_annulus():
    g = e2.DomainGrid.annulus(1.0, 3.0, 0.05)
    r_in, r_out = e2.domain_ball_stats(g)
    assert r_in == pytest.approx(1.0, abs=0.1)
    assert r_out == pytest.approx(1.0, abs=0.1)
