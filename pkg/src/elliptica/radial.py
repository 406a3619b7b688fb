"""Radial ODE machinery: v'' + (n-1)/r v' = W'(v).

RK4 shooting with event detection, heteroclinic and angular profiles by
quadrature, Pohozaev checks, decay fitting, and asymptotic classification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicHermiteSpline

from .errors import (NonPositive, NotSuperharmonic, QuadratureStall,
                     RangeError, StepTooLarge)


@dataclass(frozen=True)
class RadialProfile:
    n: int
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    step: float

    def __post_init__(self):
        if not (len(self.r) == len(self.v) == len(self.dv)):
            raise ValueError("array length mismatch")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("r must be strictly increasing")

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.r, self.v, self.dv]),
                   delimiter=",", header="r,v,dv", comments="")

    def window(self, r_lo, r_hi):
        m = (self.r >= r_lo) & (self.r <= r_hi)
        return RadialProfile(self.n, self.r[m], self.v[m], self.dv[m],
                             self.step)


@dataclass(frozen=True)
class ShootClass:
    kind: str  # ExitsAbove_b | ExitsBelow_a | ApproachesB | ApproachesA | Undetermined
    exit_radius: float | None
    terminal_value: float


# ---------------------------------------------------------------------------
# RK4 with events, batched over initial values

def _rk4_step(dw, n, r, v, u, h):
    # state (v, u = v'); returns increments
    def f(rr, vv, uu):
        return uu, dw(vv) - (n - 1.0) * uu / rr
    k1v, k1u = f(r, v, u)
    k2v, k2u = f(r + 0.5 * h, v + 0.5 * h * k1v, u + 0.5 * h * k1u)
    k3v, k3u = f(r + 0.5 * h, v + 0.5 * h * k2v, u + 0.5 * h * k2u)
    k4v, k4u = f(r + h, v + h * k3v, u + h * k3u)
    return (h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v),
            h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u))


def _integrate_batch(W, n, r0, v0s, dv0s, rmax, step, a=None, b=None,
                     store=False, err_tol=1e-5, err_check_every=200):
    """Integrate many initial values on a shared grid; freeze on exit events."""
    a = W.a if a is None else a
    b = W.b if b is None else b
    dw = W.dw
    v = np.asarray(v0s, dtype=float).copy()
    u = np.asarray(dv0s, dtype=float).copy()
    m = v.shape[0]
    if r0 == 0.0:
        if np.any(u != 0.0):
            raise ValueError("regularity at the origin requires dv0 = 0")
        # second-order Taylor start removes the 1/r singularity
        g = dw(v)
        v = v + g * step ** 2 / (2.0 * n)
        u = g * step / n
        r = step
    else:
        r = r0
    nsteps = max(int(np.ceil((rmax - r) / step)), 1)
    active = np.ones(m, dtype=bool)
    kind = np.array(["Undetermined"] * m, dtype=object)
    exit_r = np.full(m, np.nan)
    traces = None
    if store:
        traces = (np.full((nsteps + 1, m), np.nan), np.full((nsteps + 1, m), np.nan),
                  np.full(nsteps + 1, np.nan))
        traces[0][0], traces[1][0], traces[2][0] = v, u, r
    for k in range(nsteps):
        h = min(step, rmax - r)
        vp, up = v.copy(), u.copy()
        dv_, du_ = _rk4_step(dw, n, r, v, u, h)
        v = np.where(active, v + dv_, v)
        u = np.where(active, u + du_, u)
        if err_check_every and (k % err_check_every == 0) and np.any(active):
            dvh1, duh1 = _rk4_step(dw, n, r, vp, up, 0.5 * h)
            dvh2, duh2 = _rk4_step(dw, n, r + 0.5 * h, vp + dvh1, up + duh1, 0.5 * h)
            err = np.abs((vp + dvh1 + dvh2) - (vp + dv_))[active] / 15.0
            if np.any(err > err_tol * (1.0 + np.abs(v[active]))):
                raise StepTooLarge(
                    f"half-step error estimate {np.max(err):.3e} at r={r:.4g}")
        r += h
        below = active & (v < a)
        above = active & (v > b)
        blow = active & (np.abs(u) > 1e8)
        for mask, name, target in ((below, "ExitsBelow_a", a),
                                   (above, "ExitsAbove_b", b)):
            if np.any(mask):
                frac = np.clip((target - vp[mask]) / (v[mask] - vp[mask]), 0.0, 1.0)
                exit_r[mask] = (r - h) + frac * h
                kind[mask] = name
                active[mask] = False
        if np.any(blow):
            exit_r[blow] = r
            kind[blow] = "Undetermined"
            active[blow] = False
        if store:
            traces[0][k + 1], traces[1][k + 1], traces[2][k + 1] = v, u, r
        if not np.any(active):
            if store:
                traces = (traces[0][:k + 2], traces[1][:k + 2], traces[2][:k + 2])
            break
    return v, u, kind, exit_r, active, traces


def _classify_terminal(v_end, dv_end, a, b, band, dv_tol):
    if abs(dv_end) < dv_tol:
        if a <= v_end <= a + band:
            return "ApproachesA"
        if b - band <= v_end <= b:
            return "ApproachesB"
    return "Undetermined"


def integrate_radial(W, n, r0, v0, dv0, rmax, step, a=None, b=None,
                     band=None, dv_tol=1e-4, err_tol=1e-5):
    """Single radial shot with event detection; returns profile and class."""
    a = W.a if a is None else a
    b = W.b if b is None else b
    if band is None:
        band = 0.02 * (b - a)
    v, u, kind, exit_r, active, traces = _integrate_batch(
        W, n, r0, [v0], [dv0], rmax, step, a=a, b=b, store=True, err_tol=err_tol)
    vs, us, rs = traces[0][:, 0], traces[1][:, 0], traces[2]
    ok = np.isfinite(vs)
    rs, vs, us = rs[ok], vs[ok], us[ok]
    if r0 == 0.0:
        rs = np.concatenate([[0.0], rs])
        vs = np.concatenate([[v0], vs])
        us = np.concatenate([[dv0], us])
    prof = RadialProfile(n, rs, vs, us, step)
    k = str(kind[0])
    if k == "Undetermined" and active[0]:
        k = _classify_terminal(vs[-1], us[-1], a, b, band, dv_tol)
    er = None if not np.isfinite(exit_r[0]) else float(exit_r[0])
    return prof, ShootClass(k, er, float(vs[-1]))


def shoot_batch(W, n, v0s, rmax, step, a=None, b=None, band=None, dv_tol=1e-4):
    """Classify a family of shots from the origin (dv0 = 0)."""
    a = W.a if a is None else a
    b = W.b if b is None else b
    if band is None:
        band = 0.02 * (b - a)
    v0s = np.asarray(v0s, dtype=float)
    v, u, kind, exit_r, active, _ = _integrate_batch(
        W, n, 0.0, v0s, np.zeros_like(v0s), rmax, step, a=a, b=b)
    out = []
    for i in range(len(v0s)):
        k = str(kind[i])
        if k == "Undetermined" and active[i]:
            k = _classify_terminal(v[i], u[i], a, b, band, dv_tol)
        er = None if not np.isfinite(exit_r[i]) else float(exit_r[i])
        out.append(ShootClass(k, er, float(v[i])))
    return out


def shoot_entire(W, n, rmax, num_scan=64, step=0.01, rounds=10, points=9,
                 margin=1e-6):
    """Bisection on v(0) between the exit-below class and the rest.

    Returns (v0_star, profile) or None when the scan finds a single class.
    """
    a, b = W.a, W.b
    v0s = a + (b - a) * np.arange(1, num_scan + 1) / (num_scan + 1.0)
    classes = shoot_batch(W, n, v0s, rmax, step)
    side = np.array([-1 if c.kind == "ExitsBelow_a" else 1 for c in classes])
    flips = np.nonzero(np.diff(side))[0]
    if len(flips) == 0:
        return None
    lo, hi = v0s[flips[0]], v0s[flips[0] + 1]
    lo_side = side[flips[0]]
    for _ in range(rounds):
        if hi - lo < margin * (b - a):
            break
        grid = np.linspace(lo, hi, points + 2)[1:-1]
        cl = shoot_batch(W, n, grid, rmax, step)
        sd = np.array([-1 if c.kind == "ExitsBelow_a" else 1 for c in cl])
        full = np.concatenate([[lo_side], sd])
        xs = np.concatenate([[lo], grid, [hi]])
        j = np.nonzero(np.diff(full))[0]
        if len(j) == 0:
            lo = grid[-1]
            continue
        lo, hi = xs[j[0]], xs[j[0] + 1]
        lo_side = full[j[0]]
    v0 = 0.5 * (lo + hi)
    prof, _ = integrate_radial(W, n, 0.0, v0, 0.0, rmax, step)
    return v0, prof


# ---------------------------------------------------------------------------
# exact singular solution of Delta v = -lam v^p

def singular_power_solution(n, p, lam, r):
    from .potential import singular_amplitude
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    A = singular_amplitude(n, p, lam)
    res = A * r ** (-2.0 / (p - 1.0))
    return float(res) if res.ndim == 0 else res


# ---------------------------------------------------------------------------
# heteroclinic orbit e'' = W'(e), e(0) = 0, e(-inf) = b, by quadrature

_GL_NODES = np.polynomial.legendre.leggauss(5)


def heteroclinic(W, smax, tol=1e-9, n_core=2000, n_tail=3000):
    """Profile e on [-smax, 0] from e'(s) = -sqrt(2 (W(e) - W(b)))."""
    b, wb = W.b, W.w(W.b)
    # curvature of the well at b; the quadratic expansion replaces the
    # cancellation-prone difference W(e) - W(b) deep in the tail
    delta = 1e-6 * (b - W.a)
    w2b = -W.dw(b - delta) / delta
    if w2b <= 0.0:
        raise QuadratureStall("degenerate well: W''(b) <= 0 numerically")
    switch = 1e-5 * (b - W.a)

    def speed(e):
        e = np.asarray(e, dtype=float)
        dist = b - e
        gap = np.where(dist < switch, 0.5 * w2b * dist ** 2, W.w(e) - wb)
        if np.any(gap <= 0.0):
            raise QuadratureStall(
                "W(e) - W(b) vanished at e = "
                f"{e[np.asarray(gap) <= 0.0].min():.6g} < b - tol")
        return np.sqrt(2.0 * gap)

    # nodes in e: uniform core, geometric clustering into the b-corner
    core = np.linspace(0.0, 0.9 * b, n_core, endpoint=False)
    gaps = 0.1 * b * np.logspace(0, -12.5, n_tail)
    e_nodes = np.concatenate([core, b - gaps])
    # cumulative s(e) by 5-point Gauss-Legendre per interval
    xg, wg = _GL_NODES
    e0, e1 = e_nodes[:-1], e_nodes[1:]
    mid, half = 0.5 * (e0 + e1), 0.5 * (e1 - e0)
    pts = mid[:, None] + half[:, None] * xg[None, :]
    vals = 1.0 / speed(pts.ravel())
    seg = half * (vals.reshape(pts.shape) @ wg)
    s_nodes = np.concatenate([[0.0], -np.cumsum(seg)])
    # invert: e as a C^1 function of s (known slope e' = -speed)
    s_rev, e_rev = s_nodes[::-1], e_nodes[::-1]
    de = -speed(np.maximum(e_rev, 0.0))
    spl = CubicHermiteSpline(s_rev, e_rev, de)
    s = np.linspace(-smax, 0.0, 4001)
    if s_nodes[-1] > -smax:
        # beyond the deepest resolvable tail node the orbit is within
        # floating-point distance of b; continue with the linearised
        # exponential approach e = b - d exp(k (s - s_end))
        k = np.sqrt(w2b)
        s_end, d_end = s_nodes[-1], b - e_nodes[-1]
        e = np.where(s >= s_end, spl(np.maximum(s, s_end)),
                     b - d_end * np.exp(k * (s - s_end)))
        dv = np.where(s >= s_end, -speed(spl(np.maximum(s, s_end))),
                      -k * d_end * np.exp(k * (s - s_end)))
    else:
        e = spl(s)
        dv = -speed(e)
    if np.any(np.diff(e) > tol):
        raise QuadratureStall("inverted profile lost monotonicity")
    return RadialProfile(1, s, e, dv, float(s[1] - s[0]))


# ---------------------------------------------------------------------------
# angular profile for the dumbbell cone supersolution

def angular_profile(c, p, g0, step=1e-4):
    """Integrate g'' = -c g^p - 4/(p-1)^2 g from g(0)=g0, g'(0)=0 to the
    first zero; returns (theta_star, profile on [0, theta_star))."""
    if g0 <= 0:
        raise ValueError("g0 > 0 required")
    om2 = 4.0 / (p - 1.0) ** 2

    def f(th, g, dg):
        return dg, -c * np.sign(g) * np.abs(g) ** p - om2 * g

    th, g, dg = 0.0, float(g0), 0.0
    ths, gs, dgs = [0.0], [g], [0.0]
    for _ in range(int(np.ceil(2.0 * np.pi / step)) + 1):
        k1g, k1d = f(th, g, dg)
        k2g, k2d = f(th + 0.5 * step, g + 0.5 * step * k1g, dg + 0.5 * step * k1d)
        k3g, k3d = f(th + 0.5 * step, g + 0.5 * step * k2g, dg + 0.5 * step * k2d)
        k4g, k4d = f(th + step, g + step * k3g, dg + step * k3d)
        gn = g + step / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g)
        dgn = dg + step / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        if gn <= 0.0:
            theta_star = th + step * g / (g - gn)
            return theta_star, (np.array(ths), np.array(gs), np.array(dgs))
        th, g, dg = th + step, gn, dgn
        ths.append(th)
        gs.append(g)
        dgs.append(dg)
    raise RuntimeError("no zero of g within one period; check parameters")


# ---------------------------------------------------------------------------
# Pohozaev identity on a radial profile

@dataclass(frozen=True)
class PohozaevCheck:
    r: float
    lhs: float
    rhs: float
    residual: float


def pohozaev_residual(W, prof, r):
    """Volume integral vs boundary terms of the Pohozaev identity at radius r.

    The boundary term at the profile's inner radius is subtracted, so the
    residual measures identity error for profiles on annuli as well.
    """
    n = prof.n
    if n < 3:
        raise ValueError("n >= 3 required")
    if r > prof.r[-1] + 1e-12 or r < prof.r[0] - 1e-12:
        raise RangeError(f"r = {r} outside profile range")
    k = int(np.argmin(np.abs(prof.r - r)))
    rr, vv, uu = prof.r[:k + 1], prof.v[:k + 1], prof.dv[:k + 1]
    integrand = rr ** (n - 1) * ((n - 2.0) / 2.0 * W.dw(vv) * vv - n * W.w(vv))
    lhs = float(simpson(integrand, x=rr))

    def bterm(i):
        s = prof.r[i]
        return ((n - 2.0) / 2.0 * s ** (n - 1) * prof.v[i] * prof.dv[i]
                + s ** n * (prof.dv[i] ** 2 / 2.0 - W.w(prof.v[i])))

    rhs = bterm(k) - bterm(0)
    return PohozaevCheck(float(prof.r[k]), lhs, rhs, lhs - rhs)


# ---------------------------------------------------------------------------
# decay fitting and comparison bounds

def decay_exponent(prof, r_lo, r_hi):
    """Least-squares power-law fit of v on [r_lo, r_hi]: (alpha, c, r2)."""
    win = prof.window(r_lo, r_hi)
    rr, vv = win.r, win.v
    if len(rr) < 3:
        raise RangeError("fit window holds fewer than 3 samples")
    if np.any(vv <= 0):
        raise NonPositive("v must be positive on the fit window")
    x, y = np.log(rr), np.log(vv)
    alpha, logc = np.polyfit(x, y, 1)
    resid = y - (alpha * x + logc)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(alpha), float(np.exp(logc)), r2


def radial_laplacian(prof):
    """Finite-difference v'' + (n-1) v'/r on the interior grid nodes."""
    r, v = prof.r, prof.v
    d2 = np.gradient(np.gradient(v, r), r)
    d1 = np.gradient(v, r)
    lap = d2.copy()
    pos = r > 0
    lap[pos] += (prof.n - 1) * d1[pos] / r[pos]
    lap[~pos] = prof.n * d2[~pos]
    return lap


def superharmonic_lower_bound(prof, rho, screen_tol=1e-6, slack=1e-9):
    """Comparison bound v(r) >= v(rho) rho^{n-2} r^{2-n} for positive
    superharmonic radial profiles, n >= 3."""
    if prof.n < 3:
        raise ValueError("n >= 3 required")
    m = prof.r >= rho
    rr, vv = prof.r[m], prof.v[m]
    if np.any(vv <= 0):
        raise NonPositive("profile must be positive beyond rho")
    lap = radial_laplacian(prof)[m]
    scale = max(np.max(np.abs(lap)), 1.0)
    if np.any(lap[2:-2] > screen_tol * scale):
        raise NotSuperharmonic(
            f"radial Laplacian reaches {np.max(lap[2:-2]):.3e} > 0")
    c = float(vv[0] * rr[0] ** (prof.n - 2))
    holds = bool(np.all(vv >= c * rr ** (2.0 - prof.n) - slack))
    return c, holds


def limit_classifier(prof, a, b, band, dv_tol=None):
    """Terminal-band classification of a profile: 'A', 'B', or 'Neither'."""
    if dv_tol is None:
        dv_tol = 0.1 * band
    v_end, dv_end = prof.v[-1], prof.dv[-1]
    if abs(dv_end) < dv_tol:
        if a - band <= v_end <= a + band:
            return "A"
        if b - band <= v_end <= b + band:
            return "B"
    return "Neither"
