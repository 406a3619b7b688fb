"""Sign-changing, non-radial approximate solutions of the critical equation
-Delta u = n(n-2)/4 |u|^{4/(n-2)} u built from bubble towers: one positive
bubble at the origin minus k shrunken negative bubbles on the unit circle.

Includes the analytic equation residual (each bubble is an exact solution),
positivity certificates outside a ball, a nonradiality measure, and the
double-well-type potential that turns the tower into a counterexample
profile.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolated, ConstructionFailed
from .potential import Piece, Potential, estimate_lipschitz


@dataclass(frozen=True)
class BubbleTower:
    """k negative rescaled bubbles on the unit circle below a central one.

    mu_k = c_n k^{-2} for n >= 4 and c_3 k^{-2} (log k)^{-2} for n = 3.
    correction_c >= 0 is the assumed constant of the correction-term bound
    c / (log k (1 + |x|)) (n = 3) or c / (k^{alpha_n} (1 + |x|^{n-2}))
    (n >= 4); the corrections themselves are not computed here.
    """

    n: int
    k: int
    c_n: float = 1.0
    correction_c: float = 0.0
    alpha_n: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n >= 3 required")
        if self.k < 0:
            raise ValueError("k >= 0 required")
        if self.n == 3 and self.k == 1:
            raise ValueError("n = 3 needs k >= 2 (log k > 0)")
        if self.k > 0 and not 0.0 < self.mu_k < 1.0:
            raise ConstraintViolated(f"mu_k = {self.mu_k} outside (0, 1)")

    @property
    def mu_k(self):
        if self.k == 0:
            return 1.0
        if self.n >= 4:
            return self.c_n * self.k ** -2.0
        return self.c_n * self.k ** -2.0 * np.log(self.k) ** -2.0

    @property
    def centers(self):
        """k-th roots of unity embedded in the first two coordinates."""
        j = np.arange(1, self.k + 1)
        pts = np.zeros((self.k, self.n))
        pts[:, 0] = np.cos(2.0 * np.pi * j / self.k)
        pts[:, 1] = np.sin(2.0 * np.pi * j / self.k)
        return pts

    def to_json(self):
        return json.dumps({"n": self.n, "k": self.k, "c_n": self.c_n,
                           "correction_c": self.correction_c,
                           "alpha_n": self.alpha_n, "mu_k": self.mu_k},
                          sort_keys=True)


def _points(n, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.size != n:
            raise ValueError(f"point must have {n} coordinates")
        return x[None, :], True
    if x.shape[-1] != n:
        raise ValueError(f"points must have {n} coordinates")
    return x.reshape(-1, n), False


def bubble(n, x, mu=1.0, xi=None):
    """Standard bubble U(x) = (2/(1+|x|^2))^{(n-2)/2}, optionally rescaled
    to mu^{-(n-2)/2} U((x - xi)/mu)."""
    pts, single = _points(n, x)
    if xi is not None:
        pts = pts - np.asarray(xi, dtype=float)[None, :]
    r2 = np.sum((pts / mu) ** 2, axis=1)
    out = mu ** (-(n - 2.0) / 2.0) * (2.0 / (1.0 + r2)) ** ((n - 2.0) / 2.0)
    return float(out[0]) if single else out.reshape(np.shape(x)[:-1])


def tower_eval(T, x):
    """v_k(x): central bubble minus the k rescaled circle bubbles."""
    pts, single = _points(T.n, x)
    out = bubble(T.n, pts)
    for xi in T.centers:
        out = out - bubble(T.n, pts, mu=T.mu_k, xi=xi)
    return float(out[0]) if single else out.reshape(np.shape(x)[:-1])


def yamabe_residual(T, x):
    """-Delta v_k - n(n-2)/4 |v_k|^{4/(n-2)} v_k, evaluated in closed form.

    Each bubble solves the equation exactly, so -Delta v_k equals
    n(n-2)/4 (U^q - sum_j U_j^q) with q = (n+2)/(n-2).
    """
    n = T.n
    q = (n + 2.0) / (n - 2.0)
    coef = n * (n - 2.0) / 4.0
    pts, single = _points(n, x)
    U = bubble(n, pts)
    v = U.copy()
    s = U ** q
    for xi in T.centers:
        Uj = bubble(n, pts, mu=T.mu_k, xi=xi)
        v = v - Uj
        s = s - Uj ** q
    out = coef * (s - np.abs(v) ** (q - 1.0) * v)
    return float(out[0]) if single else out.reshape(np.shape(x)[:-1])


def fd_yamabe_residual(T, x, h):
    """Finite-difference version of yamabe_residual (central second
    differences in each coordinate), for cross-checking the closed form."""
    n = T.n
    q = (n + 2.0) / (n - 2.0)
    coef = n * (n - 2.0) / 4.0
    pts, single = _points(n, x)
    lap = np.zeros(pts.shape[0])
    v0 = tower_eval(T, pts)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        lap += tower_eval(T, pts + e) - 2.0 * v0 + tower_eval(T, pts - e)
    lap /= h ** 2
    out = -lap - coef * np.abs(v0) ** (q - 1.0) * v0
    return float(out[0]) if single else out.reshape(np.shape(x)[:-1])


@dataclass
class PositivityCertificate:
    """Sampled 2/3-bound certificate with the proof's analytic chain."""

    r_bar: float | None
    table: np.ndarray  # columns r, theta, v_k, (2/3) U, margin
    radii: np.ndarray
    all_angles_ok: np.ndarray
    chain_certified_from: float | None = None
    correction_ok: bool | None = None

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("r,theta,v_k,two_thirds_U,margin\n")
            for row in self.table:
                fh.write(",".join(f"{c:.12g}" for c in row) + "\n")


def chain_lower_bound(T, r):
    """The proof's explicit radial lower bound for v_k on |x| = r > 1:
    U(r) (1 - dimension-dependent interaction factor)."""
    r = np.asarray(r, dtype=float)
    n, k = T.n, T.k
    U = (2.0 / (1.0 + r ** 2)) ** ((n - 2.0) / 2.0)
    ratio = ((1.0 + r ** 2) / (r - 1.0) ** 2) ** ((n - 2.0) / 2.0)
    if n == 3:
        fac = np.sqrt(T.c_n) / np.log(k)
    else:
        fac = T.c_n ** ((n - 2.0) / 2.0) / float(k) ** (n - 3.0)
    return U * (1.0 - fac * ratio)


def positivity_scan(T, r_grid=None, angle_samples=720):
    """Smallest sampled radius beyond which v_k > (2/3) U at every sample.

    Samples circles in the (x1, x2) plane.  Returns (r_bar, certificate);
    r_bar is None (not found) when even the largest sampled radius fails.
    The certificate also reports where the proof's analytic bound chain
    certifies the inequality on its own, and -- when correction_c > 0 --
    whether v_k minus the correction bound still exceeds U/2 beyond r_bar.
    """
    if r_grid is None:
        r_grid = np.geomspace(0.1, 1000.0, 200)
    r_grid = np.asarray(r_grid, dtype=float)
    th = np.linspace(0.0, 2.0 * np.pi, angle_samples, endpoint=False)
    n = T.n
    rows = []
    ok = np.empty(r_grid.size, dtype=bool)
    for i, r in enumerate(r_grid):
        pts = np.zeros((th.size, n))
        pts[:, 0] = r * np.cos(th)
        pts[:, 1] = r * np.sin(th)
        v = tower_eval(T, pts)
        u23 = (2.0 / 3.0) * bubble(n, pts)
        margin = v - u23
        ok[i] = bool(np.all(margin > 0.0))
        jworst = int(np.argmin(margin))
        rows.append((r, th[jworst], v[jworst], u23[jworst], margin[jworst]))
    table = np.array(rows)

    if not ok[-1]:
        r_bar = None
    else:
        bad = np.nonzero(~ok)[0]
        r_bar = float(r_grid[bad[-1]]) if bad.size else float(r_grid[0])

    cert = PositivityCertificate(r_bar, table, r_grid, ok)
    # analytic chain: certified where the closed-form lower bound beats 2/3 U
    past1 = r_grid > 1.0
    if past1.any() and T.k > 0:
        rr = r_grid[past1]
        U = (2.0 / (1.0 + rr ** 2)) ** ((n - 2.0) / 2.0)
        chain_ok = chain_lower_bound(T, rr) > (2.0 / 3.0) * U
        good = np.nonzero(~chain_ok)[0]
        if chain_ok[-1]:
            cert.chain_certified_from = float(
                rr[good[-1] + 1] if good.size else rr[0])
    if T.correction_c > 0.0 and r_bar is not None:
        sel = table[:, 0] > r_bar
        rsel, vsel = table[sel, 0], table[sel, 2]
        if n == 3:
            corr = T.correction_c / (np.log(T.k) * (1.0 + rsel))
        else:
            corr = T.correction_c / (T.k ** T.alpha_n
                                     * (1.0 + rsel ** (n - 2.0)))
        Uhalf = 0.5 * (2.0 / (1.0 + rsel ** 2)) ** ((n - 2.0) / 2.0)
        cert.correction_ok = bool(np.all(vsel - corr > Uhalf))
    return r_bar, cert


def nonradiality_measure(T, r, angle_samples=720):
    """Oscillation (max - min) of v_k over the circle of radius r in the
    (x1, x2) plane; zero exactly for radial functions."""
    if r <= 0:
        raise ValueError("r > 0 required")
    th = np.linspace(0.0, 2.0 * np.pi, angle_samples, endpoint=False)
    pts = np.zeros((th.size, T.n))
    pts[:, 0] = r * np.cos(th)
    pts[:, 1] = r * np.sin(th)
    v = tower_eval(T, pts)
    return float(np.max(v) - np.min(v))


def tower_sup_norm(T, n_r=400, angle_samples=360):
    """Dense-sample estimate of sup |v_k| (+ the correction allowance)."""
    worst = abs(tower_eval(T, np.zeros(T.n)))
    # the negative extrema sit exactly at the bubble centers; sample them
    # directly since their width mu_k is far below any angular resolution
    if T.k > 0:
        worst = max(worst, float(np.max(np.abs(tower_eval(T, T.centers)))))
    # the extrema live at the origin and near the bubble circle
    radii = np.concatenate([
        np.geomspace(1e-3, 0.5, 40),
        1.0 + T.mu_k * np.linspace(-50.0, 50.0, n_r),
        np.geomspace(2.0, 100.0, 40),
    ])
    th = np.linspace(0.0, 2.0 * np.pi, angle_samples, endpoint=False)
    for r in radii:
        if r <= 0:
            continue
        pts = np.zeros((th.size, T.n))
        pts[:, 0] = r * np.cos(th)
        pts[:, 1] = r * np.sin(th)
        worst = max(worst, float(np.max(np.abs(tower_eval(T, pts)))))
    return worst + T.correction_c


def build_tower_potential(T, bound_M, b):
    """Potential whose derivative is the Yamabe nonlinearity
    -n(n-2)/4 |t|^{4/(n-2)} t for |t| <= bound_M, extended C^1 with
    W' < 0 on (0, b) and a local minimum at b."""
    if b <= bound_M:
        raise ConstraintViolated("need b > bound_M")
    n = T.n
    q = 4.0 / (n - 2.0)
    coef = n * (n - 2.0) / 4.0
    y0 = -coef * bound_M ** (q + 1.0)
    d0 = -coef * (q + 1.0) * bound_M ** q
    um = 0.5 * (bound_M + b)
    y_min = 1.3 * y0
    d_b = 2.0 * (0.0 - y_min) / (b - um)
    lo = -10.0 * b
    pieces = (
        Piece(lo, bound_M, "odd_power", {"coef": coef, "q": q}),
        Piece(bound_M, um, "hermite", {"x0": bound_M, "x1": um, "y0": y0,
                                       "y1": y_min, "d0": d0, "d1": 0.0}),
        Piece(um, b, "hermite", {"x0": um, "x1": b, "y0": y_min, "y1": 0.0,
                                 "d0": 0.0, "d1": d_b}),
    )
    lip = max(coef * (q + 1.0) * bound_M ** q,
              estimate_lipschitz(pieces[1].funcs()[0], bound_M, um),
              estimate_lipschitz(pieces[2].funcs()[0], um, b))
    W = Potential(0.0, b, pieces, lip,
                  label=f"tower-well(n={n},M={bound_M},b={b})")
    ss = np.linspace(0.0, b, 2001)[1:-1]
    if np.max(W.dw(ss)) >= 0.0:
        raise ConstructionFailed("W' must be negative on (0, b)")
    return W
