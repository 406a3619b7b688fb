"""Potentials W with a local maximum at a and a local minimum at b.

A potential is stored as an ordered list of pieces, each with a closed-form
derivative W' and an exact antiderivative, so W is the exact primitive of
the piecewise representation (normalised to W(a) = w_at_a).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import ConstraintViolated, ConstructionFailed, Degenerate

CH_DELTA_MAX = 2.0 / (3.0 * np.sqrt(3.0))


# ---------------------------------------------------------------------------
# pieces

def _make_piece_funcs(kind, lo, hi, params):
    """Return (dw, antideriv) callables; antideriv vanishes at lo."""
    if kind == "poly":
        c = np.asarray(params["coeffs"], dtype=float)  # ascending powers of s
        dpoly = np.polynomial.Polynomial(c)
        apoly = dpoly.integ()
        off = apoly(lo)
        return dpoly, lambda s: apoly(s) - off
    if kind == "power":
        lam, p, s0 = params["lam"], params["p"], params.get("s0", 0.0)

        def dw(s):
            return -lam * np.maximum(np.asarray(s, dtype=float) - s0, 0.0) ** p

        def anti(s):
            t = np.maximum(np.asarray(s, dtype=float) - s0, 0.0)
            t0 = max(lo - s0, 0.0)
            return -lam * (t ** (p + 1) - t0 ** (p + 1)) / (p + 1)

        return dw, anti
    if kind == "odd_power":
        # dW = -coef * |s|^q * s  (the Yamabe nonlinearity shape)
        coef, q = params["coef"], params["q"]

        def dw(s):
            s = np.asarray(s, dtype=float)
            return -coef * np.abs(s) ** q * s

        def anti(s):
            s = np.asarray(s, dtype=float)
            return -coef * (np.abs(s) ** (q + 2) - abs(lo) ** (q + 2)) / (q + 2)

        return dw, anti
    if kind == "hermite":
        spl = CubicHermiteSpline(
            [params["x0"], params["x1"]],
            [params["y0"], params["y1"]],
            [params["d0"], params["d1"]],
        )
        aspl = spl.antiderivative()
        off = aspl(lo)
        return spl, lambda s: aspl(s) - off
    if kind == "hermite_table":
        xs = np.asarray(params["xs"], dtype=float)
        ys = np.asarray(params["ys"], dtype=float)
        ds = params.get("ds")
        if ds is not None:
            spl = CubicHermiteSpline(xs, ys, np.asarray(ds, dtype=float))
        else:
            spl = PchipInterpolator(xs, ys)
        aspl = spl.antiderivative()
        off = aspl(lo)
        return spl, lambda s: aspl(s) - off
    if kind == "zero":
        return (lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                lambda s: np.zeros_like(np.asarray(s, dtype=float)))
    raise ValueError(f"unknown piece kind {kind!r}")


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    kind: str
    params: dict = field(default_factory=dict)

    def funcs(self):
        return _make_piece_funcs(self.kind, self.lo, self.hi, self.params)


@dataclass(frozen=True)
class Potential:
    """Piecewise potential on a working interval; immutable after build.

    a is the local maximum of W, b the local minimum (a < b), pieces are
    contiguous and ordered, lipschitz_dw bounds |W''| on [a, b].  If `even`
    is set, W is extended evenly about a (used by the heteroclinic solver).
    """

    a: float
    b: float
    pieces: tuple
    lipschitz_dw: float
    label: str = ""
    w_at_a: float = 0.0
    even: bool = False

    def __post_init__(self):
        bounds = []
        dws, antis, cum = [], [], [0.0]
        for i, pc in enumerate(self.pieces):
            if i > 0 and abs(pc.lo - self.pieces[i - 1].hi) > 1e-9:
                raise ValueError("pieces must be contiguous")
            dw, anti = pc.funcs()
            dws.append(dw)
            antis.append(anti)
            cum.append(cum[-1] + float(anti(pc.hi)))
            bounds.append(pc.hi)
        object.__setattr__(self, "_bounds", np.array(bounds[:-1]))
        object.__setattr__(self, "_dws", dws)
        object.__setattr__(self, "_antis", antis)
        object.__setattr__(self, "_cum", np.array(cum[:-1]))
        # normalise the primitive so that W(a) = w_at_a
        object.__setattr__(self, "_w_off", 0.0)
        object.__setattr__(self, "_w_off", self.w_at_a - self._w_raw(self.a))

    @property
    def lo(self):
        return self.pieces[0].lo

    @property
    def hi(self):
        return self.pieces[-1].hi

    def _reflect(self, s):
        s = np.asarray(s, dtype=float)
        if not self.even:
            return s, np.ones_like(s)
        neg = s < self.a
        return np.where(neg, 2.0 * self.a - s, s), np.where(neg, -1.0, 1.0)

    def dw(self, s):
        """Evaluate W'(s), vectorised."""
        s, sign = self._reflect(s)
        sc = np.clip(s, self.lo, self.hi)
        idx = np.searchsorted(self._bounds, sc, side="right")
        out = np.empty_like(sc)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._dws[i](sc[m])
        res = sign * out
        return float(res) if np.isscalar(res) or res.ndim == 0 else res

    def _w_raw(self, s):
        s = np.asarray(s, dtype=float)
        sc = np.clip(s, self.lo, self.hi)
        idx = np.searchsorted(self._bounds, sc, side="right")
        out = np.empty_like(sc)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._cum[i] + self._antis[i](sc[m])
        return out

    def w(self, s):
        """Evaluate W(s), the exact primitive of the piecewise W'."""
        s, _ = self._reflect(s)
        res = self._w_raw(s) + self._w_off
        return float(res) if np.isscalar(res) or res.ndim == 0 else res

    # -- serialization ------------------------------------------------------

    def to_json(self):
        def enc(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        return json.dumps({
            "a": self.a, "b": self.b, "label": self.label,
            "lipschitz_dw": self.lipschitz_dw, "w_at_a": self.w_at_a,
            "even": self.even,
            "pieces": [{"lo": p.lo, "hi": p.hi, "kind": p.kind,
                        "params": {k: enc(v) for k, v in p.params.items()}}
                       for p in self.pieces],
        }, sort_keys=True)

    @staticmethod
    def from_json(text):
        d = json.loads(text)
        pieces = tuple(Piece(p["lo"], p["hi"], p["kind"], p["params"])
                       for p in d["pieces"])
        return Potential(d["a"], d["b"], pieces, d["lipschitz_dw"],
                         d["label"], d["w_at_a"], d["even"])


def estimate_lipschitz(dw, lo, hi, num=4001):
    s = np.linspace(lo, hi, num)
    y = dw(s)
    return float(np.max(np.abs(np.diff(y) / np.diff(s))))


def validate(W, num=2001, junction_tol=1e-8, crit_tol=1e-10):
    """Check the Potential invariants; raise ConstructionFailed on failure."""
    scale0 = max(1.0, float(np.max(np.abs(W.dw(
        np.linspace(W.a, W.b, 64))))))
    if abs(W.dw(W.a)) > crit_tol * scale0 or abs(W.dw(W.b)) > crit_tol * scale0:
        raise ConstructionFailed("W'(a) or W'(b) is not zero")
    s = np.linspace(W.a, W.b, num + 2)[1:-1]
    if np.any(W.dw(s) >= 0.0):
        raise ConstructionFailed("W' is not negative on (a, b)")
    for p0, p1 in zip(W.pieces[:-1], W.pieces[1:]):
        x = p0.hi
        dw0, _ = p0.funcs()
        dw1, _ = p1.funcs()
        scale = max(1.0, abs(float(dw0(x))))
        if abs(float(dw0(x)) - float(dw1(x))) > junction_tol * scale:
            raise ConstructionFailed(f"W' jump at junction s={x}")
        h = 1e-6 * max(1.0, abs(x))
        d0 = (float(dw0(x)) - float(dw0(x - h))) / h
        d1 = (float(dw1(x + h)) - float(dw1(x))) / h
        # C^{1,1}: one-sided W'' values stay bounded; kinks in W'' are allowed
        if not (np.isfinite(d0) and np.isfinite(d1)):
            raise ConstructionFailed(f"unbounded W'' at junction s={x}")
    return True


# ---------------------------------------------------------------------------
# Cahn-Hilliard cubic

@dataclass(frozen=True)
class CubicRoots:
    z1: float
    z2: float
    z3: float


def ch_roots(delta):
    """Ordered real roots of t^3 - t + delta by the trigonometric formula."""
    if abs(delta) >= CH_DELTA_MAX - 1e-12:
        raise Degenerate(f"|delta| = {abs(delta)} >= 2/(3*sqrt(3)): double root")
    arg = np.clip(-1.5 * np.sqrt(3.0) * delta, -1.0, 1.0)
    theta = np.arccos(arg)
    roots = [2.0 / np.sqrt(3.0) * np.cos(theta / 3.0 - 2.0 * np.pi * k / 3.0)
             for k in range(3)]
    # one Newton polish step
    polished = []
    for z in roots:
        f, df = z ** 3 - z + delta, 3.0 * z ** 2 - 1.0
        polished.append(z - f / df)
    z1, z2, z3 = sorted(polished)
    return CubicRoots(z1, z2, z3)


def cahn_hilliard(delta=0.0, margin=0.5):
    """Potential for W'(u) = u^3 - u + delta on [z2, z3]."""
    r = ch_roots(delta)
    a, b = r.z2, r.z3
    pieces = (Piece(a - margin, b + margin, "poly",
                    {"coeffs": [delta, -1.0, 0.0, 1.0]}),)
    lip = estimate_lipschitz(lambda s: s ** 3 - s + delta, a, b)
    return Potential(a, b, pieces, lip, label=f"cahn-hilliard(delta={delta})")


def double_well():
    """The classical double well 0.25*(1-t^2)^2 viewed on (0, 1)."""
    pieces = (Piece(-1.5, 1.5, "poly", {"coeffs": [0.0, -1.0, 0.0, 1.0]}),)
    lip = estimate_lipschitz(lambda s: s ** 3 - s, 0.0, 1.0)
    return Potential(0.0, 1.0, pieces, lip, label="double-well",
                     w_at_a=0.0)


# ---------------------------------------------------------------------------
# growth conditions near the local maximum

@dataclass(frozen=True)
class GrowthReport:
    holds_nondeg: bool
    holds_nondeg2: bool
    c0_nondeg: float
    c0_nondeg2: float
    s0: float
    n: int
    evidence: np.ndarray  # columns: s, W'(s), ratio -W'(s)/(s-a)^{n/(n-2)}


def check_growth(W, n, s0=None, num=400, c0_min=1e-6):
    """Largest C0 with W'(s) <= -C0 (s-a)^q on (a, s0], for q = 1 and n/(n-2).

    The infimum of -W'(s)/(s-a)^q over a log-spaced sample approaching a
    decides whether a positive C0 exists; a vanishing infimum means the
    growth condition fails.
    """
    if n < 2:
        raise ValueError("n >= 2 required")
    if s0 is None:
        s0 = W.a + 0.5 * (W.b - W.a)
    span = s0 - W.a
    s = W.a + span * np.logspace(-9, 0, num)
    dws = W.dw(s)
    out = {}
    for q in (1.0, n / (n - 2.0) if n >= 3 else None):
        if q is None:
            out[1.0] = out.get(1.0)
            continue
        ratio = -dws / (s - W.a) ** q
        c0 = float(np.min(ratio))
        out[q] = max(c0, 0.0)
    qc = n / (n - 2.0) if n >= 3 else None
    c0_lin = out.get(1.0, 0.0)
    c0_crit = out.get(qc, 0.0) if qc is not None else 0.0
    ratio_crit = (-dws / (s - W.a) ** qc) if qc is not None else np.zeros_like(s)
    scale = max(abs(W.dw(W.a + span)), 1e-30) / span
    return GrowthReport(
        holds_nondeg=c0_lin > c0_min * scale,
        holds_nondeg2=(qc is not None) and c0_crit > c0_min * scale,
        c0_nondeg=c0_lin,
        c0_nondeg2=c0_crit,
        s0=float(s0),
        n=n,
        evidence=np.column_stack([s, dws, ratio_crit]),
    )


# ---------------------------------------------------------------------------
# quintic smoothstep cutoff on [2, 3]

def smoothstep(r, lo=2.0, hi=3.0):
    t = np.clip((np.asarray(r, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def smoothstep_d(r, lo=2.0, hi=3.0):
    t = np.clip((np.asarray(r, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    return 30.0 * t ** 2 * (1.0 - t) ** 2 / (hi - lo)


# ---------------------------------------------------------------------------
# counterexample potential with a decaying radial solution

def singular_amplitude(n, p, lam):
    if p <= n / (n - 2.0):
        raise ValueError("p > n/(n-2) required")
    return (2.0 * ((n - 2.0) * p - n) / (lam * (p - 1.0) ** 2)) ** (1.0 / (p - 1.0))


class EntireDecayingConstruction:
    """Radially decreasing entire profile and its potential.

    Holds closed-form / high-accuracy evaluators for u, u', and the radial
    Laplacian of u, so tests can measure the PDE residual without finite
    differences.
    """

    def __init__(self, n, p, lam, b=None, n_fine=16001):
        if n < 3 or p <= n / (n - 2.0) or lam <= 0:
            raise ValueError("need n >= 3, p > n/(n-2), lam > 0")
        self.n, self.p, self.lam = n, p, lam
        q = 2.0 / (p - 1.0)
        A = singular_amplitude(n, p, lam)
        self.q, self.A = q, A

        vt = lambda r: A * r ** (-q)
        vtp = lambda r: -q * A * r ** (-q - 1.0)
        vtpp = lambda r: q * (q + 1.0) * A * r ** (-q - 2.0)
        vtppp = lambda r: -q * (q + 1.0) * (q + 2.0) * A * r ** (-q - 3.0)
        self._vt, self._vtp, self._vtpp = vt, vtp, vtpp

        # integrate u'' = xi * vt'' backwards from r = 3 on [1, 3]
        rg = np.linspace(1.0, 3.0, n_fine)
        upp = smoothstep(rg) * vtpp(rg)
        self._rg = rg
        self._up = self._anti_back(rg, upp, vtp(3.0))
        self._u = self._anti_back(rg, self._up, vt(3.0))
        self._uppp = smoothstep_d(rg) * vtpp(rg) + smoothstep(rg) * vtppp(rg)
        self._upp = upp
        u1, s1 = float(self._u[0]), float(self._up[0])
        if s1 >= 0:
            raise ConstructionFailed("slope at r=1 is not negative")

        # even polynomial extension on [0, 1]: u = a0 + a2 r^2 + a4 r^4 + a6 r^6
        # matching (value, slope, curvature=0) at r=1 with margin parameter m
        m = 0.5 * abs(s1)
        ok = False
        for _ in range(60):
            a4 = -m
            a6 = (8.0 * m - s1) / 24.0
            a2 = -6.0 * a4 - 15.0 * a6
            rr = np.linspace(0.0, 1.0, 2001)[:-1]
            curv = 2.0 * a2 + 12.0 * a4 * rr ** 2 + 30.0 * a6 * rr ** 4
            if a2 < 0.0 and a4 < 0.0 and np.all(curv < 0.0):
                ok = True
                break
            m *= 0.5
        if not ok:
            raise ConstructionFailed("even extension: curvature sign constraint")
        a0 = u1 - a2 - a4 - a6
        self.coeffs = (a0, a2, a4, a6)
        self.u0 = a0

        spl_u = CubicHermiteSpline(rg, self._u, self._up)
        spl_up = CubicHermiteSpline(rg, self._up, self._upp)
        spl_upp = CubicHermiteSpline(rg, self._upp, self._uppp)
        self._spl = (spl_u, spl_up, spl_upp)

        # nonlinearity H(s) = Laplacian(u)(beta(s)); exact power below u(3)
        self.s3 = vt(3.0)
        b_default = 2.0 * self.u0
        self.b = b_default if b is None else b

        # tables of H over s in [u(3), u(0)].  H' has a jump at s = u(1)
        # (u''' is discontinuous there), so the range is split into two
        # tables that share the knot with one-sided derivatives.
        def _make_table(r_tab):
            s_t = self.u(r_tab)
            h_t = self.laplacian(r_tab)
            dh_t = self._dH_ds(r_tab)
            order = np.argsort(s_t)
            s_t, h_t, dh_t = s_t[order], h_t[order], dh_t[order]
            keep = np.concatenate([[True], np.diff(s_t) > 1e-14])
            return s_t[keep], h_t[keep], dh_t[keep]

        self._table_out = _make_table(np.linspace(1.0, 3.0, 5001))
        s_in, h_in, dh_in = _make_table(np.linspace(0.0, 1.0, 2501))
        # one-sided H' at s = u(1) from the inner polynomial branch
        num1 = 24 * a4 + 120 * a6 + (n - 1) * (8 * a4 + 24 * a6)
        dh_in[0] = num1 / float(self.up(np.array([1.0]))[0])
        h_in[0] = self._table_out[1][-1]
        self._table_in = (s_in, h_in, dh_in)

        self.H_u0 = float(n * self.upp(0.0))
        self.dH_u0 = float(4.0 * (n + 2.0) * a4 / a2)
        if not (self.H_u0 < 0.0 and self.dH_u0 > 0.0):
            raise ConstructionFailed("endpoint signs H(u(0)) < 0 < H'(u(0)) failed")

        # C^1 extension of H on [u(0), b] with H < 0 inside and H(b) = 0
        for _ in range(40):
            d1 = abs(self.H_u0) / (self.b - self.u0)
            spl = CubicHermiteSpline([self.u0, self.b], [self.H_u0, 0.0],
                                     [self.dH_u0, d1])
            ss = np.linspace(self.u0, self.b, 801)[1:-1]
            if np.all(spl(ss) < 0.0):
                break
            self.b = 0.5 * (self.u0 + self.b)
        else:
            raise ConstructionFailed("H extension stays negative: no admissible b")
        self._ext_d1 = d1

    @staticmethod
    def _anti_back(x, y, y_end):
        """Antiderivative with value y_end at x[-1] (composite Simpson)."""
        from scipy.integrate import cumulative_simpson
        c = cumulative_simpson(y, x=x, initial=0.0)
        return y_end - (c[-1] - c)

    # -- profile evaluators -------------------------------------------------

    def u(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        a0, a2, a4, a6 = self.coeffs
        out = np.empty_like(r)
        m0 = r < 1.0
        m1 = (r >= 1.0) & (r <= 3.0)
        m2 = r > 3.0
        out[m0] = a0 + a2 * r[m0] ** 2 + a4 * r[m0] ** 4 + a6 * r[m0] ** 6
        out[m1] = self._spl[0](r[m1])
        out[m2] = self._vt(r[m2])
        return out

    def up(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        a0, a2, a4, a6 = self.coeffs
        out = np.empty_like(r)
        m0 = r < 1.0
        m1 = (r >= 1.0) & (r <= 3.0)
        m2 = r > 3.0
        out[m0] = 2 * a2 * r[m0] + 4 * a4 * r[m0] ** 3 + 6 * a6 * r[m0] ** 5
        out[m1] = self._spl[1](r[m1])
        out[m2] = self._vtp(r[m2])
        return out

    def upp(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        a0, a2, a4, a6 = self.coeffs
        out = np.empty_like(r)
        m0 = r < 1.0
        m1 = (r >= 1.0) & (r <= 3.0)
        m2 = r > 3.0
        out[m0] = 2 * a2 + 12 * a4 * r[m0] ** 2 + 30 * a6 * r[m0] ** 4
        out[m1] = self._spl[2](r[m1])
        out[m2] = self._vtpp(r[m2])
        return out

    def laplacian(self, r):
        """u'' + (n-1) u'/r, with the removable singularity at r = 0 filled."""
        r = np.asarray(r, dtype=float)
        n = self.n
        a0, a2, a4, a6 = self.coeffs
        out = np.empty_like(r)
        m0 = r < 1.0
        # on [0,1): u'/r is itself a polynomial in r^2
        out[m0] = (2 * a2 + 12 * a4 * r[m0] ** 2 + 30 * a6 * r[m0] ** 4
                   + (n - 1) * (2 * a2 + 4 * a4 * r[m0] ** 2 + 6 * a6 * r[m0] ** 4))
        m = ~m0
        out[m] = self.upp(r[m]) + (n - 1) * self.up(r[m]) / r[m]
        return out

    def _dH_ds(self, r):
        r = np.asarray(r, dtype=float)
        n = self.n
        a0, a2, a4, a6 = self.coeffs
        num = np.empty_like(r)
        m0 = (r < 1.0) & (r > 0.0)
        num[m0] = (24 * a4 * r[m0] + 120 * a6 * r[m0] ** 3
                   + (n - 1) * (8 * a4 * r[m0] + 24 * a6 * r[m0] ** 3))
        m1 = (r >= 1.0) & (r <= 3.0)
        rr = r[m1]
        uppp = (smoothstep_d(rr) * self.q * (self.q + 1) * self.A * rr ** (-self.q - 2)
                + smoothstep(rr) * (-self.q * (self.q + 1) * (self.q + 2)
                                    * self.A * rr ** (-self.q - 3)))
        num[m1] = uppp + (n - 1) * (self.upp(rr) / rr - self.up(rr) / rr ** 2)
        m2 = r > 3.0
        # exact power region: H = -lam s^p so dH/ds = -lam p s^(p-1)
        out = np.empty_like(r)
        out[m2] = -self.lam * self.p * self.u(r[m2]) ** (self.p - 1.0)
        den = self.up(r)
        inner = (m0 | m1)
        out[inner] = num[inner] / den[inner]
        z = r == 0.0
        out[z] = 4.0 * (self.n + 2.0) * a4 / a2
        return out

    # -- exported artifacts -------------------------------------------------

    def potential(self):
        n, p, lam = self.n, self.p, self.lam
        s_out, h_out, dh_out = self._table_out
        s_in, h_in, dh_in = self._table_in
        pieces = (
            Piece(0.0, float(s_out[0]), "power", {"lam": lam, "p": p, "s0": 0.0}),
            Piece(float(s_out[0]), float(s_out[-1]), "hermite_table",
                  {"xs": s_out, "ys": h_out, "ds": dh_out}),
            Piece(float(s_in[0]), float(s_in[-1]), "hermite_table",
                  {"xs": s_in, "ys": h_in, "ds": dh_in}),
            Piece(float(s_in[-1]), self.b, "hermite",
                  {"x0": self.u0, "x1": self.b, "y0": self.H_u0, "y1": 0.0,
                   "d0": self.dH_u0, "d1": self._ext_d1}),
        )
        lip = max(
            estimate_lipschitz(lambda s: -lam * s ** p, 0.0, self.s3),
            float(np.max(np.abs(dh_out))), float(np.max(np.abs(dh_in))),
            abs(self.dH_u0), self._ext_d1,
        )
        return Potential(0.0, self.b, pieces, lip,
                         label=f"entire-decaying(n={n},p={p},lam={lam})")

    def profile(self, rmax=100.0, step=0.01):
        from .radial import RadialProfile
        r = np.arange(0.0, rmax + 0.5 * step, step)
        return RadialProfile(self.n, r, self.u(r), self.up(r), step)


def build_entire_decaying_potential(n, p, lam, rmax=100.0, step=0.01):
    """Potential with W'(u) ~ -lam u^p near 0 and its entire radial solution."""
    c = EntireDecayingConstruction(n, p, lam)
    return c.potential(), c.profile(rmax=rmax, step=step)


# ---------------------------------------------------------------------------
# obstruction potential (no entire radial solution in (0, b))

def build_obstruction_potential(n, p, lam, beta, kappa=1.05, mu=1.1):
    """Pure power -lam u^p on [0, beta], extended so the scaled Pohozaev
    combination (n-2)/2 W'(u) u - n W(u) stays positive up to b = kappa*beta."""
    if not (n >= 3 and n / (n - 2.0) < p < (n + 2.0) / (n - 2.0)):
        raise ValueError("p must lie in (n/(n-2), (n+2)/(n-2))")
    eps = n / (p + 1.0) - (n - 2.0) / 2.0
    if kappa * mu >= 1.0 + 2.0 * eps / (n - 2.0):
        raise ConstraintViolated(
            f"kappa*mu = {kappa * mu} >= 1 + 2*eps/(n-2) = "
            f"{1.0 + 2.0 * eps / (n - 2.0)}")
    b = kappa * beta
    h_beta = -lam * beta ** p
    d_beta = -lam * p * beta ** (p - 1.0)
    h_min = -lam * mu * beta ** p
    um = 0.5 * (beta + b)
    # monotone Hermite segments: down to the range minimum, then up to zero
    d_b = 2.0 * (0.0 - h_min) / (b - um)
    seg1 = Piece(beta, um, "hermite", {"x0": beta, "x1": um, "y0": h_beta,
                                       "y1": h_min, "d0": d_beta, "d1": 0.0})
    seg2 = Piece(um, b, "hermite", {"x0": um, "x1": b, "y0": h_min,
                                    "y1": 0.0, "d0": 0.0, "d1": d_b})
    pieces = (Piece(0.0, beta, "power", {"lam": lam, "p": p, "s0": 0.0}),
              seg1, seg2)
    lip = max(lam * p * beta ** (p - 1.0),
              estimate_lipschitz(seg1.funcs()[0], beta, um),
              estimate_lipschitz(seg2.funcs()[0], um, b))
    W = Potential(0.0, b, pieces, lip, label=f"obstruction(n={n},p={p},lam={lam})")
    # range bound H([0,b]) = [h_min, 0] (monotone segments make this exact)
    ss = np.linspace(0.0, b, 2001)
    if np.min(W.dw(ss)) < h_min - 1e-9 * abs(h_min):
        raise ConstructionFailed("H range bound violated")
    return W


def power_well(c=1.0, p=2.0, t1=0.5, b=1.0):
    """Double-well-type potential with W'(t) = -c t^p on [0, t1] and the
    polynomial taper W'(t) = -c t^p (b - t)/(b - t1) up to the minimum at b.

    By construction W'(t) >= -c t^p on all of (0, b) with the same constant,
    which is the hypothesis needed for cone-type supersolutions, and the
    Lipschitz constant of W' stays moderate (unlike the steep obstruction
    wells).  Requires p a positive integer for the polynomial taper.
    """
    if not (0.0 < t1 < b):
        raise ValueError("need 0 < t1 < b")
    ip = int(round(p))
    if abs(p - ip) > 1e-12 or ip < 1:
        raise ValueError("p must be a positive integer")
    # -c t^p (b - t)/(b - t1) in ascending coefficients
    coeffs = [0.0] * (ip + 2)
    coeffs[ip] = -c * b / (b - t1)
    coeffs[ip + 1] = c / (b - t1)
    pieces = (Piece(0.0, t1, "power", {"lam": c, "p": float(ip), "s0": 0.0}),
              Piece(t1, b, "poly", {"coeffs": coeffs}))
    lip = max(c * ip * t1 ** (ip - 1),
              estimate_lipschitz(pieces[1].funcs()[0], t1, b))
    return Potential(0.0, b, pieces, lip,
                     label=f"power_well(c={c},p={ip},t1={t1},b={b})")


def pohozaev_combination(W, n, u):
    """(n-2)/2 * W'(u) u - n W(u), the sign that obstructs decaying solutions."""
    u = np.asarray(u, dtype=float)
    return (n - 2.0) / 2.0 * W.dw(u) * u - n * W.w(u)


# ---------------------------------------------------------------------------
# clamping and even extension

def truncate_potential(W, mode="clamp-below-a-and-above-b", level=None):
    """Constant continuation of W outside the retained interval."""
    big = 10.0 * (abs(W.a) + abs(W.b) + 1.0)
    if mode == "clamp-below-a-and-above-b":
        cut_lo, cut_hi = W.a, W.b
    elif mode == "clamp-below-level":
        if level is None:
            raise ValueError("clamp-below-level requires level")
        cut_lo, cut_hi = level, W.hi
    else:
        raise ValueError(f"unknown mode {mode!r}")
    inner = tuple(p for p in W.pieces if p.hi > cut_lo + 1e-15 and p.lo < cut_hi - 1e-15)
    inner = tuple(Piece(max(p.lo, cut_lo), min(p.hi, cut_hi), p.kind, p.params)
                  for p in inner)
    pieces = (Piece(cut_lo - big, cut_lo, "zero", {}),) + inner
    if cut_hi < W.hi - 1e-15 or mode == "clamp-below-a-and-above-b":
        pieces = pieces + (Piece(cut_hi, cut_hi + big, "zero", {}),)
    return replace(W, pieces=pieces, label=W.label + "|truncated")


def extend_even_double_well(W):
    """Even extension about a = 0 with outward growth beyond b."""
    if abs(W.a) > 1e-12:
        raise ValueError("extension assumes the local maximum sits at a = 0")
    slope = max(1.0, W.lipschitz_dw)
    inner = tuple(p for p in W.pieces if p.lo < W.b - 1e-15 and p.hi > 0.0)
    inner = tuple(Piece(max(p.lo, 0.0), min(p.hi, W.b), p.kind, p.params)
                  for p in inner)
    ramp = Piece(W.b, W.b + 10.0 * (W.b + 1.0), "poly",
                 {"coeffs": [-slope * W.b, slope]})
    return replace(W, pieces=inner + (ramp,), even=True,
                   label=W.label + "|even-extended")
