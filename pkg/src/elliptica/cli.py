"""Command-line experiment runner.

    elliptica run --experiment E3 --config cfg.json --out dir/ \
        --override lam=2.0

Each experiment wires the library modules into a named study, writes a JSON
report (schema 1), CSV artifacts, and SVG plots into the output directory.
Exit code is 0 iff every check passes.  Reports are deterministic for a
fixed config and seed, except for the "timing" block.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import elliptic2d as e2
from . import potential as pot
from . import radial as rad
from . import yamabe as yam

SCHEMA = 1
EXPERIMENTS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7")


def _json_default(obj):
    """Make numpy scalars and arrays JSON-friendly."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    out: str = "."
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; "
                f"valid ids: {', '.join(EXPERIMENTS)}")
        for key, val in self.params.items():
            if isinstance(val, (int, float)) and not isinstance(val, bool) \
                    and val <= 0:
                raise ValueError(f"parameter {key} must be positive")

    def get(self, key, default):
        return self.params.get(key, default)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def check(self, name, passed, **numbers):
        self.checks.append({"name": name,
                            "status": "pass" if passed else "fail",
                            **numbers})

    def info(self, name, **numbers):
        self.checks.append({"name": name, "status": "info", **numbers})

    @property
    def all_pass(self):
        return all(c["status"] != "fail" for c in self.checks)

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "experiment": self.config.experiment,
            "config": {"params": self.config.params,
                       "seed": self.config.seed},
            "checks": self.checks,
            "artifacts": self.artifacts,
            "all_pass": self.all_pass,
            "timing": self.timing,
        }

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True,
                      default=_json_default)
            fh.write("\n")


def _artifact(report, kind, path, **meta):
    report.artifacts.append({"kind": kind, "path": os.path.basename(path),
                             **meta})
    return path


# ---------------------------------------------------------------------------
# experiment runners

def _run_e1(cfg, report, out):
    """Cubic roots, interlacing, and growth-condition verdicts."""
    delta = cfg.get("delta", 0.0)
    n = int(cfg.get("n", 3))
    roots = pot.ch_roots(delta)
    report.info("roots", delta=delta, z1=roots.z1, z2=roots.z2, z3=roots.z3)
    if delta == 0.0:
        err = max(abs(roots.z1 + 1.0), abs(roots.z2), abs(roots.z3 - 1.0))
        report.check("roots_delta0", err < 1e-12, error=err)
    rng = np.random.default_rng(cfg.seed)
    lim = 1.0 / np.sqrt(3.0)
    worst_f, inter_ok = 0.0, True
    for d in rng.uniform(-pot.CH_DELTA_MAX, pot.CH_DELTA_MAX, 20) * 0.999:
        z = pot.ch_roots(d)
        inter_ok &= z.z1 < -lim < z.z2 < lim < z.z3
        worst_f = max(worst_f, *(abs(t ** 3 - t + d)
                                 for t in (z.z1, z.z2, z.z3)))
    report.check("interlacing_random", inter_ok and worst_f < 1e-12,
                 worst_residual=worst_f)
    W = pot.cahn_hilliard(delta)
    g = pot.check_growth(W, n)
    report.info("growth", holds_nondeg=g.holds_nondeg,
                holds_nondeg2=g.holds_nondeg2, c0_nondeg=g.c0_nondeg,
                c0_nondeg2=g.c0_nondeg2)
    with open(os.path.join(out, "potential.json"), "w") as fh:
        fh.write(W.to_json())
    _artifact(report, "potential_json", "potential.json")
    s = np.linspace(W.a, W.b, 401)
    np.savetxt(os.path.join(out, "well.csv"),
               np.column_stack([s, W.w(s), W.dw(s)]),
               delimiter=",", header="s,W,dW", comments="")
    _artifact(report, "curve_csv", "well.csv", x="s", ys=["W", "dW"])


def _run_e2(cfg, report, out):
    """Exterior family under the stronger growth condition: limits trend
    to b while the barriers are respected."""
    W = pot.truncate_potential(pot.double_well())
    rho = cfg.get("rho", 1.0)
    R_list = cfg.get("R_list", [20.0, 40.0, 80.0])
    binner = cfg.get("boundary_inner", 0.5)
    g = pot.check_growth(W, int(cfg.get("n", 3)))
    report.check("growth_nondeg2", g.holds_nondeg2)
    fam = e2.exterior_solve(W, rho, R_list, binner, n=int(cfg.get("n", 3)))
    cst = (binner - W.a) * rho ** (fam[0].n - 2)
    ok_bar = True
    for pr in fam:
        sub = W.a + cst * pr.r ** (2.0 - pr.n)
        ok_bar &= bool(np.all(pr.v >= sub - 1e-8)
                       and np.all(pr.v <= W.b + 1e-8))
    report.check("within_barriers", ok_bar)
    big = fam[-1]
    verdict = rad.limit_classifier(big.window(rho, 0.5 * R_list[-1]),
                                   W.a, W.b, 0.05)
    report.check("classifies_B", verdict == "B", verdict=verdict)
    diffs = []
    for pa, pb in zip(fam[:-1], fam[1:]):
        wa = pa.window(rho, 0.5 * pa.r[-1])
        diffs.append(float(np.max(np.abs(
            np.interp(wa.r, pb.r, pb.v) - wa.v))))
    report.check("nested_stability", all(np.diff(diffs) <= 0.0),
                 sup_diffs=diffs)
    for pr in fam:
        name = f"exterior_R{int(pr.r[-1])}.csv"
        pr.to_csv(os.path.join(out, name))
        _artifact(report, "profile_csv", name)


def _run_e3(cfg, report, out):
    """Counterexample construction: entire decaying radial solution with a
    nondegenerate minimum, plus its decay rate."""
    n = int(cfg.get("n", 3))
    p = cfg.get("p", 4.0)
    lam = cfg.get("lam", 1.0)
    W, prof = pot.build_entire_decaying_potential(n, p, lam)
    con = pot.EntireDecayingConstruction(n, p, lam)
    r = np.linspace(0.0, prof.r[-1], 4 * prof.r.size - 3)
    resid = float(np.max(np.abs(con.laplacian(r) - W.dw(con.u(r)))))
    report.check("residual_sup", resid < 1e-6, residual=resid)
    alpha, _, r2 = rad.decay_exponent(prof, 10.0, prof.r[-1])
    target = -2.0 / (p - 1.0)
    report.check("decay_exponent", abs(alpha - target) < 0.01 * abs(target),
                 alpha=alpha, target=target, r_squared=r2)
    d = 1e-7
    w2 = (W.dw(con.u0 + d) - W.dw(con.u0 - d)) / (2 * d)
    report.check("curvature_at_plateau", w2 > 0.0, w_second=w2)
    verdict = rad.limit_classifier(prof, W.a, W.b, 0.05)
    report.check("classifies_A", verdict == "A", verdict=verdict)
    prof.to_csv(os.path.join(out, "profile.csv"))
    _artifact(report, "profile_csv", "profile.csv", loglog=True,
              slope=alpha)
    with open(os.path.join(out, "potential.json"), "w") as fh:
        fh.write(W.to_json())
    _artifact(report, "potential_json", "potential.json")


def _run_e4(cfg, report, out):
    """Obstruction well: positive scaled combination blocks decaying
    entire solutions, and the shooting scan finds none."""
    n = int(cfg.get("n", 3))
    p = cfg.get("p", 4.0)
    lam = cfg.get("lam", 2000.0)
    beta = cfg.get("beta", 1.0)
    rmax = cfg.get("Rmax", 200.0)
    step = cfg.get("step", 0.005)
    W = pot.build_obstruction_potential(n, p, lam, beta)
    u = np.linspace(1e-6 * W.b, W.b, 2001)
    comb = pot.pohozaev_combination(W, n, u)
    report.check("pohozaev_positive", float(np.min(comb)) > 0.0,
                 min_combination=float(np.min(comb)))
    found = rad.shoot_entire(W, n, rmax, step=step)
    report.check("shoot_not_found", found is None)
    v0s = W.a + (W.b - W.a) * np.arange(1, 65) / 65.0
    classes = rad.shoot_batch(W, n, v0s, rmax, step)
    kinds = [c.kind for c in classes]
    report.check("all_starts_exit",
                 all(k.startswith("Exits") for k in kinds))
    np.savetxt(os.path.join(out, "scan.csv"),
               np.column_stack([v0s,
                                [c.exit_radius or np.nan for c in classes]]),
               delimiter=",", header="v0,exit_radius", comments="")
    _artifact(report, "curve_csv", "scan.csv", x="v0", ys=["exit_radius"])
    with open(os.path.join(out, "potential.json"), "w") as fh:
        fh.write(W.to_json())
    _artifact(report, "potential_json", "potential.json")


def _run_e5(cfg, report, out):
    """Dumbbell double limit: b on the left lobe, a on the right."""
    c = cfg.get("c", 1.0)
    p = cfg.get("p", 2.0)
    W = pot.power_well(c=c, p=p, t1=cfg.get("t1", 0.5), b=cfg.get("b", 1.0))
    lam = cfg.get("lam_slope", 0.3)
    eps = cfg.get("eps", 0.5)
    L = cfg.get("L", 40.0)
    h = cfg.get("h", 0.25)
    grid = e2.DomainGrid.dumbbell(lam, eps, L, h)
    u, rep = e2.solve_dumbbell(W, grid, cfg.get("tol", 1e-6), c, p)
    report.check("left_slab_near_b",
                 abs(rep["left_slab_mean"] - W.b) < 0.05,
                 mean=rep["left_slab_mean"], b=W.b)
    report.check("right_slab_near_a",
                 abs(rep["right_slab_mean"] - W.a) < 0.05,
                 mean=rep["right_slab_mean"], a=W.a)
    report.check("boundary_minimum", rep["boundary_minimum"],
                 min_interior=rep["min_interior"],
                 min_boundary=rep["min_boundary"])
    report.info("iteration", iterations=rep["iterations"],
                sub_defect=rep["sub_defect"],
                super_defect=rep["super_defect"])
    u.to_csv(os.path.join(out, "dumbbell.csv"))
    _artifact(report, "field", "dumbbell.csv", vmin=W.a, vmax=W.b,
              grid=json.loads(grid.to_json()))
    _field_svg = u.to_svg(os.path.join(out, "dumbbell.svg"),
                          title="dumbbell solution")
    _artifact(report, "field_svg", "dumbbell.svg")


def _run_e6(cfg, report, out):
    """Ball minimizers: the plateau defect delta_R shrinks with R."""
    W = pot.truncate_potential(pot.double_well())
    n = int(cfg.get("n", 3))
    h = cfg.get("h", 0.05)
    bv = cfg.get("boundary_value", 0.0)
    R_list = cfg.get("R_list", [5.0, 10.0, 20.0])
    deltas = []
    for R in R_list:
        prof, dR = e2.energy_minimize_ball(W, R, bv, h, n=n)
        deltas.append(dR)
        in_range = bool(np.all(prof.v >= W.a - 1e-9)
                        and np.all(prof.v <= W.b - dR + 1e-9))
        report.check(f"range_R{int(R)}", in_range and dR > 0.0, delta=dR)
        name = f"ball_R{int(R)}.csv"
        prof.to_csv(os.path.join(out, name))
        _artifact(report, "profile_csv", name)
    report.check("delta_decreasing", all(np.diff(deltas) < 0.0),
                 deltas=deltas)
    report.check("delta_halves", deltas[-1] < 0.5 * deltas[0],
                 first=deltas[0], last=deltas[-1])


def _run_e7(cfg, report, out):
    """Bubble-tower positivity and nonradiality certificates."""
    n = int(cfg.get("n", 3))
    k = int(cfg.get("k", 100))
    c_n = cfg.get("c_n", 1.0)
    T = yam.BubbleTower(n, k, c_n,
                        correction_c=cfg.params.get("correction_c", 0.0))
    r_bar, cert = yam.positivity_scan(
        T, angle_samples=int(cfg.get("angle_samples", 720)))
    report.check("r_bar_finite", r_bar is not None, r_bar=r_bar,
                 chain_certified_from=cert.chain_certified_from)
    # the negative bubbles have width mu_k << angular spacing, so probe a
    # center directly in addition to the scan samples
    vmin = min(float(np.min(cert.table[:, 2])),
               yam.tower_eval(T, T.centers[0]))
    vmax = max(yam.tower_eval(T, np.zeros(n)), float(np.max(cert.table[:, 2])))
    report.check("sign_change", vmin < 0.0 < vmax, min=vmin, max=vmax)
    nr1 = yam.nonradiality_measure(T, 1.0)
    nr100 = yam.nonradiality_measure(T, 100.0)
    report.check("nonradial", nr1 > 0.1 and nr1 > nr100, at_r1=nr1,
                 at_r100=nr100)
    pt = np.zeros(n)
    pt[0] = 0.37
    resid0 = abs(yam.yamabe_residual(yam.BubbleTower(n, 0, c_n), pt))
    report.check("single_bubble_exact", resid0 < 1e-12, residual=resid0)
    rng = np.random.default_rng(cfg.seed)
    pts = rng.normal(size=(10, n)) * 2.0
    errs = [float(np.max(np.abs(yam.fd_yamabe_residual(T, pts, h)
                                - yam.yamabe_residual(T, pts))))
            for h in (2e-3, 1e-3)]
    order = float(np.log2(errs[0] / errs[1]))
    report.check("residual_fd_order", abs(order - 2.0) < 0.2, order=order,
                 errors=errs)
    cert.to_csv(os.path.join(out, "certificate.csv"))
    _artifact(report, "certificate_csv", "certificate.csv")
    with open(os.path.join(out, "tower.json"), "w") as fh:
        fh.write(T.to_json())
    _artifact(report, "tower_json", "tower.json")


_RUNNERS = {"E1": _run_e1, "E2": _run_e2, "E3": _run_e3, "E4": _run_e4,
            "E5": _run_e5, "E6": _run_e6, "E7": _run_e7}


def run(config):
    """Execute one experiment; returns the ExperimentReport (also written,
    with plots, into config.out)."""
    out = config.out
    os.makedirs(out, exist_ok=True)
    report = ExperimentReport(config)
    t0 = time.time()
    try:
        _RUNNERS[config.experiment](config, report, out)
    except Exception as err:  # recorded, never a crash
        report.checks.append({"name": "exception", "status": "fail",
                              "type": type(err).__name__,
                              "message": str(err)})
    report.timing = {"seconds": round(time.time() - t0, 3)}
    emit_plots(report)
    report.write(os.path.join(out, "report.json"))
    return report


def emit_plots(report):
    """Render SVG plots for the artifacts of a report; returns the files."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    out = report.config.out
    made = []
    for art in report.artifacts:
        path = os.path.join(out, art["path"])
        stem = os.path.splitext(path)[0]
        if art["kind"] == "profile_csv":
            data = np.genfromtxt(path, delimiter=",", names=True)
            fig, ax = plt.subplots()
            if art.get("loglog"):
                sel = (data["r"] > 0) & (data["v"] > 0)
                ax.loglog(data["r"][sel], data["v"][sel])
                if "slope" in art:
                    ax.set_title(f"slope = {art['slope']:.4f}")
            else:
                ax.plot(data["r"], data["v"])
            ax.set_xlabel("r")
            ax.set_ylabel("v")
            fig.savefig(stem + ".svg", format="svg", bbox_inches="tight")
            plt.close(fig)
            made.append(stem + ".svg")
        elif art["kind"] == "curve_csv":
            data = np.genfromtxt(path, delimiter=",", names=True)
            fig, ax = plt.subplots()
            for yname in art.get("ys", data.dtype.names[1:]):
                ax.plot(data[art.get("x", data.dtype.names[0])],
                        data[yname], label=yname)
            ax.legend()
            ax.set_xlabel(art.get("x", data.dtype.names[0]))
            fig.savefig(stem + ".svg", format="svg", bbox_inches="tight")
            plt.close(fig)
            made.append(stem + ".svg")
        elif art["kind"] == "certificate_csv":
            data = np.genfromtxt(path, delimiter=",", names=True)
            fig, ax = plt.subplots()
            ax.semilogx(data["r"], data["margin"])
            ax.axhline(0.0, color="k", lw=0.8)
            ax.set_xlabel("r")
            ax.set_ylabel("worst margin v - (2/3)U")
            fig.savefig(stem + ".svg", format="svg", bbox_inches="tight")
            plt.close(fig)
            made.append(stem + ".svg")
    return made


# ---------------------------------------------------------------------------
# argument handling

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_config(args):
    params = {}
    seed = 0
    out = args.out
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        params = raw.get("params", {k: v for k, v in raw.items()
                                    if k not in ("experiment", "out", "seed")})
        seed = raw.get("seed", 0)
        out = args.out or raw.get("out", ".")
    for item in args.override or []:
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"override {item!r} is not key=value")
        params[key] = _parse_value(val)
    return ExperimentConfig(args.experiment, params, out or ".", seed)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="elliptica")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a named experiment")
    runp.add_argument("--experiment", required=True)
    runp.add_argument("--config", default=None)
    runp.add_argument("--out", default=None)
    runp.add_argument("--override", action="append", metavar="KEY=VALUE")
    args = parser.parse_args(argv)
    if args.command == "run":
        try:
            config = build_config(args)
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        report = run(config)
        for c in report.checks:
            print(f"[{c['status']:4s}] {config.experiment} {c['name']}")
        return 0 if report.all_pass else 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
