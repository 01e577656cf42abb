"""Batch verification runs: config parsing, report rows, summary and plots.

Usage::

    sharpconc --config run.ini --out results/

The config is an INI file; every key has a default, so an empty file (or
no ``--config`` at all) runs the shipped corpus. Flags override the file.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .asymmetry import alpha_convex, alpha_gauss, beta_strong
from .errors import ConfigError, InvalidArgumentError, SharpConcError
from .families import (ALL_FAMILIES, ScenarioFamily, auto_window, generate_family,
                       sharpness_points)
from .grid import GridSpec
from .verify import (BRUNN_MINKOWSKI, COVERING, EUCLID_CONCENTRATION, EUCLID_LAYERCAKE,
                     GAUSS_CONCENTRATION, GAUSS_LAYERCAKE, MONOTONE_COVER, Constants,
                     DeficitReport, bm_report, covering_sweep, euclid_deficit_report,
                     gauss_deficit_report, layercake_check, monotone_cover_check,
                     sharpness_fit, worst)

OUT_ENV = "SHARPCONC_OUT"
DEFAULT_OUT = "sharpconc-out"
CSV_COLUMNS = ("scenario_id", "family", "eps", "n", "m", "r", "inequality_id", "lhs", "lhs_err",
               "rhs", "rhs_err", "slack", "pass", "alpha", "beta", "s", "rho_hat")
DEFAULT_RADII = (0.1, 0.25, 0.5, 1.0, 2.0)
DEFAULT_EPS = (0.0, 0.05, 0.1)
SHARP_EPS = (0.02, 0.04, 0.08, 0.16)
SHARP_FAMILIES = ("shifted-slab-halfspace", "two-halfspace-union", "box", "perturbed-K")
LAYERCAKE_STEPS = 8
COVERING_MAX_R = 1.0


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    m: int = 512
    R: float | None = None  # None: automatic per scenario
    families: tuple[str, ...] = ALL_FAMILIES
    eps: tuple[float, ...] = DEFAULT_EPS
    mass: float = 0.5
    ball_settings: tuple[str, ...] = ("gauss", "euclid")
    radii: tuple[float, ...] = DEFAULT_RADII
    constants: Constants = field(default_factory=Constants)
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    sharp_eps: tuple[float, ...] = SHARP_EPS
    sharp_r: float = 0.5
    sharp_families: tuple[str, ...] = SHARP_FAMILIES
    gauss_sharp_family: str = "two-halfspace-union"
    euclid_sharp_family: str = "box"

    def scenarios(self) -> list[ScenarioFamily]:
        out = []
        for fid in self.families:
            settings = self.ball_settings if fid == "centered-ball" else ("any",)
            for setting in settings:
                for eps in self.eps:
                    vol = 1.0 if setting == "euclid" else None
                    out.append(ScenarioFamily(fid, float(eps), self.n, self.mass, vol))
        return out


# config parsing -----------------------------------------------------------------

def _floats(text: str, key: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers, got {text!r}") from exc
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def _names(text: str, key: str) -> tuple[str, ...]:
    vals = tuple(v.strip() for v in text.split(",") if v.strip())
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def _number(text: str, key: str, kind=float):
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc


def load_config(path: str | None) -> RunConfig:
    """Read an INI config; missing sections and keys keep their defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {
        "grid": {"n", "m", "r"},
        "scenarios": {"families", "eps", "mass", "ball_settings"},
        "radii": {"r"},
        "constants": {"c_gauss", "c_n"},
        "sharpness": {"eps", "r", "families", "gauss_family", "euclid_family"},
        "run": {"seed", "jobs", "out"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        extra = set(parser[section]) - known[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")
    upd: dict = {}
    g = parser["grid"] if parser.has_section("grid") else {}
    if "n" in g:
        upd["n"] = _number(g["n"], "grid.n", int)
    if "m" in g:
        upd["m"] = _number(g["m"], "grid.m", int)
    if "r" in g and g["r"].strip().lower() != "auto":
        upd["R"] = _number(g["r"], "grid.R")
    sc = parser["scenarios"] if parser.has_section("scenarios") else {}
    if "families" in sc:
        upd["families"] = _names(sc["families"], "scenarios.families")
    if "eps" in sc:
        upd["eps"] = _floats(sc["eps"], "scenarios.eps")
    if "mass" in sc:
        upd["mass"] = _number(sc["mass"], "scenarios.mass")
    if "ball_settings" in sc:
        upd["ball_settings"] = _names(sc["ball_settings"], "scenarios.ball_settings")
    if parser.has_section("radii") and "r" in parser["radii"]:
        upd["radii"] = _floats(parser["radii"]["r"], "radii.r")
    if parser.has_section("constants"):
        c = parser["constants"]
        cg = _number(c["c_gauss"], "constants.c_gauss") if c.get("c_gauss", "default") != "default" else None
        cn = _number(c["c_n"], "constants.c_n") if c.get("c_n", "default") != "default" else None
        try:
            upd["constants"] = Constants(*(() if cg is None else (cg,)), c_n=cn)
        except InvalidArgumentError as exc:
            raise ConfigError(f"[constants]: {exc}") from exc
    sh = parser["sharpness"] if parser.has_section("sharpness") else {}
    if "eps" in sh:
        upd["sharp_eps"] = _floats(sh["eps"], "sharpness.eps")
    if "r" in sh:
        upd["sharp_r"] = _number(sh["r"], "sharpness.r")
    if "families" in sh:
        upd["sharp_families"] = _names(sh["families"], "sharpness.families")
    if "gauss_family" in sh:
        upd["gauss_sharp_family"] = sh["gauss_family"].strip()
    if "euclid_family" in sh:
        upd["euclid_sharp_family"] = sh["euclid_family"].strip()
    rn = parser["run"] if parser.has_section("run") else {}
    if "seed" in rn:
        upd["seed"] = _number(rn["seed"], "run.seed", int)
    if "jobs" in rn:
        upd["jobs"] = _number(rn["jobs"], "run.jobs", int)
    if "out" in rn:
        upd["out"] = rn["out"].strip()
    return validate(replace(cfg, **upd))


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.n not in (2, 3):
        raise ConfigError(f"grid.n must be 2 or 3, got {cfg.n}")
    if cfg.m < 16 or cfg.m % 2:
        raise ConfigError(f"grid.m must be even and >= 16, got {cfg.m}")
    if cfg.R is not None and not cfg.R > 0:
        raise ConfigError(f"grid.R must be positive, got {cfg.R}")
    bad = [f for f in cfg.families + cfg.sharp_families if f not in ALL_FAMILIES]
    if bad:
        raise ConfigError(f"unknown families {bad}; choose from {list(ALL_FAMILIES)}")
    if any(s not in ("gauss", "euclid") for s in cfg.ball_settings):
        raise ConfigError("ball_settings entries must be 'gauss' or 'euclid'")
    if any(not (math.isfinite(r) and r > 0) for r in cfg.radii + (cfg.sharp_r,)):
        raise ConfigError("radii must be positive")
    if any(not (math.isfinite(e) and e >= 0) for e in cfg.eps + cfg.sharp_eps):
        raise ConfigError("perturbations must be >= 0")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")
    if not 0 < cfg.mass < 1:
        raise ConfigError(f"mass must lie in (0, 1), got {cfg.mass}")
    return cfg


# per-scenario work ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(sid: str, fam: ScenarioFamily, m: int, r: float, rep: DeficitReport,
         alpha=None, beta=None, s=None, rho_hat=None) -> dict:
    return {
        "scenario_id": sid, "family": fam.family_id, "eps": fam.eps, "n": fam.n, "m": m, "r": r,
        "inequality_id": rep.inequality_id, "lhs": rep.lhs.value, "lhs_err": rep.lhs.err,
        "rhs": rep.rhs.value, "rhs_err": rep.rhs.err, "slack": rep.slack, "pass": rep.passed,
        "alpha": alpha, "beta": beta, "s": s, "rho_hat": rho_hat,
    }


def scenario_id(index: int, fam: ScenarioFamily) -> str:
    kind = "euclid" if fam.euclidean else "gauss"
    return f"{index:03d}-{kind}-{fam.family_id}-eps{fam.eps!r}"


def run_scenario(index: int, fam: ScenarioFamily, cfg: RunConfig) -> tuple[list[dict], list[str]]:
    """All rows of one scenario; failures become error strings."""
    sid = scenario_id(index, fam)
    r_max = max(cfg.radii)
    R = cfg.R if cfg.R is not None else auto_window(fam, r_max, cfg.m)
    rows: list[dict] = []
    try:
        spec = GridSpec(cfg.n, R, cfg.m)
        sc = generate_family(fam, spec)
        E = sc.E
        if not fam.euclidean:
            a = alpha_gauss(E)
            beta = beta_strong(E).value
            for r in cfg.radii:
                rep = gauss_deficit_report(E, r, cfg.constants, alpha=a)
                rows.append(_row(sid, fam, cfg.m, r, rep, a.value, beta, rep.intermediates["s"],
                                 rep.intermediates["rho_hat"]))
                if r <= COVERING_MAX_R:
                    cov = worst(covering_sweep(E, r))
                    rows.append(_row(sid, fam, cfg.m, r, cov, a.value, beta, cov.intermediates["s"]))
                lc = layercake_check(E, r, LAYERCAKE_STEPS)
                rows.append(_row(sid, fam, cfg.m, r, lc, a.value, beta, rep.intermediates["s"]))
        else:
            K = fam.body
            a = alpha_convex(E, K)
            for r in cfg.radii:
                rows.append(_row(sid, fam, cfg.m, r, euclid_deficit_report(E, K, r, cfg.constants, alpha=a),
                                 a.value))
                rows.append(_row(sid, fam, cfg.m, r, monotone_cover_check(E, K, r), a.value))
                bm = bm_report(E, K.scaled(r), cfg.constants)
                rows.append(_row(sid, fam, cfg.m, r, bm, bm.intermediates["alpha"]))
                rows.append(_row(sid, fam, cfg.m, r, layercake_check(E, r, LAYERCAKE_STEPS, K=K), a.value))
        return rows, []
    except SharpConcError as exc:
        return rows, [f"{sid}: {type(exc).__name__}: {exc}"]


def _run_one(args):
    return run_scenario(*args)


# sharpness ---------------------------------------------------------------------

def sharpness_summary(cfg: RunConfig) -> dict:
    per_family = {}
    points = {}
    for fid in cfg.sharp_families:
        kw = {"mass": cfg.mass} if fid not in ("box", "perturbed-K") else {}
        try:
            pts = sharpness_points(fid, cfg.sharp_eps, cfg.sharp_r, cfg.n, **kw)
            slope, intercept = sharpness_fit(pts, min_points=min(4, len(pts)))
        except SharpConcError as exc:
            per_family[fid] = {"error": str(exc)}
            continue
        points[fid] = pts
        per_family[fid] = {"exponent": slope, "intercept": intercept,
                           "points": [[a, d] for a, d in pts]}
    out = {"r": cfg.sharp_r, "eps": list(cfg.sharp_eps), "families": per_family}
    out["gauss_family"] = cfg.gauss_sharp_family
    out["euclid_family"] = cfg.euclid_sharp_family
    return out


# outputs -----------------------------------------------------------------------------

def write_csv(rows: list[dict], path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    path.write_text(buf.getvalue(), encoding="utf-8")


def write_plots(rows: list[dict], sharp: dict, outdir: Path) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "sharpconc"
    plotdir = outdir / "plots"
    plotdir.mkdir(parents=True, exist_ok=True)
    written = []
    families = sorted({r["family"] for r in rows} | set(sharp["families"]))
    deficit_ids = (GAUSS_CONCENTRATION, EUCLID_CONCENTRATION)
    for fid in families:
        grid_pts = [(r["alpha"], r["lhs"]) for r in rows
                    if r["family"] == fid and r["inequality_id"] in deficit_ids
                    and r["alpha"] and r["alpha"] > 0 and r["lhs"] > 0]
        exact = sharp["families"].get(fid, {}).get("points", [])
        if not grid_pts and not exact:
            continue
        fig, ax = plt.subplots(figsize=(5, 4))
        if grid_pts:
            ax.scatter(*zip(*grid_pts), s=14, label="grid, all radii")
        if exact:
            ax.scatter(*zip(*exact), s=20, marker="x",
                       label=f"closed form, r = {sharp['r']}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("asymmetry")
        ax.set_ylabel("deficit")
        ax.set_title(fid)
        ax.legend(fontsize=8)
        path = plotdir / f"{fid}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(str(path.relative_to(outdir)))
    return written


def run(cfg: RunConfig, outdir: Path) -> int:
    """Run every scenario and write ``report.csv``, ``summary.json`` and plots."""
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = [(i, fam, cfg) for i, fam in enumerate(cfg.scenarios())]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    rows = [row for res, _ in results for row in res]
    errors = [e for _, errs in results for e in errs]
    write_csv(rows, outdir / "report.csv")
    sharp = sharpness_summary(cfg)
    counts: dict[str, dict[str, int]] = {}
    for row in rows:
        c = counts.setdefault(row["inequality_id"], {"pass": 0, "fail": 0})
        c["pass" if row["pass"] else "fail"] += 1
    n_fail = sum(c["fail"] for c in counts.values())

    def exponent(fid):
        return sharp["families"].get(fid, {}).get("exponent")

    summary = {
        "config": {
            "n": cfg.n, "m": cfg.m, "R": cfg.R, "families": list(cfg.families), "eps": list(cfg.eps),
            "mass": cfg.mass, "radii": list(cfg.radii), "seed": cfg.seed,
            "c_gauss": cfg.constants.c_gauss, "c_n": cfg.constants.euclid(cfg.n),
        },
        "rows": len(rows),
        "passed": sum(c["pass"] for c in counts.values()),
        "failed": n_fail,
        "errors": errors,
        "by_inequality": counts,
        "gauss_exponent": exponent(cfg.gauss_sharp_family),
        "euclid_exponent": exponent(cfg.euclid_sharp_family),
        "sharpness": sharp,
        "all_passed": n_fail == 0 and not errors,
    }
    summary["plots"] = write_plots(rows, sharp, outdir)
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    return 0 if summary["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharpconc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="INI config file (all keys optional)")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--grid-m", type=int, help="cells per axis")
    p.add_argument("--families", help="comma-separated scenario families")
    p.add_argument("--radii", help="comma-separated enlargement radii")
    p.add_argument("--seed", type=int, help="seed recorded with the run")
    p.add_argument("--c-gauss", type=float, help="constant of the Gaussian estimate")
    p.add_argument("--c-n", type=float, help="constant of the Euclidean estimates")
    p.add_argument("--jobs", type=int, help="worker processes")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        upd: dict = {}
        if args.grid_m is not None:
            upd["m"] = args.grid_m
        if args.families is not None:
            upd["families"] = _names(args.families, "--families")
        if args.radii is not None:
            upd["radii"] = _floats(args.radii, "--radii")
        if args.seed is not None:
            upd["seed"] = args.seed
        if args.jobs is not None:
            upd["jobs"] = args.jobs
        if args.c_gauss is not None or args.c_n is not None:
            upd["constants"] = Constants(
                cfg.constants.c_gauss if args.c_gauss is None else args.c_gauss,
                cfg.constants.c_n if args.c_n is None else args.c_n)
        cfg = validate(replace(cfg, **upd))
    except (SharpConcError, ValueError) as exc:
        print(f"sharpconc: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    status = run(cfg, Path(out))
    print(f"sharpconc: wrote {out} ({'all checks passed' if status == 0 else 'FAILURES'})")
    return status


if __name__ == "__main__":
    sys.exit(main())
