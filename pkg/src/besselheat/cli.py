"""Command-line experiment runner.

Each invocation runs one experiment and writes one artifact directory with
CSV tables and a ``report.json`` that validates against the shipped schema.
Parameters come from defaults, then an optional JSON config file, then
command-line flags.

Exit codes: 0 success, 2 configuration error, 3 numerical-quality failure,
4 I/O error.
"""

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import os
from pathlib import Path
import sys
import warnings

import numpy as np

SCHEMA_VERSION = "1.0"
ENV_OUT = "BESSELHEAT_OUT"
DEFAULT_OUT = "besselheat-runs"
EXIT_OK, EXIT_CONFIG, EXIT_QUALITY, EXIT_IO = 0, 2, 3, 4
SUBCOMMANDS = ("kernel-check", "hankel-check", "solve", "riesz", "cz-verify", "sweep", "maxreg")
REQUIRED = object()


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


# --- parameter table ------------------------------------------------------


def parse_values(text):
    """``"a:b:n"`` (inclusive linspace), ``"a,b,c"`` or a single number."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if ":" in text:
        a, b, n = text.split(":")
        return [float(v) for v in np.round(np.linspace(float(a), float(b), int(n)), 12)]
    return [float(v) for v in text.split(",") if v.strip()]


def _float(v):
    return float(v)


def _int(v):
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("not an integer")
    return int(v)


def _ints(v):
    return [int(x) for x in (v if isinstance(v, (list, tuple)) else str(v).split(","))]


def _choice(*options):
    def conv(v):
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v

    return conv


def _opt_float(v):
    return None if v is None else float(v)


COMMON = {
    "seed": (_int, 0),
    "workers": (_int, None),
}

GRID = {
    "N": (_int, 1024),
    "M": (_int, 1024),
    "x_min": (_float, 1e-3),
    "x_max": (_float, 50.0),
    "T": (_float, 80.0),
}

PARAMS = {
    "kernel-check": {"mu": (parse_values, [-0.5, 0.5, 1.0]), "n": (_int, 1000)},
    "hankel-check": {"mu": (parse_values, [-0.5, 0.7, 1.0]), "N": (_int, 1024), "x_min": (_float, 1e-3),
                     "x_max": (_float, 50.0)},
    "solve": {"mu": (_float, REQUIRED), "problem": (_choice("wholespace", "cauchy"), "wholespace"),
              "N": (_int, 512), "M": (_int, 512), "x_max": (_float, 8.0), "t_min": (_float, -6.0),
              "T": (_float, 12.0), "n_bumps": (_int, 3)},
    "riesz": {"mu": (_float, REQUIRED), "op": (_choice("R", "Rtilde"), "R"), "compare": (str, "spectral,pv"),
              "region": (_choice("parabolic_full", "spatial_slice", "causal"), "parabolic_full"),
              "sign": (_choice("convention", "flipped"), "convention"), "n_eps": (_int, 6),
              "eps0": (_opt_float, None), "n_points": (_int, 10), **GRID},
    "cz-verify": {"mu": (_float, REQUIRED), "kernel": (_choice("K", "Ktilde"), "K"),
                  "n_samples": (_int, 100_000)},
    "sweep": {"op": (_choice("R", "Rtilde", "S_mu"), "Rtilde"), "mu": (parse_values, REQUIRED),
              "invp": (parse_values, REQUIRED), "n_bumps": (_int, 20), "N": (_int, 512), "M": (_int, 512),
              "T": (_float, 40.0)},
    "maxreg": {"mu": (_float, REQUIRED), "p": (_float, 2.0), "q": (_float, 2.0),
               "resolutions": (_ints, [64, 128, 256]), "n_bumps": (_int, 4)},
}

_ALIASES = {"rtilde": "Rtilde", "r": "R", "s_mu": "S_mu", "smu": "S_mu", "ktilde": "Ktilde", "k": "K"}


def _check(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _validate(cfg):
    """Module preconditions, checked before any computation."""
    sub = cfg["subcommand"]
    mus = cfg["mu"] if isinstance(cfg.get("mu"), list) else [cfg.get("mu")]
    for m in mus:
        if m is not None:
            _check(m > -1, "mu", f"order must be > -1, got {m}")
    _check(cfg["seed"] >= 0, "seed", "must be nonnegative")
    _check(cfg["workers"] >= 1, "workers", "must be at least 1")
    for key in ("N", "M"):
        if key in cfg:
            _check(cfg[key] >= 8, key, "must be at least 8")
    if sub in ("riesz", "sweep", "hankel-check") or (sub == "solve"):
        for key in ("N", "M"):
            if key in cfg and sub != "solve":
                _check(cfg[key] & (cfg[key] - 1) == 0, key, "must be a power of two")
    if "x_min" in cfg:
        _check(0 < cfg["x_min"] < cfg["x_max"], "x_min", "need 0 < x_min < x_max")
    if "T" in cfg:
        _check(cfg["T"] > 0, "T", "must be positive")
    if sub == "kernel-check":
        _check(cfg["n"] >= 1, "n", "must be positive")
    if sub == "solve":
        _check(cfg["x_max"] > 0, "x_max", "must be positive")
        _check(cfg["n_bumps"] >= 1, "n_bumps", "must be positive")
        if cfg["problem"] == "cauchy":
            _check(cfg["t_min"] == 0.0, "t_min", "the Cauchy problem starts at t_min = 0")
    if sub == "riesz":
        parts = [c.strip() for c in cfg["compare"].split(",") if c.strip()]
        _check(parts and set(parts) <= {"spectral", "pv"}, "compare", "use a subset of spectral,pv")
        _check(cfg["n_eps"] >= 3, "n_eps", "at least 3 truncations are needed for extrapolation")
        _check(cfg["n_points"] >= 1, "n_points", "must be positive")
        if cfg["eps0"] is not None:
            _check(cfg["eps0"] > 0, "eps0", "must be positive")
    if sub == "cz-verify":
        _check(cfg["n_samples"] >= 1, "n_samples", "must be positive")
    if sub == "sweep":
        _check(all(0 < v < 1 for v in cfg["invp"]), "invp", "values of 1/p must lie in (0, 1)")
        _check(cfg["n_bumps"] >= 1, "n_bumps", "must be positive")
    if sub == "maxreg":
        _check(1 < cfg["p"] < math.inf, "p", "need 1 < p < inf")
        _check(1 < cfg["q"] < math.inf, "q", "need 1 < q < inf")
        _check(len(cfg["resolutions"]) >= 2 and all(r >= 64 for r in cfg["resolutions"]), "resolutions",
               "need at least two resolutions of 64 or more")
        _check(cfg["n_bumps"] >= 1, "n_bumps", "must be positive")


def resolve_config(subcommand, file_cfg=None, overrides=None):
    """Merge defaults, a config mapping and flag overrides; validate; return a plain dict."""
    file_cfg = dict(file_cfg or {})
    overrides = dict(overrides or {})
    sub = overrides.pop("subcommand", None) or subcommand or file_cfg.get("subcommand")
    if not sub:
        raise ConfigError("subcommand: missing required key 'subcommand'")
    if file_cfg.get("subcommand") not in (None, sub):
        raise ConfigError(f"subcommand: config file is for {file_cfg['subcommand']!r}, not {sub!r}")
    if sub not in PARAMS:
        raise ConfigError(f"subcommand: unknown subcommand {sub!r}")
    table = {**PARAMS[sub], **COMMON}
    unknown = sorted(set(file_cfg) - set(table) - {"subcommand", "out"})
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key for {sub}")
    merged = {**file_cfg, **overrides}
    cfg = {"subcommand": sub}
    for key, (conv, default) in table.items():
        raw = merged.get(key, default)
        if raw is REQUIRED or raw == "" or (raw is None and default is REQUIRED):
            raise ConfigError(f"{key}: missing required key '{key}'")
        if raw is None:
            cfg[key] = None
            continue
        if isinstance(raw, str) and raw.lower() in _ALIASES and key in ("op", "kernel"):
            raw = _ALIASES[raw.lower()]
        try:
            cfg[key] = conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: invalid value {raw!r} ({exc})") from None
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    _validate(cfg)
    return cfg


# --- artifacts ------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def config_digest(cfg):
    return hashlib.sha256(json.dumps(_jsonable(cfg), sort_keys=True).encode()).hexdigest()[:12]


def schema_path():
    return Path(__file__).with_name("schema") / "report.schema.json"


def load_schema():
    return json.loads(schema_path().read_text(encoding="utf-8"))


def write_csv(path, rows, cfg, columns=None):
    """RFC-4180 CSV preceded by one ``#`` line with the schema version and config."""
    if columns is None:
        columns = list(dict.fromkeys(k for r in rows for k in r))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION} config={json.dumps(_jsonable(cfg), sort_keys=True)}\r\n")
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])


def write_report(outdir, cfg, status, summary, artifacts):
    import jsonschema

    report = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": cfg["subcommand"],
        "config": _jsonable(cfg),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "status": status,
        "summary": _jsonable(summary),
        "artifacts": sorted(artifacts) + ["report.json"],
    }
    jsonschema.validate(report, load_schema())
    with open(outdir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# --- experiments ----------------------------------------------------------
# each returns (status, summary, {filename: rows})


def run_kernel_check(cfg):
    from scipy import integrate

    from .kernels import heat_kernel_bessel, heat_kernel_classical

    rng = np.random.default_rng(cfg["seed"])
    rows = []

    def add(check, mu, err, tol):
        rows.append({"check": check, "mu": mu, "max_rel_err": err, "tol": tol, "pass": bool(err <= tol)})

    for mu in cfg["mu"]:
        if mu in (-0.5, 0.5):
            t = np.exp(rng.uniform(np.log(1e-2), np.log(10.0), cfg["n"]))
            x, y = rng.uniform(0.05, 5.0, (2, cfg["n"]))
            w = heat_kernel_bessel(mu, t, x, y)
            if mu == -0.5:
                ref = heat_kernel_classical(t, x - y) + heat_kernel_classical(t, x + y)
            else:
                ref = np.exp(-(x - y) ** 2 / (4 * t)) * (-np.expm1(-x * y / t)) / np.sqrt(4 * np.pi * t)
            add("reflection", mu, float(np.max(np.abs(w - ref) / np.abs(ref))), 1e-12)
        errs = []
        for x in (0.3, 1.4, 3.0):
            tau = 0.3
            val, _ = integrate.quad(lambda y: heat_kernel_bessel(mu, tau, x, y) * y ** (mu + 0.5), 0, 40,
                                    epsabs=0, epsrel=1e-12, limit=400, points=[x])
            errs.append(abs(val / x ** (mu + 0.5) - 1))
        add("mass_identity", mu, max(errs), 1e-8)
        errs = []
        for _ in range(5):
            t, s = rng.uniform(0.05, 1.0, 2)
            x, y = rng.uniform(0.1, 3.0, 2)
            f = lambda z: heat_kernel_bessel(mu, t, x, z) * heat_kernel_bessel(mu, s, z, y)
            val, _ = integrate.quad(f, 0, 40, epsabs=0, epsrel=1e-11, limit=400, points=[x, y])
            errs.append(abs(val / heat_kernel_bessel(mu, t + s, x, y) - 1))
        add("chapman_kolmogorov", mu, max(errs), 1e-7)
    ok = all(r["pass"] for r in rows)
    return ("pass" if ok else "fail"), {"checks": len(rows), "failed": sum(not r["pass"] for r in rows)}, {
        "kernel_checks.csv": rows}


def run_hankel_check(cfg):
    from .bumps import compact_bump, rel_l2
    from .hankel import RadialGrid, hankel_transform

    grid = RadialGrid.hybrid(cfg["N"], cfg["x_min"], cfg["x_max"])
    x = grid.nodes
    b, bxx = compact_bump(x)
    rows = []
    for mu in cfg["mu"]:
        e = x ** (mu + 0.5) * np.exp(-0.5 * x * x)
        hb = hankel_transform(mu, b, grid)
        lap = bxx + (0.25 - mu * mu) / x**2 * b
        checks = {
            "eigenfunction": (rel_l2(hankel_transform(mu, e, grid), e, grid.weights), 1e-3),
            "self_inversion": (rel_l2(hankel_transform(mu, hb, grid), b, grid.weights), 5e-3),
            "laplacian": (rel_l2(hankel_transform(mu, lap, grid), -(x**2) * hb, grid.weights), 5e-3),
        }
        for name, (err, tol) in checks.items():
            rows.append({"check": name, "mu": mu, "N": cfg["N"], "rel_l2": err, "tol": tol, "pass": bool(err <= tol)})
    ok = all(r["pass"] for r in rows)
    return ("pass" if ok else "fail"), {"max_rel_l2": max(r["rel_l2"] for r in rows)}, {"hankel_checks.csv": rows}


def run_solve(cfg):
    from .bumps import bump_suite
    from .hankel import Field, RadialGrid, TimeGrid
    from .solvers import CauchyProblem, residual_check, solve_cauchy, solve_wholespace

    tg = TimeGrid(cfg["t_min"], cfg["T"] / cfg["M"], cfg["M"])
    rg = RadialGrid.uniform(cfg["N"], cfg["x_max"] / cfg["N"], cfg["x_max"])
    xr = (1.5, max(1.6, cfg["x_max"] / 2))
    if cfg["problem"] == "wholespace":
        centre = cfg["t_min"] + cfg["T"] / 2
        suite = bump_suite(cfg["n_bumps"], seed=cfg["seed"], x_range=xr, t_range=(centre - 1, centre + 1))
    else:
        suite = bump_suite(cfg["n_bumps"], seed=cfg["seed"], x_range=xr,
                           t_range=(0.35 * cfg["T"], 0.5 * cfg["T"]))
    fs = [Field.from_function(b, tg, rg) for b in suite]
    if cfg["problem"] == "wholespace":
        us = solve_wholespace(cfg["mu"], fs)
    else:
        us = [solve_cauchy(CauchyProblem(cfg["mu"], tg, rg, f=f)) for f in fs]
    rows = []
    for i, (b, u, f) in enumerate(zip(suite, us, fs)):
        r = residual_check(u, f, cfg["mu"])
        rows.append({"bump": i, "x0": b.x0, "sx": b.sx, "t0": b.t0, "st": b.st, "residual_rel": r.relative,
                     "interior_norm": r.interior_norm, "boundary_layer_norm": r.boundary_layer_norm})
    worst = max(r["residual_rel"] for r in rows)
    return ("pass" if worst <= 5e-2 else "fail"), {"max_residual_rel": worst, "tol": 5e-2}, {"residuals.csv": rows}


def _riesz_points(n):
    T, X = np.meshgrid(np.linspace(-0.6, 0.6, n), np.linspace(1.4, 2.6, n), indexing="ij")
    return np.column_stack([T.ravel(), X.ravel()])


RIESZ_BUMP = dict(x0=2.0, sx=0.3, t0=0.0, st=0.4)


def run_riesz(cfg):
    from scipy.interpolate import RectBivariateSpline

    from .bumps import Bump
    from .hankel import Field, RadialGrid, TimeGrid, op_R_spectral, op_Rtilde_spectral
    from .pv_singular import pv_R, pv_Rtilde

    bump = Bump(**RIESZ_BUMP)
    pts = _riesz_points(cfg["n_points"])
    fvals = bump(pts[:, 0], pts[:, 1])
    fnorm = float(np.linalg.norm(fvals))
    parts = {c.strip() for c in cfg["compare"].split(",") if c.strip()}
    out = {}
    if "spectral" in parts:
        tg = TimeGrid.centered(cfg["T"], cfg["M"])
        rg = RadialGrid.hybrid(cfg["N"], cfg["x_min"], cfg["x_max"])
        f = Field.from_function(bump, tg, rg)
        if cfg["op"] == "R":
            v = op_R_spectral(cfg["mu"], f).values.real
        else:
            v = op_Rtilde_spectral(cfg["mu"], f, cfg["sign"]).values.real
        out["spectral"] = RectBivariateSpline(tg.times, rg.nodes, v).ev(pts[:, 0], pts[:, 1])
    if "pv" in parts:
        fn = pv_R if cfg["op"] == "R" else pv_Rtilde
        out["pv"] = fn(cfg["mu"], bump, cfg["region"], pts, cfg["eps0"], cfg["n_eps"])
    rows = []
    summary = {"f_l2": fnorm}
    if parts == {"spectral", "pv"}:
        pv, ref = out["pv"], out["spectral"]
        for k, e in enumerate(pv.eps):
            vals = pv.iterates[k] + pv.local_constant * pv.f_at_points
            rows.append({"stage": f"eps_{k}", "eps": e, "rel_l2_diff": float(np.linalg.norm(vals - ref) / fnorm)})
        final = float(np.linalg.norm(pv.values - ref) / fnorm)
        rows.append({"stage": "extrapolated", "eps": 0.0, "rel_l2_diff": final})
        ratios = pv.contraction_ratios()
        med = float(np.nanmedian(ratios[-1])) if ratios.size else float("nan")
        summary.update({"final_rel_l2_diff": final, "tol": 5e-2, "contraction_ratio_median": med})
        status = "pass" if final <= 5e-2 and med >= 1.5 else "fail"
        files = {"riesz_compare.csv": rows}
    else:
        status = "report"
        name = next(iter(parts))
        vals = out[name].values if name == "pv" else out[name]
        files = {"riesz_values.csv": [{"t": t, "x": x, "f": fv, name: v}
                                      for (t, x), fv, v in zip(pts, fvals, vals)]}
    return status, summary, files


def run_cz_verify(cfg):
    from .analysis import cz_verify

    r = cz_verify(cfg["mu"], cfg["kernel"], cfg["n_samples"], seed=cfg["seed"], workers=cfg["workers"])
    summary = {"mode": r.mode, "sups": r.sups, "finite": r.finite(), **r.extras}
    status = "report" if r.mode == "report-only" else ("pass" if r.finite() else "fail")
    return status, summary, {"cz_quantiles.csv": r.as_rows()}


def run_sweep(cfg):
    from .analysis import opnorm_sweep

    s = opnorm_sweep(cfg["op"], cfg["mu"], cfg["invp"], N=cfg["N"], M=cfg["M"], T=cfg["T"],
                     n_bumps=cfg["n_bumps"], seed=cfg["seed"], workers=cfg["workers"])
    rows = s.rows()
    bad = s.check()
    counts = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    summary = {"cells": len(rows), "mismatches": len(bad), "verdict_counts": counts}
    return ("pass" if not bad else "fail"), summary, {"region.csv": rows}


def run_maxreg(cfg):
    from .bumps import bump_suite
    from .hankel import Field, RadialGrid, TimeGrid
    from .solvers import maximal_regularity_ratio

    rows, best = [], []
    suite = bump_suite(cfg["n_bumps"], seed=cfg["seed"], x_range=(1.5, 3.0), sx_range=(0.2, 0.3),
                       t_range=(3.0, 4.0))
    for n in cfg["resolutions"]:
        tg = TimeGrid(0.0, 8.0 / n, n)
        rg = RadialGrid.uniform(n, 6.0 / n, 6.0)
        fs = [Field.from_function(b, tg, rg) for b in suite]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ratios = maximal_regularity_ratio(cfg["mu"], cfg["p"], cfg["q"], fs)
        best.append(max(ratios))
        rows.append({"N": n, "M": n, "p": cfg["p"], "q": cfg["q"], "max_ratio": best[-1]})
    drifts = [abs(b / a - 1) for a, b in zip(best, best[1:])]
    for r, d in zip(rows[1:], drifts):
        r["drift"] = d
    ok = all(d <= 0.1 for d in drifts)
    return ("pass" if ok else "fail"), {"ratios": best, "drifts": drifts, "tol": 0.1}, {"maxreg.csv": rows}


RUNNERS = {
    "kernel-check": run_kernel_check,
    "hankel-check": run_hankel_check,
    "solve": run_solve,
    "riesz": run_riesz,
    "cz-verify": run_cz_verify,
    "sweep": run_sweep,
    "maxreg": run_maxreg,
}


def run(cfg, out_root=None):
    """Run a resolved config; returns ``(exit_code, outdir, report)``."""
    from .hankel import GridNotCalibrated, SupportError

    try:
        status, summary, files = RUNNERS[cfg["subcommand"]](cfg)
    except SupportError as exc:
        raise ConfigError(f"grid: {exc}") from None
    except GridNotCalibrated as exc:
        status, summary, files = "fail", {"error": str(exc)}, {}
    root = Path(out_root or os.environ.get(ENV_OUT) or DEFAULT_OUT)
    outdir = root / f"{cfg['subcommand']}-{config_digest(cfg)}"
    outdir.mkdir(parents=True, exist_ok=True)
    for name, rows in files.items():
        write_csv(outdir / name, rows, cfg)
    report = write_report(outdir, cfg, status, summary, list(files))
    return (EXIT_QUALITY if status == "fail" else EXIT_OK), outdir, report


# --- argument parsing -----------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help=f"output root (default ${ENV_OUT} or ./{DEFAULT_OUT})")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="worker processes (default: all cores)")

    p = argparse.ArgumentParser(prog="besselheat", description=__doc__.splitlines()[0], parents=[common],
                                argument_default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="subcommand")

    def add(name, help_, *opts):
        sp = sub.add_parser(name, help=help_, parents=[common], argument_default=argparse.SUPPRESS)
        for flag, kw in opts:
            sp.add_argument(flag, **kw)
        return sp

    grid = [("--N", {"type": int}), ("--M", {"type": int}), ("--x-min", {"type": float, "dest": "x_min"}),
            ("--x-max", {"type": float, "dest": "x_max"}), ("--T", {"type": float, "help": "time window length"})]
    add("kernel-check", "heat-kernel identities", ("--mu", {}), ("--n", {"type": int}))
    add("hankel-check", "Hankel engine identities", ("--mu", {}), ("--N", {"type": int}),
        ("--x-min", {"type": float, "dest": "x_min"}), ("--x-max", {"type": float, "dest": "x_max"}))
    add("solve", "solve the inhomogeneous problem on the bump suite", ("--mu", {"type": float}),
        ("--problem", {"choices": ["wholespace", "cauchy"]}), ("--N", {"type": int}), ("--M", {"type": int}),
        ("--x-max", {"type": float, "dest": "x_max"}), ("--t-min", {"type": float, "dest": "t_min"}),
        ("--T", {"type": float}), ("--n-bumps", {"type": int, "dest": "n_bumps"}))
    add("riesz", "compare spectral and principal-value Riesz transforms", ("--mu", {"type": float}),
        ("--op", {}), ("--compare", {}), ("--region", {}), ("--sign", {}),
        ("--n-eps", {"type": int, "dest": "n_eps"}), ("--eps0", {"type": float}),
        ("--n-points", {"type": int, "dest": "n_points"}), *grid)
    add("cz-verify", "sample Calderon-Zygmund kernel bounds", ("--mu", {"type": float}), ("--kernel", {}),
        ("--n-samples", {"type": int, "dest": "n_samples"}))
    add("sweep", "boundedness region sweep", ("--op", {}), ("--mu", {}), ("--invp", {}),
        ("--n-bumps", {"type": int, "dest": "n_bumps"}), ("--N", {"type": int}), ("--M", {"type": int}),
        ("--T", {"type": float}))
    add("maxreg", "maximal-regularity ratios under refinement", ("--mu", {"type": float}),
        ("--p", {"type": float}), ("--q", {"type": float}), ("--resolutions", {}),
        ("--n-bumps", {"type": int, "dest": "n_bumps"}))
    return p


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    config_path = args.pop("config", None)
    out_root = args.pop("out", None)
    subcommand = args.pop("subcommand", None)
    try:
        file_cfg = {}
        if config_path:
            try:
                file_cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except OSError as exc:
                print(f"besselheat: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config: not valid JSON ({exc})") from None
            if not isinstance(file_cfg, dict):
                raise ConfigError("config: top level must be an object")
            out_root = out_root or file_cfg.get("out")
        cfg = resolve_config(subcommand, file_cfg, args)
    except ConfigError as exc:
        print(f"besselheat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, outdir, report = run(cfg, out_root)
    except ConfigError as exc:
        print(f"besselheat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"besselheat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{report['status']}: {outdir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
