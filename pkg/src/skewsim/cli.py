"""Command-line entry point: config parsing, dispatch, bit-stable outputs.

Outputs per run: samples.csv (+ histogram.csv) and report.json, or a grid
CSV for the density/analytics commands.  Reruns with identical config and
seed produce byte-identical files for any worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analytics, baseline, bridge, exactsim, models, stats, validate
from .errors import AccuracyError, EnvelopeError, RejectionBudgetError
from .numerics import RngStream
from .skewlaw import SkewParams, bridge_density, skew_density

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REJECTION_BUDGET = 3
EXIT_ENVELOPE = 4
EXIT_ACCURACY = 5

COMMANDS = ("density", "bridge", "exact", "euler", "analytics", "validate")


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    T: float = 1.0
    x0: float = 0.0
    n: int | None = None
    seed: int = 0
    workers: int = 1
    dt: float | None = None
    out_dir: str = "."
    beta: float | None = None
    mu: float | None = None
    t: float | None = None
    a: float | None = None
    b: float | None = None
    grid_lo: float | None = None
    grid_hi: float | None = None
    grid_n: int = 401
    bins: int = 200
    hist_lo: float | None = None
    hist_hi: float | None = None
    what: str | None = None
    lam: float = 1.0
    z: float | None = None
    echo: dict = field(default_factory=dict)


def _build_parser():
    ap = argparse.ArgumentParser(prog="skewsim", description="exact simulation of skew SDEs")
    ap.add_argument("--version", action="version", version=f"skewsim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_n=True):
        p.add_argument("--config", default=None, help="flat key = value file; flags override")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)
        if needs_n:
            p.add_argument("--n", type=int, default=None)

    pd = sub.add_parser("density", help="tabulate the transition or bridge density on a y-grid")
    common(pd, needs_n=False)
    for k in ("beta", "mu", "t", "T", "x0", "a", "b", "grid-lo", "grid-hi"):
        pd.add_argument(f"--{k}", type=float, default=None, dest=k.replace("-", "_"))
    pd.add_argument("--grid-n", type=int, default=None, dest="grid_n")
    pd.add_argument("--kind", choices=("transition", "bridge"), default="transition")

    pb = sub.add_parser("bridge", help="sample skew bridge points at a fixed time")
    common(pb)
    for k in ("beta", "mu", "t", "T", "a", "b"):
        pb.add_argument(f"--{k}", type=float, default=None)

    pe = sub.add_parser("exact", help="exact endpoint samples of the SDE")
    common(pe)
    pe.add_argument("--model", default=None)
    pe.add_argument("--T", type=float, default=None)
    pe.add_argument("--x0", type=float, default=None)
    pe.add_argument("--workers", type=int, default=None)
    pe.add_argument("--bins", type=int, default=None)
    pe.add_argument("--hist-lo", type=float, default=None, dest="hist_lo")
    pe.add_argument("--hist-hi", type=float, default=None, dest="hist_hi")

    pu = sub.add_parser("euler", help="Euler baseline endpoint samples")
    common(pu)
    pu.add_argument("--model", default=None)
    pu.add_argument("--T", type=float, default=None)
    pu.add_argument("--x0", type=float, default=None)
    pu.add_argument("--dt", type=float, default=None)
    pu.add_argument("--workers", type=int, default=None)
    pu.add_argument("--bins", type=int, default=None)
    pu.add_argument("--hist-lo", type=float, default=None, dest="hist_lo")
    pu.add_argument("--hist-hi", type=float, default=None, dest="hist_hi")

    pa = sub.add_parser("analytics", help="tabulate hitting-time/scale analytics")
    common(pa, needs_n=False)
    pa.add_argument("--what", choices=("u-lambda", "ell", "maxdec"), default=None)
    for k in ("beta", "t", "T", "a", "b", "lam", "z", "x0", "grid-lo", "grid-hi"):
        pa.add_argument(f"--{k}", type=float, default=None, dest=k.replace("-", "_"))
    pa.add_argument("--grid-n", type=int, default=None, dest="grid_n")

    pv = sub.add_parser("validate", help="run the invariant battery")
    common(pv, needs_n=False)
    return ap


_CONFIG_TYPES = {
    "model": str, "T": float, "x0": float, "n": int, "seed": int, "workers": int,
    "dt": float, "out_dir": str, "beta": float, "mu": float, "t": float, "a": float,
    "b": float, "grid_lo": float, "grid_hi": float, "grid_n": int, "bins": int,
    "hist_lo": float, "hist_hi": float, "what": str, "lam": float, "z": float,
    "kind": str,
}


class ConfigError(ValueError):
    pass


def _read_config_file(path: str) -> dict:
    out = {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    for line_no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        key = k.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{path}:{line_no}: unknown key {k!r}")
        try:
            out[key] = _CONFIG_TYPES[key](v)
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: bad value for {k!r}: expected {_CONFIG_TYPES[key].__name__}") from exc
    return out


def parse_config(argv) -> RunConfig:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    cfg = RunConfig(command=ns.command)
    file_vals = _read_config_file(ns.config) if getattr(ns, "config", None) else {}
    for k, v in file_vals.items():
        setattr(cfg, k, v)
    overridden = []
    for k in vars(ns):
        if k in ("command", "config"):
            continue
        v = getattr(ns, k)
        if v is not None:
            if k in file_vals and file_vals[k] != v:
                overridden.append(k)
            setattr(cfg, k, v)
    if overridden:
        print(f"note: flags override config file for: {', '.join(sorted(overridden))}", file=sys.stderr)
    if getattr(ns, "kind", None) is not None:
        cfg.what = ns.kind if cfg.command == "density" else cfg.what
    _validate_config(cfg)
    cfg.echo = {k: v for k, v in vars(cfg).items() if k != "echo" and v is not None}
    return cfg


def _require(cfg, names):
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"{cfg.command}: missing required --{name.replace('_', '-')}")


def _validate_config(cfg: RunConfig):
    if cfg.command in ("exact", "euler"):
        _require(cfg, ["model", "n"])
        if cfg.n < 1:
            raise ConfigError("--n must be >= 1")
        if cfg.command == "euler":
            _require(cfg, ["dt"])
            if cfg.dt <= 0:
                raise ConfigError("--dt must be > 0")
        if cfg.workers < 1:
            raise ConfigError("--workers must be >= 1")
    elif cfg.command == "bridge":
        _require(cfg, ["beta", "mu", "t", "T", "a", "b", "n"])
        if not (0 < cfg.t < cfg.T):
            raise ConfigError("bridge: need 0 < t < T")
    elif cfg.command == "density":
        _require(cfg, ["beta", "mu", "t"])
        if cfg.what == "bridge":
            _require(cfg, ["T", "a", "b"])
        else:
            _require(cfg, ["x0"])
    elif cfg.command == "analytics":
        _require(cfg, ["what", "beta"])
    if cfg.T is not None and cfg.T <= 0:
        raise ConfigError("--T must be > 0")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _report_base(cfg: RunConfig, elapsed: float):
    return {
        "command": cfg.command,
        "config": {k: v for k, v in sorted(cfg.echo.items())},
        "elapsed_seconds": elapsed,
        "library_version": __version__,
        "seed": cfg.seed,
    }


def _write_histogram(path: Path, samples, bins, lo, hi):
    if lo is None or hi is None:
        lo, hi = stats.auto_range(samples)
    dens, edges = stats.histogram(samples, bins, (lo, hi))
    rows = [(edges[i], edges[i + 1], dens[i]) for i in range(len(dens))]
    _write_csv(path, ["bin_left", "bin_right", "density"], rows)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_exact(cfg: RunConfig, outdir: Path, written):
    model = models.build(cfg.model)
    res = exactsim.run_batch(model, cfg.x0, cfg.T, cfg.n, cfg.seed, cfg.workers)
    values = res.endpoints
    if cfg.model == "example2":
        _, lmap = models.example2_model()
        values = np.array([lmap.phi_inverse(float(v)) for v in res.endpoints])
    sp = outdir / "samples.csv"
    _write_csv(
        sp,
        ["sample_id", "value", "n_poisson", "outer_attempts"],
        zip(range(cfg.n), values, res.n_poisson, res.outer_attempts),
    )
    written.append(sp)
    hp = outdir / "histogram.csv"
    _write_histogram(hp, values, cfg.bins, cfg.hist_lo, cfg.hist_hi)
    written.append(hp)
    st = res.stats
    report = _report_base(cfg, res.elapsed_seconds)
    report["acceptance"] = {
        "outer": st.outer_ratio,
        "bridge_pooled": st.bridge_ratio,
        "bridge_per_point": st.bridge_ratio_per_point,
        "endpoint": st.endpoint_ratio,
    }
    report["counts"] = {
        "outer_proposals": st.outer_proposals,
        "outer_accepts": st.outer_accepts,
        "endpoint_proposals": st.endpoint_proposals,
        "bridge_proposals": st.bridge_proposals,
        "bridge_accepts": st.bridge_accepts,
    }
    report["envelope_audited"] = model.envelope_audited
    report["scale"] = "original (phi-inverse applied)" if cfg.model == "example2" else "native"
    rp = outdir / "report.json"
    _write_json(rp, report)
    written.append(rp)


def _cmd_euler(cfg: RunConfig, outdir: Path, written):
    t0 = time.perf_counter()
    if cfg.model == "example2":
        coeff = models.example2_coefficient()
        a0p, a0m = coeff.a_plus(0.0), coeff.a_minus(-1e-300)
        beta_x = (a0p - a0m) / (a0p + a0m)
        ec = baseline.EulerConfig(dt=cfg.dt, T=cfg.T, x0=cfg.x0, coefficient=coeff, beta_x=beta_x)
    else:
        ec = baseline.EulerConfig(dt=cfg.dt, T=cfg.T, x0=cfg.x0, model=models.build(cfg.model))
    values = baseline.euler_endpoints(ec, cfg.n, cfg.seed)
    elapsed = time.perf_counter() - t0
    sp = outdir / "samples.csv"
    _write_csv(sp, ["sample_id", "value"], zip(range(cfg.n), values))
    written.append(sp)
    hp = outdir / "histogram.csv"
    _write_histogram(hp, values, cfg.bins, cfg.hist_lo, cfg.hist_hi)
    written.append(hp)
    report = _report_base(cfg, elapsed)
    report["dt"] = cfg.dt
    report["scheme"] = "divergence-form" if cfg.model == "example2" else "g-transform"
    rp = outdir / "report.json"
    _write_json(rp, report)
    written.append(rp)


def _cmd_bridge(cfg: RunConfig, outdir: Path, written):
    p = SkewParams(cfg.beta, cfg.mu)
    rng = RngStream(cfg.seed, 0)
    t0 = time.perf_counter()
    counters = bridge.BridgeCounters()
    rows = []
    for i in range(cfg.n):
        s = bridge.sample_skew_bridge_point(bridge.BridgeRequest(cfg.t, cfg.T, cfg.a, cfg.b, p), rng, counters)
        rows.append((i, s.value, s.attempts))
    elapsed = time.perf_counter() - t0
    sp = outdir / "samples.csv"
    _write_csv(sp, ["sample_id", "value", "attempts"], rows)
    written.append(sp)
    report = _report_base(cfg, elapsed)
    report["acceptance"] = {"bridge_pooled": counters.accepts / counters.proposals}
    rp = outdir / "report.json"
    _write_json(rp, report)
    written.append(rp)


def _grid(cfg: RunConfig, default_lo, default_hi):
    lo = cfg.grid_lo if cfg.grid_lo is not None else default_lo
    hi = cfg.grid_hi if cfg.grid_hi is not None else default_hi
    return np.linspace(lo, hi, cfg.grid_n)


def _cmd_density(cfg: RunConfig, outdir: Path, written):
    p = SkewParams(cfg.beta, cfg.mu)
    if cfg.what == "bridge":
        ys = _grid(cfg, min(cfg.a, cfg.b) - 4, max(cfg.a, cfg.b) + 4)
        vals = [bridge_density(cfg.t, cfg.T, cfg.a, cfg.b, float(y), p) for y in ys]
    else:
        center = cfg.x0 + cfg.mu * cfg.t
        w = 6 * math.sqrt(cfg.t)
        ys = _grid(cfg, min(cfg.x0, center) - w, max(cfg.x0, center) + w)
        vals = [skew_density(cfg.t, cfg.x0, float(y), p) for y in ys]
    gp = outdir / "grid.csv"
    _write_csv(gp, ["y", "value"], zip(ys, vals))
    written.append(gp)


def _cmd_analytics(cfg: RunConfig, outdir: Path, written):
    if cfg.what == "u-lambda":
        _requireval(cfg.z, "--z")
        ys = _grid(cfg, -5.0, 5.0)
        vals = [analytics.u_lambda(float(y), cfg.z, cfg.lam, cfg.beta) for y in ys]
    elif cfg.what == "ell":
        _requireval(cfg.t, "--t")
        _requireval(cfg.x0, "--x0")
        ys = _grid(cfg, -5.0, 5.0)
        vals = [analytics.ell(cfg.t, cfg.x0, float(y), cfg.beta) for y in ys]
    else:
        for name in ("a", "b", "T"):
            _requireval(getattr(cfg, name), f"--{name}")
        lo = max(cfg.a, cfg.b)
        ys = _grid(cfg, lo, lo + 6.0)
        vals = [
            analytics.max_decomposition_density(cfg.a, cfg.b, cfg.T, cfg.lam, float(y), cfg.beta)
            for y in ys
        ]
    gp = outdir / "grid.csv"
    _write_csv(gp, ["y", "value"], zip(ys, vals))
    written.append(gp)


def _requireval(v, flag):
    if v is None:
        raise ConfigError(f"missing required {flag}")


def run(cfg: RunConfig) -> int:
    """Execute one parsed config; returns the exit status."""
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        if cfg.command == "validate":
            results = validate.run_all(verbose=True)
            return EXIT_OK if all(ok for _, ok, _ in results) else 1
        if cfg.command == "exact":
            _cmd_exact(cfg, outdir, written)
        elif cfg.command == "euler":
            _cmd_euler(cfg, outdir, written)
        elif cfg.command == "bridge":
            _cmd_bridge(cfg, outdir, written)
        elif cfg.command == "density":
            _cmd_density(cfg, outdir, written)
        elif cfg.command == "analytics":
            _cmd_analytics(cfg, outdir, written)
        return EXIT_OK
    except (RejectionBudgetError, EnvelopeError, AccuracyError) as exc:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, RejectionBudgetError):
            return EXIT_REJECTION_BUDGET
        if isinstance(exc, EnvelopeError):
            return EXIT_ENVELOPE
        return EXIT_ACCURACY


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
