"""Command-line runner: one subcommand per figure or check.

Every run writes its declared outputs and a manifest into ``--output-dir``.
Outputs are written to temporary files and renamed only once the whole run
has succeeded, so an interrupted run leaves no partial files behind.

Exit codes: 0 success, 2 invalid configuration, 3 solver did not converge,
4 an acceptance gate failed.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, InvalidInput

log = logging.getLogger("fracdisp")

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_GATE = 0, 2, 3, 4

COMMANDS = ("fig1", "fig2", "fig3", "ground-state", "bounds-check", "decay-fit", "scaling-fit",
            "divisor-check", "counting-check", "holder", "spectrum", "dispersion-curve",
            "comb-measure")

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class RunConfig:
    command: str
    output_dir: str = "out"
    seed: int = 0
    no_cache: bool = False
    delta: float | None = None
    delta_list: list | None = None
    half_width: float | None = None
    n_points: int | None = None
    eps1: float | None = None
    eps1_list: list | None = None
    eps2_list: list | None = None
    psi_sigma: float = 0.25
    q_max: int | None = None
    t_min: float | None = None
    t_max: float | None = None
    n_t: int | None = None
    tol: float = 1e-8
    window: list | None = None
    t0: float | None = None
    side: str = "both"
    remove_drift: bool = True
    datum: str = "gaussian"
    method: str = "direct"
    k_max: int = 200
    n_trials: int | None = None

    def snapshot(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("no_cache")
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.snapshot(), sort_keys=True).encode()).hexdigest()


_DEFAULTS = {
    "fig1": dict(delta=0.25, eps1=0.2, eps2_list=[0.1, 0.05, 0.025], t_min=0.0, t_max=2.0, n_t=201,
                 n_points=2 ** 15),
    "fig2": dict(delta=0.25, eps1_list=[0.2, 0.1, 0.05], t_min=0.0, t_max=2.0, n_t=2001),
    "fig3": dict(delta=0.5, q_max=10 ** 4, t_min=0.0, t_max=1.0, n_t=10 ** 5),
    "ground-state": dict(delta=0.5, half_width=80.0, n_points=2 ** 14, window=[12.0, 36.0]),
    "bounds-check": dict(delta=0.5, half_width=20.0, n_points=2048, t_min=0.0, t_max=4.0, n_t=41),
    "decay-fit": dict(delta=0.25, half_width=40.0, n_points=2 ** 14, t_max=4.0, n_t=8192,
                      window=[2.0, 400.0]),
    "scaling-fit": dict(delta=0.25, half_width=40.0, n_points=2 ** 13, window=[1e-3, 1e-1], n_t=7),
    "divisor-check": dict(delta_list=[0.1, 0.25, 0.5, 0.75, 0.9]),
    "counting-check": dict(n_trials=1000, q_max=1000, delta=0.5),
    "holder": dict(delta=0.5, q_max=10 ** 4, t0=GOLDEN, window=[1e-6, 1e-2], n_t=13),
    "spectrum": dict(delta=0.5, q_max=10 ** 4, window=[2.0 ** -16, 2.0 ** -8]),
    "dispersion-curve": dict(delta=0.5, half_width=20.0, n_points=2048, t_min=0.0, t_max=4.0,
                             n_t=41),
    "comb-measure": dict(delta=0.5, q_max=100),
}


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill unset fields with the command's defaults."""
    if cfg.command not in COMMANDS:
        raise InvalidInput(f"unknown command {cfg.command!r}")
    vals = {k: v for k, v in _DEFAULTS[cfg.command].items() if getattr(cfg, k) is None}
    return dataclasses.replace(cfg, **vals)


def validate(cfg: RunConfig) -> list:
    """Every violated precondition, as messages."""
    errs = []
    c = cfg.command
    if cfg.delta is not None:
        hi_ok = cfg.delta < 1 if c in ("fig1", "fig2", "fig3", "holder", "spectrum", "comb-measure",
                                        "counting-check", "scaling-fit") else cfg.delta <= 1
        if not (cfg.delta > 0 and hi_ok):
            errs.append(f"delta={cfg.delta} outside the admissible range for {c}")
    for d in cfg.delta_list or []:
        if not 0 < d < 1:
            errs.append(f"delta_list entry {d} outside (0, 1)")
    if cfg.n_points is not None and (cfg.n_points < 2 or cfg.n_points % 2):
        errs.append("n_points must be even and >= 2")
    if cfg.half_width is not None and cfg.half_width <= 0:
        errs.append("half_width must be positive")
    if cfg.n_t is not None and cfg.n_t < 2 and c not in ("scaling-fit",):
        errs.append("n_t must be >= 2")
    if cfg.t_min is not None and cfg.t_max is not None and cfg.t_max <= cfg.t_min:
        errs.append("t_max must exceed t_min")
    if cfg.q_max is not None and cfg.q_max < 1:
        errs.append("q_max must be >= 1")
    if c == "fig3" and not (0 <= cfg.t_min and cfg.t_max <= 1):
        errs.append("fig3 t range must lie in [0, 1]")
    if c in ("holder", "spectrum"):
        lo, hi = cfg.window
        floor = 10.0 / cfg.q_max ** 2
        if lo < floor * (1 - 1e-12) or hi > 0.25 or lo >= hi:
            errs.append(f"scale window {cfg.window} must lie in [{floor:.3g}, 0.25]")
    if c == "holder" and cfg.side not in ("both", "left", "right"):
        errs.append("side must be both, left or right")
    if c in ("fig1",) and cfg.eps1 is not None and cfg.eps1 <= 0:
        errs.append("eps1 must be positive")
    for e in (cfg.eps1_list or []) + (cfg.eps2_list or []):
        if e <= 0:
            errs.append(f"epsilon {e} must be positive")
    if c == "scaling-fit" and math.log10(cfg.window[1] / cfg.window[0]) < 1.5:
        errs.append("scaling-fit eps window must span >= 1.5 decades")
    if c in ("dispersion-curve", "bounds-check") and cfg.datum not in ("gaussian", "ground-state", "random"):
        errs.append(f"unknown datum {cfg.datum!r}")
    if c == "dispersion-curve" and cfg.method not in ("direct", "large_t", "seminorm"):
        errs.append(f"unknown method {cfg.method!r}")
    if cfg.tol < 1e-10:
        errs.append("tol must be >= 1e-10")
    return errs


# ---------------------------------------------------------------------------
# output

@dataclass
class Table:
    header: list
    rows: list


@dataclass
class Result:
    outputs: dict = field(default_factory=dict)     # filename -> Table | dict
    summary: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    gate_ok: bool = True


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def render(obj) -> bytes:
    if isinstance(obj, Table):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(obj.header)
        for r in obj.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue().encode()
    return (json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n").encode()


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if math.isfinite(o) else str(o)
    return o


def _atomic_write(path: str, data: bytes):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class RunLock:
    """Exclusive lock file in the output directory."""

    def __init__(self, directory: str):
        self.path = os.path.join(directory, ".lock")

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise InvalidInput(f"output directory is locked by another run ({self.path})") from None
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        return self

    def __exit__(self, *exc):
        os.unlink(self.path)


def run(cfg: RunConfig) -> dict:
    """Execute one command and return its manifest."""
    cfg = resolve(cfg)
    errs = validate(cfg)
    if errs:
        raise InvalidInput("; ".join(errs))
    os.makedirs(cfg.output_dir, exist_ok=True)
    key = cfg.digest()
    cache_dir = os.path.join(cfg.output_dir, ".cache", f"{cfg.command}-{key[:16]}")
    with RunLock(cfg.output_dir):
        start = time.perf_counter()
        cached = not cfg.no_cache and os.path.exists(os.path.join(cache_dir, "result.json"))
        if cached:
            with open(os.path.join(cache_dir, "result.json")) as fh:
                meta = json.load(fh)
            blobs = {}
            for name in meta["files"]:
                with open(os.path.join(cache_dir, name), "rb") as fh:
                    blobs[name] = fh.read()
            summary, flags, gate_ok = meta["summary"], meta["flags"], meta["gate_ok"]
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                res = HANDLERS[cfg.command](cfg)
            flags = list(res.flags) + sorted({str(w.message) for w in caught})
            blobs = {name: render(obj) for name, obj in res.outputs.items()}
            summary, gate_ok = _jsonable(res.summary), bool(res.gate_ok)
            os.makedirs(cache_dir, exist_ok=True)
            for name, data in blobs.items():
                _atomic_write(os.path.join(cache_dir, name), data)
            _atomic_write(os.path.join(cache_dir, "result.json"),
                          render({"files": sorted(blobs), "summary": summary, "flags": flags,
                                  "gate_ok": gate_ok}))
        # stage everything, then rename into place
        staged = []
        try:
            for name, data in blobs.items():
                fd, tmp = tempfile.mkstemp(dir=cfg.output_dir, prefix=".tmp-")
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                staged.append((tmp, os.path.join(cfg.output_dir, name)))
            for tmp, dest in staged:
                os.replace(tmp, dest)
        finally:
            for tmp, _ in staged:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        manifest = {
            "config": cfg.snapshot(),
            "config_sha256": key,
            "version": __version__,
            "outputs": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(blobs.items())},
            "summary": summary,
            "flags": flags,
            "gate_ok": gate_ok,
            "cached": cached,
            "wall_clock_s": round(time.perf_counter() - start, 3),
        }
        _atomic_write(os.path.join(cfg.output_dir, f"{cfg.command}.manifest.json"), render(manifest))
    return manifest


# ---------------------------------------------------------------------------
# command handlers

def _times(cfg):
    return np.linspace(cfg.t_min, cfg.t_max, cfg.n_t)


def _grid(cfg):
    from .spectral import Grid1D
    return Grid1D(cfg.half_width, cfg.n_points)


def _datum(cfg, grid):
    from .spectral import gaussian_datum, random_smooth_field
    from .uncertainty import ground_state

    if cfg.datum == "gaussian":
        return gaussian_datum(grid)
    if cfg.datum == "random":
        return random_smooth_field(grid, np.random.default_rng(cfg.seed))
    return ground_state(cfg.delta, grid, tol=cfg.tol).q


def cmd_fig1(cfg):
    from .periodic import comb_grid, evaluate_hp, hp_for_comb, renormalized_profile

    t = _times(cfg)
    ref = evaluate_hp(hp_for_comb(cfg.eps1, cfg.delta, cfg.psi_sigma), t)
    cols, dists, flags = [ref], {}, []
    for e2 in cfg.eps2_list:
        g = comb_grid(cfg.eps1, e2, cfg.psi_sigma, cfg.n_points)
        cur = renormalized_profile(cfg.eps1, e2, cfg.psi_sigma, cfg.delta, t, g)
        cols.append(cur.values)
        dists[str(e2)] = float(np.max(np.abs(cur.values - ref)))
        if not cur.quality.all():
            flags.append(f"tail mass above 1e-6 at eps2={e2} (L={g.half_width:g})")
    d = [dists[str(e)] for e in cfg.eps2_list]
    header = ["t", "h_p"] + [f"profile_eps2={e:g}" for e in cfg.eps2_list]
    return Result({"fig1.csv": Table(header, list(zip(t, *cols)))},
                  {"sup_distance": dists, "monotone": bool(np.all(np.diff(d) < 0))}, flags)


def cmd_fig2(cfg):
    from .periodic import evaluate_hp, gaussian_comb_coeffs, periodic_line, psi_norm_sq

    t = _times(cfg)
    cols, ratios = [], {}
    for e1 in cfg.eps1_list:
        F = gaussian_comb_coeffs(e1, normalize=False)
        line = periodic_line(F, cfg.delta, F.M ** 2, psi_norm_sq(cfg.psi_sigma))
        v = evaluate_hp(line, t)
        cols.append(v)
        bg = float(np.median(np.abs(v)))
        peaks = evaluate_hp(line, np.array([0.0, 1.0, 2.0 / 3.0]))
        ratios[str(e1)] = (np.abs(peaks) / bg).tolist()
    header = ["t"] + [f"h_p_eps1={e:g}" for e in cfg.eps1_list]
    return Result({"fig2.csv": Table(header, list(zip(t, *cols)))},
                  {"peak_to_background_at_0_1_2/3": ratios})


def cmd_fig3(cfg):
    from .comb import totient_count
    from .farey import build_path

    t = _times(cfg)
    p = build_path(cfg.delta, cfg.q_max, t, psi_norm_sq=1.0)
    return Result({"fig3.csv": Table(["t", "H"], list(p.rows()))},
                  {"atoms": totient_count(cfg.q_max), "H0": float(p.H[0])})


def cmd_ground_state(cfg):
    from .uncertainty import ground_state, tail_exponent

    gs = ground_state(cfg.delta, _grid(cfg), tol=cfg.tol)
    summary = gs.header()
    flags = []
    if cfg.delta < 1:
        fit = tail_exponent(gs, tuple(cfg.window))
        summary["tail_exponent"] = fit.to_dict()
        summary["tail_expected"] = -(1 + 4 * cfg.delta)
        flags += fit.flags
    q = gs.q
    return Result({"ground_state.csv": Table(["x", "q"], list(zip(q.grid.x, q.samples.real)))},
                  summary, flags)


def cmd_bounds_check(cfg):
    from .dispersion import check_dynamical_bounds
    from .uncertainty import ground_state

    grid = _grid(cfg)
    if cfg.delta == 1:
        a = math.sqrt(1.0 / (4 * math.pi))
    else:
        a = ground_state(cfg.delta, grid, tol=cfg.tol).a_delta
    rep = check_dynamical_bounds(_datum(cfg, grid), cfg.delta, a, _times(cfg))
    rows = list(zip(rep.times, rep.h, rep.two_time_margin, rep.lower_bound_margin))
    return Result({"bounds.csv": Table(["t", "h", "two_time_margin", "lower_bound_margin"], rows)},
                  {"a_delta": a, "min_margin": rep.min_margin, "ok": rep.ok()}, gate_ok=rep.ok())


def cmd_decay_fit(cfg):
    from .dispersion import hhat_decay_fit, lipschitz_beta, sharpness_datum

    f = sharpness_datum(_grid(cfg), cfg.delta)
    fit = hhat_decay_fit(f, cfg.delta, cfg.t_max, tuple(cfg.window), cfg.n_t)
    exp = -(1 + lipschitz_beta(cfg.delta))
    return Result({"decay_fit.json": fit.to_dict()},
                  {"slope": fit.slope, "expected": exp, "within_soft_gate": abs(fit.slope - exp) <= 0.25},
                  fit.flags)


def spectral_bump(grid, center: float = 1.5, half: float = 0.5):
    """Datum whose transform is a smooth bump supported in [center - half, center + half]."""
    from .spectral import from_spectrum, normalized

    def bump(xi):
        u = (xi - center) / half
        inside = np.abs(u) < 1
        out = np.zeros_like(xi)
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out

    return normalized(from_spectrum(grid, bump))


def cmd_scaling_fit(cfg):
    from .dispersion import pair_scaling_fit

    f = spectral_bump(_grid(cfg))
    eps = np.geomspace(cfg.window[0], cfg.window[1], cfg.n_t)
    fit = pair_scaling_fit(f, cfg.delta, eps)
    exp = -2 * cfg.delta
    return Result({"scaling_fit.json": fit.to_dict()},
                  {"slope": fit.slope, "expected": exp, "within_soft_gate": abs(fit.slope - exp) <= 0.1},
                  fit.flags)


def cmd_divisor_check(cfg):
    from .comb import divisor_coefficient, pair_sum_bruteforce

    rows, worst, bad = [], 0.0, 0
    for d in cfg.delta_list:
        for k in range(-cfg.k_max, cfg.k_max + 1):
            if k == 0:
                continue
            a = divisor_coefficient(k, d)
            b = pair_sum_bruteforce(k, d)
            err = abs(a - b)
            worst = max(worst, err)
            bad += err > 1e-12 or (k % 4 == 2 and a != 0.0)
            rows.append((d, k, a, b, err))
    return Result({"divisor_check.csv": Table(["delta", "k", "divisor", "bruteforce", "abs_err"], rows)},
                  {"max_abs_err": worst, "mismatches": bad}, gate_ok=bad == 0)


def cmd_counting_check(cfg):
    from .farey import count_M, count_N_abs, count_N_abs_bound

    rng = np.random.default_rng(cfg.seed)
    viol, ratios = 0, []
    for _ in range(cfg.n_trials):
        a, b = np.sort(rng.random(2))
        N = int(rng.integers(1, cfg.q_max + 1))
        m = count_M((a, b), N)
        viol += m > (b - a) * N * N + 1
        if N > 2 / max(b - a, 1e-300) and N > 2:
            ratios.append(m / ((b - a) * N * N / math.log(N)))
    nviol = 0
    n_abs = max(1, cfg.n_trials // 10)
    for _ in range(n_abs):
        a, b = np.sort(rng.random(2))
        r = 10.0 ** rng.uniform(-7, -1)
        nviol += count_N_abs((a, b), r, cfg.delta) > count_N_abs_bound((a, b), r, cfg.delta)
    c = float(min(ratios)) if ratios else float("nan")
    ok = viol == 0 and nviol == 0 and c > 0
    return Result({"counting_check.json": {"M_violations": viol, "lower_constant": c,
                                           "lower_samples": len(ratios),
                                           "N_abs_violations": nviol, "N_abs_trials": n_abs}},
                  {"ok": ok}, gate_ok=ok)


def cmd_holder(cfg):
    from .farey import holder_fit

    scales = np.geomspace(cfg.window[0], cfg.window[1], cfg.n_t)
    est = holder_fit(cfg.delta, cfg.t0, scales, cfg.remove_drift, cfg.q_max, side=cfg.side)
    return Result({"holder.json": est.to_dict()}, {"exponent": est.exponent}, est.flags)


def cmd_spectrum(cfg):
    from .farey import spectrum_fit

    lo, hi = cfg.window
    levels = np.arange(round(-math.log2(hi)), round(-math.log2(lo)) + 1)
    s = spectrum_fit(cfg.delta, cfg.q_max, 2.0 ** -levels.astype(float))
    alpha = 1.0 / (1.0 + cfg.delta)
    sel = (s.gamma >= 0.15 / alpha) & (s.gamma <= 0.9 / alpha)
    dev = float(np.max(np.abs(s.d[sel] - alpha * s.gamma[sel])))
    return Result({"spectrum.json": s.to_dict(),
                   "spectrum.csv": Table(["gamma", "d"], list(zip(s.gamma, s.d)))},
                  {"max_deviation": dev, "alpha": alpha})


def cmd_dispersion_curve(cfg):
    from .dispersion import dispersion_curve, gaussian_reference

    f = _datum(cfg, _grid(cfg))
    c = dispersion_curve(f, cfg.delta, _times(cfg), cfg.method)
    header = ["t", "h", "ok"]
    cols = [c.times, c.values, c.quality]
    summary = {}
    if cfg.datum == "gaussian":
        ref = gaussian_reference(cfg.delta, c.times, c.values[0])
        header.append("reference")
        cols.append(ref)
        summary["max_rel_dev"] = float(np.max(np.abs(c.values / ref - 1)))
    flags = [] if c.quality.all() else [f"{int((~c.quality).sum())} samples outside the accurate regime"]
    return Result({"dispersion_curve.csv": Table(header, list(zip(*cols)))}, summary, flags)


def cmd_comb_measure(cfg):
    from .comb import comb_measure

    m = comb_measure(cfg.delta, cfg.q_max)
    return Result({"comb_measure.csv": Table(["p", "q", "weight"], list(m.rows()))},
                  {"atoms": len(m), "total_variation": m.total_variation()})


HANDLERS = {
    "fig1": cmd_fig1, "fig2": cmd_fig2, "fig3": cmd_fig3, "ground-state": cmd_ground_state,
    "bounds-check": cmd_bounds_check, "decay-fit": cmd_decay_fit, "scaling-fit": cmd_scaling_fit,
    "divisor-check": cmd_divisor_check, "counting-check": cmd_counting_check,
    "holder": cmd_holder, "spectrum": cmd_spectrum, "dispersion-curve": cmd_dispersion_curve,
    "comb-measure": cmd_comb_measure,
}


# ---------------------------------------------------------------------------
# argument parsing

def _flag_type(f):
    t = f.type if isinstance(f.type, str) else f.type.__name__
    if "list" in t:
        return lambda s: [float(v) for v in s.split(",") if v]
    if "bool" in t:
        return lambda s: s.lower() in ("1", "true", "yes", "on")
    if "int" in t:
        return lambda s: int(float(s))
    if "float" in t:
        return float
    return str


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdisp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    for f in dataclasses.fields(RunConfig):
        if f.name == "command":
            continue
        name = "--" + f.name.replace("_", "-")
        if f.name == "no_cache":
            common.add_argument(name, action="store_true", default=None)
        else:
            common.add_argument(name, type=_flag_type(f), default=None, dest=f.name,
                                help="comma-separated list" if "list" in str(f.type) else None)
    sub = parser.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return parser


def config_from_args(args) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        values.update({k.replace("-", "_"): v for k, v in loaded.items()})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    for name in known - {"command"}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    values["command"] = args.command
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        manifest = run(config_from_args(args))
    except (InvalidInput, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(json.dumps(_jsonable({"summary": manifest["summary"], "outputs": manifest["outputs"],
                                "flags": manifest["flags"]}), sort_keys=True, indent=2))
    if not manifest["gate_ok"]:
        print("acceptance gate failed", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
