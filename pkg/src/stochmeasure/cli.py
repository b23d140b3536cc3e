"""Seeded command-line scenarios, each writing one output file plus a JSON manifest.

Exit status: 0 success, 1 configuration or validation error, 2 computation error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .errors import MeasureError, ValidationError
from .paths import SampledPath, format_columns, read_columns

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2


class ConfigError(Exception):
    pass


# -- parameter parsing -------------------------------------------------------

def _number(kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    def parse(text):
        try:
            v = kind(text)
        except (TypeError, ValueError):
            raise ValueError(f"expected {kind.__name__}, got {text!r}") from None
        if kind is float and not math.isfinite(v):
            raise ValueError("must be finite")
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise ValueError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v > hi or (hi_open and v == hi)):
            raise ValueError(f"must be {'<' if hi_open else '<='} {hi}")
        return v
    return parse


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text
    return parse


def _text(text):
    return str(text)


def _grid(text):
    """``start:stop:count`` or ``start:stop:step`` inclusive uniform grid.

    An integer third field is a point count; anything else is a step.
    """
    try:
        a, b, last = text.split(":")
        a, b = float(a), float(b)
        try:
            n = int(last)
        except ValueError:
            step = float(last)
            if not (math.isfinite(step) and step > 0):
                raise ValueError(f"grid step must be > 0, got {last!r}") from None
            span = (b - a) / step
            n = int(round(span)) + 1
            if span < 0 or abs(span - (n - 1)) > 1e-9 * max(1.0, abs(span)):
                raise ValueError(f"step {step:g} does not divide [{a:g}, {b:g}]") from None
    except ValueError as exc:
        if "step" in str(exc):
            raise
        raise ValueError(f"grid must be start:stop:count or start:stop:step, got {text!r}") from None
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("grid needs finite ends and count >= 1")
    return np.linspace(a, b, n)


def _vector(text):
    try:
        v = np.array([float(x) for x in str(text).split(",")])
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None
    if not np.all(np.isfinite(v)):
        raise ValueError("must be finite")
    return v


@dataclass
class Param:
    name: str
    parse: Callable
    default: object = None
    help: str = ""
    required: bool = False


@dataclass
class Command:
    name: str
    help: str
    params: list
    prepare: Callable           # resolved params -> zero-arg job returning (columns or text, summary)
    needs_output: bool = True
    index: dict = field(init=False)

    def __post_init__(self):
        self.index = {p.name: p for p in self.params}


# -- drives ------------------------------------------------------------------

def _parse_drive(text):
    kind, _, args = str(text).partition(":")
    vals = _vector(args) if args else np.array([])
    if kind == "sin" and vals.size == 2:
        a, w = vals
        return lambda t: a * np.sin(w * t)
    if kind == "step" and vals.size in (1, 2):
        u0, t_on = vals[0], (vals[1] if vals.size == 2 else 0.0)
        return lambda t: np.where(t >= t_on, u0, 0.0)
    if kind == "const" and vals.size == 1:
        return lambda t: np.full_like(t, vals[0])
    if kind == "ramp" and vals.size == 2:
        return lambda t: vals[0] + vals[1] * t
    raise ValueError("drive must be sin:A,omega | step:u0[,t_on] | const:c | ramp:a,b")


def _drive_path(p):
    if p["drive-file"]:
        _, cols = read_columns(p["drive-file"])
        if len(cols) < 2:
            raise ValidationError("drive file needs columns t,value")
        return SampledPath.from_samples(cols[0], cols[1])
    f = _parse_drive(p["drive"])
    return SampledPath.from_function(f, p["t0"], p["dt"], p["steps"] + 1)


# -- commands ----------------------------------------------------------------

def _prep_respond(p):
    from .measures import parse_kernel
    from .response import ResponseModel, respond

    model = ResponseModel(p["chi0"], parse_kernel(p["kernel"]))
    drive = _drive_path(p)

    def job():
        m = respond(model, drive, p["prehistory"])
        return (("t", "H", "M"), (drive.times, drive.values, m.values)), {}
    return job


def _eit_params(p):
    from .correlations import EITParameters, parse_field

    return EITParameters(
        p["lambda1"], p["lambda2"], p["tau1"], p["tau2"], p["n"],
        H_field=parse_field(p["h-field"]), T_field=parse_field(p["t-field"]),
        Cp=parse_field(p["cp"]), T_upper=p["t-upper"], eps_T=p["eps-t"],
    )


def _prep_correlate(p):
    from .correlations import amplitude_A, amplitude_B, eit_correlation, van_hove_asymptote
    from .measures import asymptotic_amplitude, parse_kernel

    params = _eit_params(p)
    kernel = parse_kernel(p["kernel"])
    ts = p["t-grid"]

    def job():
        a, b = amplitude_A(params, p["r"]), amplitude_B(params, p["r"])
        pair = (a * b + b * b, params.n)
        corr = [eit_correlation(pair, p["r"], kernel, t) for t in ts]
        vh = [van_hove_asymptote(pair, p["r"], kernel, t) for t in ts]
        summary = {"A": a, "B": b, "Xi": pair[0], "kappa": asymptotic_amplitude(kernel, params.n)}
        return (("t", "correlation", "van_hove"), (ts, corr, vh)), summary
    return job


def _prep_van_hove(p):
    from .correlations import eit_correlation, van_hove_asymptote
    from .measures import asymptotic_amplitude, check_convergent, parse_kernel

    kernel = parse_kernel(p["kernel"])
    check_convergent(kernel, p["n"])
    pair = (p["xi"], p["n"])
    ts = p["t-grid"]

    def job():
        vh = [van_hove_asymptote(pair, 0.0, kernel, t) for t in ts]
        corr = [eit_correlation(pair, 0.0, kernel, t) for t in ts]
        return (("t", "van_hove", "correlation"), (ts, vh, corr)), {"kappa": asymptotic_amplitude(kernel, p["n"])}
    return job


def _prep_kms(p):
    from . import modular as mod

    if p["draws"] > 0:
        def job():
            rng = np.random.default_rng(p["seed"])
            rows = []
            for i in range(p["draws"]):
                d = int(rng.integers(2, 7))
                sys_ = mod.QuantumSystem(mod.random_hermitian(d, rng, 1 / math.sqrt(d)), rng.uniform(0.1, 2.0))
                tau = rng.uniform(-2.0, 2.0)
                N = mod.random_hermitian(d, rng, 1 / math.sqrt(d))
                M = mod.random_hermitian(d, rng, 1 / math.sqrt(d))
                g = mod.gibbs_state(sys_)
                pert = 0.5 * g + 0.5 * mod.random_density_matrix(d, rng)
                rows.append((i, d, sys_.beta, tau, mod.kms_residual(sys_, g, N, M, tau),
                             mod.kms_residual(sys_, pert, N, M, tau)))
            cols = np.array(rows).T
            return (("draw", "dim", "beta", "tau", "gibbs_residual", "perturbed_residual"), cols), {}
        return job

    sys_ = mod.QuantumSystem(mod.parse_matrix(p["hamiltonian"]), p["beta"])
    N, M = mod.as_observable(mod.parse_matrix(p["n-op"])), mod.as_observable(mod.parse_matrix(p["m-op"]))
    if N.shape != sys_.hamiltonian.shape or M.shape != sys_.hamiltonian.shape:
        raise ValidationError("n-op and m-op must match the hamiltonian dimension")
    taus = p["tau-grid"]

    def job():
        rho = mod.gibbs_state(sys_)
        if p["state"] == "perturbed":
            rng = np.random.default_rng(p["seed"])
            rho = 0.5 * rho + 0.5 * mod.random_density_matrix(sys_.dim, rng)
        res = [mod.kms_residual(sys_, rho, N, M, t) for t in taus]
        return (("tau", "residual"), (taus, res)), {"max_residual": max(res)}
    return job


def _prep_sdd_check(p):
    from . import sdd

    vol = sdd.Volume.uniform(p["cell-size"], p["cells"])
    sub_count = p["sub-cells"] if p["sub-cells"] is not None else max(1, p["cells"] - 1)
    if sub_count > p["cells"]:
        raise ValidationError("sub-cells must not exceed cells")
    system = sdd.poisson_sdd(p["z"], vol, p["max-order"])

    def job():
        sub = vol.subvolume(vol.cells[:sub_count])
        ref = sdd.poisson_sdd(p["z"], sub, p["max-order"])
        report = sdd.validate_sdd(system, sub, p["tol"], reference=ref)
        rho = sdd.correlation_table(system)
        back = sdd.density_from_correlation(rho, p["tol"])
        trip = max(abs(back(k) - system(k)) for n in range(p["max-order"] + 1)
                   for k in sdd.multisets(len(vol), n))
        brute = max(abs(sdd.brute_force_correlation(system, k) - rho(k))
                    for n in range(4) for k in sdd.multisets(len(vol), n))
        doc = {"validation": report.as_dict(), "round_trip_error": trip, "brute_force_error": brute,
               "rho1": [rho((i,)) for i in range(len(vol))]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", {"passed": report.passed}
    return job


def _prep_ou_sim(p):
    from .stochastic import ProcessSpec, empirical_autocorrelation, simulate_ou

    spec = ProcessSpec(p["theta"], p["sigma"], p["x0"], p["dt"], p["steps"], p["seed"])

    def job():
        path = simulate_ou(spec)
        summary = {"stationary_variance": spec.stationary_variance}
        try:
            acf = empirical_autocorrelation(path, min(3.0 / spec.theta, 0.2 * path.duration), theta=spec.theta)
        except MeasureError as exc:
            summary["note"] = f"no stationary summary: {exc}"
        else:
            summary.update(variance=acf.variance, variance_stderr=acf.variance_stderr,
                           mean=acf.mean, mean_stderr=acf.mean_stderr)
        return (("t", "value"), (path.times, path.values)), summary
    return job


def _prep_scaling(p):
    from .scaling import Configuration, ScalingSpec, coarse_grain_sequence, uniform_xi_sampler

    if p["points"]:
        config = Configuration.from_csv(p["points"])
    else:
        rng = np.random.default_rng(p["seed"])
        config = Configuration(rng.standard_normal((p["count"], p["dim"])))
    x_star = p["x-star"] if p["x-star"] is not None else np.zeros(config.nu)
    spec = ScalingSpec(p["xi"], x_star, p["sigma-exponent"])
    sampler = None
    if p["sampler"] != "fixed":
        kind, _, args = p["sampler"].partition(":")
        lo, hi = _vector(args) if kind == "uniform" and args else (None, None)
        if kind != "uniform" or lo is None:
            raise ValidationError("sampler must be fixed or uniform:lo,hi")
        sampler = uniform_xi_sampler(lo, hi)

    def job():
        seq = coarse_grain_sequence(config, spec, p["steps"], sampler, p["seed"])
        cols = ([s.step for s in seq], [s.xi for s in seq], [s.max_distance for s in seq],
                [s.energy_distance for s in seq])
        return (("step", "xi", "max_distance", "energy_distance"), cols), {}
    return job


def _prep_hysteresis(p):
    from .hysteresis import closed_form_area, frequency_scan, parse_omega_scan
    from .measures import parse_kernel
    from .response import ResponseModel

    model = ResponseModel(p["chi0"], parse_kernel(p["kernel"]))
    omegas = parse_omega_scan(p["omega-scan"])

    def job():
        rows = frequency_scan(model, p["amplitude"], omegas, p["periods"])
        try:
            exact = [closed_form_area(model, p["amplitude"], w) for w in omegas]
        except MeasureError:
            exact = [math.nan] * len(omegas)
        cols = ([r.omega for r in rows], [r.area for r in rows], [r.phase_lag for r in rows],
                [r.response_amplitude for r in rows], exact)
        unsettled = [r.omega for r in rows if not r.converged]
        summary = {"unsettled_omegas": unsettled} if unsettled else {}
        return (("omega", "area", "phase_lag", "response_amplitude", "closed_form_area"), cols), summary
    return job


_KERNEL = Param("kernel", _text, "exp:1:1", "kernel kind:amplitude:tau")
_POS = _number(float, 0, lo_open=True)

COMMANDS = {c.name: c for c in [
    Command("respond", "memory response to a sampled drive", [
        _KERNEL,
        Param("chi0", _number(float), 1.0, "bare susceptibility"),
        Param("drive", _text, "sin:1,1", "sin:A,omega | step:u0[,t_on] | const:c | ramp:a,b"),
        Param("drive-file", _text, "", "CSV with columns t,value (overrides drive)"),
        Param("t0", _number(float), 0.0, "start time"),
        Param("dt", _POS, 0.01, "time step"),
        Param("steps", _number(int, 1), 1000, "number of steps"),
        Param("prehistory", _choice("hold", "zero"), "hold", "drive before t0"),
    ], _prep_respond),
    Command("correlate", "binary-mixture correlation and its long-time asymptote", [
        Param("lambda1", _number(float), 1.0), Param("lambda2", _number(float), 1.0),
        Param("tau1", _POS, 0.5), Param("tau2", _POS, 0.5), Param("n", _POS, 0.5),
        Param("h-field", _text, "const:1"), Param("t-field", _text, "const:1"),
        Param("cp", _text, "linear:0,1"), Param("t-upper", _POS, 1.0),
        Param("eps-t", _number(float, 0, lo_open=True), None), Param("r", _number(float), 0.0),
        Param("kernel", _text, "ou:1:1"),
        Param("t-grid", _grid, _grid("0:10:101"), "start:stop:count or start:stop:step"),
        Param("params", _text, "", "key = value file with model parameters (lambda1 ... eps-t)"),
    ], _prep_correlate),
    Command("van-hove", "asymptote kappa Xi e^{-2nt} next to the full integral", [
        Param("kernel", _text, "ou:1:1"), Param("n", _POS, 0.5), Param("xi", _number(float), 1.0),
        Param("t-grid", _grid, _grid("0:5:51"), "start:stop:count or start:stop:step"),
    ], _prep_van_hove),
    Command("kms", "KMS residuals on a tau grid, or over random draws", [
        Param("hamiltonian", _text, "pauli-z"), Param("beta", _POS, 1.0),
        Param("n-op", _text, "pauli-x"), Param("m-op", _text, "pauli-y"),
        Param("tau-grid", _grid, _grid("-2:2:41")), Param("state", _choice("gibbs", "perturbed"), "gibbs"),
        Param("draws", _number(int, 0), 0, "random draws instead of the presets"),
    ], _prep_kms),
    Command("sdd-check", "Poisson density system: identities, round trip, enumeration", [
        Param("z", _POS, 1.0), Param("cells", _number(int, 1, 6), 3),
        Param("cell-size", _POS, 1.0 / 3.0), Param("max-order", _number(int, 1, 40), 20),
        Param("sub-cells", _number(int, 1), None), Param("tol", _POS, 1e-8),
    ], _prep_sdd_check),
    Command("ou-sim", "Ornstein-Uhlenbeck path", [
        Param("theta", _POS, 1.0), Param("sigma", _number(float, 0), math.sqrt(2.0)),
        Param("x0", _number(float), 0.0), Param("dt", _POS, 0.01),
        Param("steps", _number(int, 1), 10000),
    ], _prep_ou_sim),
    Command("scaling", "coarse-graining sequence of a point configuration", [
        Param("points", _text, "", "CSV of points (default: seeded normal sample)"),
        Param("count", _number(int, 1), 100), Param("dim", _number(int, 1, 2), 1),
        Param("xi", _number(float, 0, 1), 0.5), Param("x-star", _vector, None),
        Param("sigma-exponent", _number(float), 0.0), Param("steps", _number(int, 1), 10),
        Param("sampler", _text, "fixed", "fixed | uniform:lo,hi"),
    ], _prep_scaling),
    Command("hysteresis", "loop area and phase lag over a frequency scan", [
        _KERNEL, Param("chi0", _number(float), 1.0), Param("amplitude", _POS, 1.0),
        Param("omega-scan", _text, "0.1:10:log9", "lo:hi:logN | lo:hi:linN"),
        Param("periods", _number(int, 2), 2),
    ], _prep_hysteresis),
]}

_COMMON = [
    Param("seed", _number(int, 0), 0, "seed for every random draw"),
    Param("out", _text, None, "output file; the manifest goes to <out>.manifest.json"),
]


# -- config resolution -------------------------------------------------------

def _canon_key(k):
    return k.strip().lower().replace("_", "-")


def load_config(path, command):
    if not os.path.isfile(path):
        raise ConfigError(f"config file {path!r} not found")
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"config file {path!r}: {exc}") from None
    if not cp.sections():
        raise ConfigError(f"config file {path!r} is empty")
    unknown = [s for s in cp.sections() if s not in COMMANDS]
    if unknown:
        raise ConfigError(f"unknown config section(s) {unknown}; expected command names")
    if command not in cp:
        raise ConfigError(f"config file {path!r} has no [{command}] section")
    return {_canon_key(k): v for k, v in cp[command].items()}


_MODEL_KEYS = ("lambda1", "lambda2", "tau1", "tau2", "n", "h-field", "t-field", "cp", "t-upper", "eps-t")


def load_params(path):
    """Flat ``key = value`` file holding model parameters, no section header."""
    if not os.path.isfile(path):
        raise ConfigError(f"params file {path!r} not found")
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[params]\n" + fh.read(), source=path)
    except configparser.Error as exc:
        raise ConfigError(f"params file {path!r}: {exc}") from None
    values = {_canon_key(k): v for k, v in cp["params"].items()}
    bad = sorted(set(values) - set(_MODEL_KEYS))
    if bad:
        raise ConfigError(f"params file {path!r}: unknown key(s) {bad}; allowed: {', '.join(_MODEL_KEYS)}")
    return values


def resolve(command, file_values, flag_values):
    cmd = COMMANDS[command]
    params = {p.name: p for p in cmd.params + _COMMON}
    extra = flag_values.get("params") or file_values.get("params")
    if extra and "params" in params:
        # precedence: config section < params file < flags
        file_values = {**file_values, **load_params(extra)}
    raw = {}
    for source in (file_values, flag_values):
        for k, v in source.items():
            if k not in params:
                raise ConfigError(f"unknown key {k!r} for {command}; allowed: {', '.join(sorted(params))}")
            raw[k] = v
    resolved = {}
    for name, p in params.items():
        if name in raw:
            try:
                resolved[name] = p.parse(raw[name])
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from None
        else:
            resolved[name] = p.default
    shown = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in resolved.items()}
    if cmd.needs_output and not resolved["out"]:
        raise ConfigError("out: an output path is required")
    return resolved, shown


# -- output ------------------------------------------------------------------

def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path(out):
    return out + ".manifest.json"


def run(command, file_values=None, flag_values=None):
    """Validate everything before computing; write only once all results exist."""
    params, shown = resolve(command, file_values or {}, flag_values or {})
    out = params["out"]
    if not os.path.isdir(os.path.dirname(os.path.abspath(out))):
        raise ConfigError(f"out: directory of {out!r} does not exist")
    try:
        job = COMMANDS[command].prepare(params)
    except MeasureError:
        raise
    except ValueError as exc:     # malformed preset strings
        raise ValidationError(str(exc)) from None
    start = time.perf_counter()
    result, summary = job()
    wall = time.perf_counter() - start
    text = result if isinstance(result, str) else format_columns(*result)
    manifest = {
        "command": command,
        "config": shown,
        "seed": params["seed"],
        "version": __version__,
        "wall_time_s": wall,
        "output": out,
        "summary": summary,
    }
    _atomic_write(out, text)
    _atomic_write(manifest_path(out), json.dumps(manifest, indent=2, sort_keys=True, default=float) + "\n")
    return manifest


# -- selftest ----------------------------------------------------------------

def _selftest_items(scale):
    from .hysteresis import DriveCycle, closed_form_area, loop_area, run_cycle
    from .measures import MemoryKernel, asymptotic_amplitude
    from .modular import QuantumSystem, gibbs_state, kms_residual, random_hermitian
    from .response import ResponseModel, mcv_residual
    from . import sdd

    def kappa():
        err = abs(asymptotic_amplitude(MemoryKernel.ou(), 0.5) - 2.0)
        return err, 1e-8

    def kms():
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(2, 7))
            s = QuantumSystem(random_hermitian(d, rng, 1 / math.sqrt(d)), rng.uniform(0.1, 2.0))
            N, M = (random_hermitian(d, rng, 1 / math.sqrt(d)) for _ in range(2))
            worst = max(worst, kms_residual(s, gibbs_state(s), N, M, rng.uniform(-2, 2)))
        return worst, 1e-10

    def sdd_trip():
        vol = sdd.Volume.uniform(0.5, 2)
        d = sdd.poisson_sdd(1.0, vol, 20)
        back = sdd.density_from_correlation(sdd.correlation_table(d))
        err = max(abs(back(k) - d(k)) for n in range(21) for k in sdd.multisets(2, n))
        return err, 1e-8

    def mcv():
        m = ResponseModel(1.0, MemoryKernel.exponential(1.0, 1.0))
        dts = (1e-2, 5e-3, 2.5e-3)
        res = [mcv_residual(m, SampledPath.from_function(lambda t: np.sin(3 * t), 0.0, h, int(round(4 / h)) + 1))
               for h in dts]
        slope = float(np.polyfit(np.log(dts), np.log(res), 1)[0])
        return abs(slope - 2.0), 0.2

    def loop():
        m = ResponseModel(1.0, MemoryKernel.exponential(1.0, 1.0))
        r = run_cycle(m, DriveCycle(1.0, 1.0))
        exact = closed_form_area(m, 1.0, 1.0)
        return abs(loop_area(r.drive, r.response, r.window) / exact - 1.0), 1e-3

    items = [("kappa identity", kappa), ("KMS residual", kms), ("SDD round trip", sdd_trip),
             ("relaxation-equation order", mcv), ("loop area closed form", loop)]
    for name, f in items:
        try:
            err, tol = f()
            yield name, err < tol * scale, f"error {err:.3g} (tolerance {tol * scale:.3g})"
        except Exception as exc:   # report, never throw
            yield name, False, f"{type(exc).__name__}: {exc}"


def selftest(scale=1.0, stream=None):
    stream = stream or sys.stdout
    ok = True
    for name, passed, detail in _selftest_items(scale):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}", file=stream)
    return ok


# -- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="stochmeasure", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS.values():
        sp = sub.add_parser(cmd.name, help=cmd.help, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="INI file; values come from the section named after the command")
        for p in cmd.params + _COMMON:
            sp.add_argument(f"--{p.name}", dest=p.name, help=p.help or None)
    st = sub.add_parser("selftest", help="fast acceptance subset")
    st.add_argument("--tolerance-scale", type=float, default=1.0,
                    help="multiply every tolerance (values below 1 tighten the checks)")
    return ap


def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    if command == "selftest":
        return EXIT_OK if selftest(args["tolerance_scale"]) else EXIT_COMPUTE
    try:
        config = args.pop("config", None)
        file_values = load_config(config, command) if config is not None else {}
        manifest = run(command, file_values, args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MeasureError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {manifest['output']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
