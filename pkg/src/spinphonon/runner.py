"""Named scenarios, parameter sweeps, configuration, and CSV output.

Scenarios run in dimensionless units: entangle/transfer/ensemble use the
enhanced coupling g*|alpha| as the frequency unit, squeeze uses the
squeezing strength eta. Configs quote rates the way experiments do, as
multiples of the bare coupling g (gamma2_over_g etc.); the conversion
factor (alpha_abs, or alpha_abs^2/omega_over_g for squeezing) is applied
here and recorded in the output header.

Config files are flat ``key = value`` text (UTF-8, '#' comments); CLI
flags ``--key value`` override file values.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__, _backends
from .dynamics import (EvolutionSpec, Trajectory, bath_terms_ensemble,
                       bath_terms_single, bath_terms_squeeze, evolve_master,
                       evolve_pure)
from .errors import ConfigError, TruncationGuardError
from .hilbert import (DensityMatrix, HilbertSpace, boson, embed,
                      number_operator, qubit, tensor_density, thermal_state)
from .models import (ModelParams, build_H_effective_JC, build_H_ensemble,
                     build_H_squeeze_eff, collective_mode_ops)
from .observables import (BipartiteSplit, boundary_population, fidelity_pure,
                          negativity, oracle_ensemble_state, oracle_jc_state)

SCENARIOS = ("entangle", "transfer", "ensemble", "squeeze", "sweep")
P_TAIL_LIMIT = 1e-4

_COMMON_DEFAULTS = {
    "alpha_abs": 50000.0,
    "gamma2_over_g": 5.0,
    "dephasing_over_g": 50.0,
    "n_bath": 20.0,
    "n_init": 0.0,
    "n_max": 20,
    "dt": 1e-3,
    "record_every": 1,
    "positivity_every": 1,
    "out": "",
    "fmt": "csv",
}

_DEFAULTS = {
    "entangle": {**_COMMON_DEFAULTS, "t_final": math.pi},
    "transfer": {**_COMMON_DEFAULTS, "t_final": math.pi / 2},
    "ensemble": {**_COMMON_DEFAULTS, "n_init": 0.1,
                 "n_max": 8, "record_every": 5,
                 "N_list": [1, 2, 3, 4, 5]},
    "squeeze": {**_COMMON_DEFAULTS, "gamma3_over_g": 5.0,
                "omega_over_g": 1e6, "delta_phase": math.pi / 2,
                "n_bath": None, "n_max": 12, "t_final": 0.75,
                "positivity_every": 25},
}
_SWEEP_KEYS = {"mode", "axis", "values"}


# ------------------------------------------------------------ configuration

def _parse_scalar(text: str):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment; commas make
    lists."""
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if "," in value:
            cfg[key] = [_parse_scalar(v) for v in value.split(",") if v.strip()]
        else:
            cfg[key] = _parse_scalar(value)
    return cfg


def resolve_config(name: str) -> str:
    """Read a config by filesystem path, or by packaged name (e.g. 'fig2')."""
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return fh.read()
    base = name if name.endswith(".cfg") else name + ".cfg"
    packaged = resources.files("spinphonon.configs").joinpath(base)
    if packaged.is_file():
        return packaged.read_text(encoding="utf-8")
    raise ConfigError(f"config {name!r}: no such file or packaged config")


def build_config(scenario: str, file_cfg: dict | None = None,
                 overrides: dict | None = None) -> dict:
    """Merge defaults, config file, and CLI overrides; validate keys."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from "
                          f"{SCENARIOS}")
    if scenario == "sweep":
        merged = dict(file_cfg or {})
        merged.update(overrides or {})
        missing = _SWEEP_KEYS - set(merged)
        if missing:
            raise ConfigError(f"sweep config missing keys {sorted(missing)}")
        mode = merged["mode"]
        if mode not in _DEFAULTS:
            raise ConfigError(f"sweep mode {mode!r} must be one of "
                              f"{sorted(_DEFAULTS)}")
        base = {k: v for k, v in merged.items() if k not in _SWEEP_KEYS}
        cfg = build_config(mode, base, None)
        values = merged["values"]
        if not isinstance(values, list):
            values = [values]
        axis = merged["axis"]
        if axis not in cfg:
            raise ConfigError(f"sweep axis {axis!r} is not a {mode} "
                              f"parameter; known: {sorted(cfg)}")
        return {"mode": mode, "axis": axis, "values": values, **cfg}
    cfg = dict(_DEFAULTS[scenario])
    for source in (file_cfg or {}), (overrides or {}):
        for key, value in source.items():
            if key not in cfg:
                raise ConfigError(f"unknown {scenario} key {key!r}; known: "
                                  f"{sorted(cfg)}")
            cfg[key] = value
    _validate_numerics(cfg)
    return cfg


def _validate_numerics(cfg: dict) -> None:
    if cfg["dt"] <= 0:
        raise ConfigError("dt must be positive")
    if cfg.get("t_final", 1.0) <= 0:
        raise ConfigError("t_final must be positive")
    if cfg["record_every"] < 1 or int(cfg["record_every"]) != cfg["record_every"]:
        raise ConfigError("record_every must be a positive integer")
    n_max = cfg["n_max"]
    if n_max != "auto" and (int(n_max) != n_max or n_max < 1):
        raise ConfigError("n_max must be a positive integer or 'auto'")
    if cfg["alpha_abs"] <= 0:
        raise ConfigError("alpha_abs must be positive")
    if cfg["fmt"] != "csv":
        raise ConfigError(f"only csv output is supported, got {cfg['fmt']!r}")


def auto_cutoff(n_init: float, t_final: float,
                lo: int = 8, hi: int = 24) -> int:
    """Smallest Fock cutoff keeping the predicted boundary population of a
    squeezing run safely under the truncation guard.

    The per-mode occupation under the squeezing generator grows as
    n_init + xi^2 (2 n_init + 1); the marginal stays thermal-like, so a
    geometric tail estimate with a 2x safety margin is adequate (measured
    boundary populations run ~1.3x above the thermal-marginal estimate).
    """
    n_eff = n_init + t_final * t_final * (2.0 * n_init + 1.0)
    for n_max in range(lo, hi + 1):
        p_top = n_eff ** n_max / (1.0 + n_eff) ** (n_max + 1)
        if 2.0 * p_top <= P_TAIL_LIMIT / 2.0:
            return n_max
    return hi


# ------------------------------------------------------------- scenarios

@dataclass
class Scenario:
    """A fully resolved run: mode, dimensionless parameters, numerics."""

    name: str
    cfg: dict
    params: ModelParams
    n_max: int
    dt: float
    t_final: float
    record_every: int
    positivity_every: int
    derived: dict = field(default_factory=dict)
    out: str = ""
    fmt: str = "csv"


def build_scenario(name: str, cfg: dict) -> Scenario:
    """Convert a validated config into dimensionless ModelParams."""
    alpha_abs = float(cfg["alpha_abs"])
    if name == "squeeze":
        eta_over_g = alpha_abs ** 2 / float(cfg["omega_over_g"])
        scale = eta_over_g
        n_bath = cfg["n_bath"]
        if n_bath is None:
            n_bath = cfg["n_init"]  # runs quote one thermal number for both
        params = ModelParams(
            Omega1=1.0, gamma1=1.0, g=1.0, omega=1.0,
            gamma2=float(cfg["gamma2_over_g"]) / scale,
            gamma3=float(cfg["gamma3_over_g"]) / scale,
            dephasing_rate=0.0,
            n_bath=float(n_bath), n_init=float(cfg["n_init"]),
            delta_phase=float(cfg["delta_phase"]),
        ).with_derived_alpha()
        derived = {"eta_over_g": eta_over_g, "time_unit": "1/eta",
                   "gamma2_dimless": params.gamma2,
                   "gamma3_dimless": params.gamma3,
                   "n_bath_used": float(n_bath)}
        n_max = cfg["n_max"]
        if n_max == "auto":
            n_max = auto_cutoff(float(cfg["n_init"]), float(cfg["t_final"]))
            derived["n_max_auto"] = n_max
    else:
        scale = alpha_abs
        params = ModelParams(
            Omega1=alpha_abs, gamma1=1.0, g=1.0 / alpha_abs,
            gamma2=float(cfg["gamma2_over_g"]) / scale,
            gamma3=0.0,
            dephasing_rate=float(cfg["dephasing_over_g"]) / scale,
            n_bath=float(cfg["n_bath"]), n_init=float(cfg["n_init"]),
        ).with_derived_alpha()
        derived = {"g_eff": 1.0, "time_unit": "1/(g|alpha|)",
                   "gamma2_dimless": params.gamma2,
                   "dephasing_dimless": params.dephasing_rate}
        n_max = cfg["n_max"]
        if n_max == "auto":
            n_max = _COMMON_DEFAULTS["n_max"]
    return Scenario(
        name=name, cfg=cfg, params=params, n_max=int(n_max),
        dt=float(cfg["dt"]), t_final=float(cfg.get("t_final", 1.0)),
        record_every=int(cfg["record_every"]),
        positivity_every=int(cfg["positivity_every"]), derived=derived,
        out=str(cfg.get("out", "") or ""), fmt=str(cfg.get("fmt", "csv")))


@dataclass
class RunResult:
    scenario: Scenario
    trajectory: Trajectory | None
    summary: dict
    columns: list[str]
    rows: list[tuple]


def _grid(t_final: float, dt: float, record_every: int, divisor: int) -> float:
    """dt adjusted so summary times (quarters/halves) land on record points."""
    chunk = divisor * record_every
    n_steps = max(chunk, chunk * round(t_final / (dt * chunk)))
    return t_final / n_steps


def _nearest_index(times: np.ndarray, target: float) -> int:
    return int(np.argmin(np.abs(times - target)))


def _spin_mode_setup(s: Scenario):
    space = HilbertSpace([qubit(), boson(s.n_max, "b")])
    h = build_H_effective_JC(s.params, space)
    terms = bath_terms_single(s.params, space)
    excited = np.zeros((2, 2), dtype=np.complex128)
    excited[0, 0] = 1.0
    rho0 = tensor_density(space, [excited,
                                  thermal_state(s.params.n_init, s.n_max).matrix])
    return space, h, terms, rho0


def _run_exchange(s: Scenario) -> tuple[Trajectory, HilbertSpace]:
    """Shared evolution for the entangle and transfer scenarios."""
    space, h, terms, rho0 = _spin_mode_setup(s)
    split = BipartiteSplit(space, [0])
    n_op = embed(number_operator(s.n_max), 1, space)
    dt_eff = _grid(s.t_final, s.dt, s.record_every, 4)
    spec = EvolutionSpec(
        hamiltonian=h, terms=terms, t_final=s.t_final, dt=dt_eff,
        record_every=s.record_every,
        positivity_every=s.positivity_every,
        observables={
            "negativity": lambda t, r: negativity(r, split),
            "fidelity": lambda t, r: fidelity_pure(
                oracle_jc_state(t, 1.0, space), r),
            "n_phonon": n_op,
        })
    return evolve_master(rho0, spec), space


def run_entangle(s: Scenario) -> RunResult:
    traj, _ = _run_exchange(s)
    neg = traj.records["negativity"]
    imax = int(np.argmax(neg))
    summary = {
        "max_negativity": float(neg[imax]),
        "t_at_max": float(traj.times[imax]),
    }
    return RunResult(s, traj, summary, *_exchange_rows(traj))


def run_transfer(s: Scenario) -> RunResult:
    traj, _ = _run_exchange(s)
    summary = {
        "fidelity_transfer": float(
            traj.records["fidelity"][_nearest_index(traj.times, math.pi / 2)]),
        "fidelity_entangle": float(
            traj.records["fidelity"][_nearest_index(traj.times, math.pi / 4)]),
    }
    return RunResult(s, traj, summary, *_exchange_rows(traj))


def _exchange_rows(traj: Trajectory):
    columns = ["t", "negativity", "fidelity", "trace_dev", "n_phonon"]
    rows = list(zip(traj.times, traj.records["negativity"],
                    traj.records["fidelity"], traj.records["trace_dev"],
                    np.real(traj.records["n_phonon"])))
    return columns, rows


def measure_rabi_period(times: np.ndarray, populations: np.ndarray) -> float:
    """Full oscillation period from the first interior maximum of a
    cos^2-shaped return probability, with parabolic refinement."""
    for i in range(1, len(populations) - 1):
        if (populations[i] >= populations[i - 1]
                and populations[i] >= populations[i + 1]
                and populations[i] > 0.5):
            y0, y1, y2 = populations[i - 1:i + 2]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            dt = times[i] - times[i - 1]
            return 2.0 * (times[i] + shift * dt)
    raise TruncationGuardError("no interior oscillation maximum found; "
                               "extend t_final")


def _ensemble_point(s: Scenario, n_spins: int) -> dict:
    space = HilbertSpace([qubit(f"nv{i}") for i in range(n_spins)]
                         + [boson(s.n_max, "b")])
    h = build_H_ensemble(s.params, space)
    terms = bath_terms_ensemble(s.params, space)

    psi0 = oracle_ensemble_state(0.0, 1.0, n_spins, space)
    # lossless companion run to measure the collective oscillation period
    t_probe = 1.25 * 2.0 * math.pi / math.sqrt(n_spins)
    probe = evolve_pure(
        psi0, h, t_probe, s.dt, record_every=1,
        observables={"p0": lambda t, v: abs(np.vdot(psi0.amplitudes, v)) ** 2})
    period = measure_rabi_period(probe.times, probe.records["p0"])

    spin_block = np.array([[1.0 + 0j]])
    w = psi0.amplitudes.reshape(2 ** n_spins, s.n_max + 1)[:, 0]
    spin_block = np.outer(w, w.conj())
    rho0 = DensityMatrix(space, np.kron(
        spin_block, thermal_state(s.params.n_init, s.n_max).matrix))

    t_transfer = math.pi / (2.0 * math.sqrt(n_spins))
    dt_eff = _grid(t_transfer, s.dt, s.record_every, 2)
    spec = EvolutionSpec(
        hamiltonian=h, terms=terms, t_final=t_transfer, dt=dt_eff,
        record_every=s.record_every, positivity_every=s.positivity_every,
        observables={
            "fid_transfer": lambda t, r: fidelity_pure(
                oracle_ensemble_state(t, 1.0, n_spins, space), r),
        })
    traj = evolve_master(rho0, spec)
    mid = _nearest_index(traj.times, t_transfer / 2.0)
    return {
        "N": n_spins,
        "fidelity_transfer": float(traj.records["fid_transfer"][-1]),
        "fidelity_entangle": float(traj.records["fid_transfer"][mid]),
        "rabi_period": float(period),
        "rabi_period_expected": 2.0 * math.pi / math.sqrt(n_spins),
        "max_trace_dev": traj.meta["max_trace_dev"],
    }


def run_ensemble(s: Scenario) -> RunResult:
    n_list = s.cfg["N_list"]
    if not isinstance(n_list, list):
        n_list = [n_list]
    columns = ["axis_value", "fidelity_transfer", "fidelity_entangle",
               "rabi_period", "runtime_s"]
    rows = []
    points = []
    for n_spins in n_list:
        t0 = time.perf_counter()
        point = _ensemble_point(s, int(n_spins))
        point["runtime_s"] = time.perf_counter() - t0
        points.append(point)
        rows.append((point["N"], point["fidelity_transfer"],
                     point["fidelity_entangle"], point["rabi_period"],
                     point["runtime_s"]))
    summary = {f"fidelity_transfer_N{pt['N']}": pt["fidelity_transfer"]
               for pt in points}
    summary["points"] = points
    return RunResult(s, None, summary, columns, rows)


def run_squeeze(s: Scenario) -> RunResult:
    space = HilbertSpace([boson(s.n_max, "b"), boson(s.n_max, "c")])
    h = build_H_squeeze_eff(s.params, space)
    terms = bath_terms_squeeze(s.params, space)
    thermal = thermal_state(s.params.n_init, s.n_max).matrix
    rho0 = tensor_density(space, [thermal, thermal])
    ops = collective_mode_ops(space, s.params.delta_phase)
    d1 = ops.d1
    d1_sq_op = np.ascontiguousarray(d1 @ d1)
    dt_eff = _grid(s.t_final, s.dt, s.record_every, 1)
    spec = EvolutionSpec(
        hamiltonian=h, terms=terms, t_final=s.t_final, dt=dt_eff,
        record_every=s.record_every, positivity_every=s.positivity_every,
        observables={
            "d1_sq": d1_sq_op,
            "d1_mean": d1,
            "p_tail": lambda t, r: boundary_population(r, space),
        })
    traj = evolve_master(rho0, spec)
    p_tail_max = float(np.max(traj.records["p_tail"]))
    if p_tail_max > P_TAIL_LIMIT:
        raise TruncationGuardError(
            f"boundary population {p_tail_max:.2e} exceeds {P_TAIL_LIMIT:.0e}; "
            f"raise n_max (currently {s.n_max}) or shorten t_final")
    d1_sq = np.real(traj.records["d1_sq"])
    d1_var = d1_sq - np.real(traj.records["d1_mean"]) ** 2
    imin = int(np.argmin(d1_sq))
    summary = {
        "min_d1_sq": float(d1_sq[imin]),
        "xi_at_min": float(traj.times[imin]),
        "p_tail_max": p_tail_max,
    }
    columns = ["xi", "d1_sq", "d1_var", "p_tail", "trace_dev"]
    rows = list(zip(traj.times, d1_sq, d1_var, traj.records["p_tail"],
                    traj.records["trace_dev"]))
    return RunResult(s, traj, summary, columns, rows)


# ---------------------------------------------------------------- sweeps

_RUNNERS = {
    "entangle": run_entangle,
    "transfer": run_transfer,
    "ensemble": run_ensemble,
    "squeeze": run_squeeze,
}


def run_scenario(name: str, cfg: dict) -> RunResult:
    return _RUNNERS[name](build_scenario(name, cfg))


def _sweep_point(payload):
    mode, cfg, axis, value = payload
    point_cfg = dict(cfg)
    point_cfg[axis] = value
    t0 = time.perf_counter()
    result = run_scenario(mode, point_cfg)
    runtime = time.perf_counter() - t0
    summary = {k: v for k, v in result.summary.items()
               if isinstance(v, (int, float))}
    return value, summary, runtime


def sweep_workers(n_points: int) -> int:
    env = os.environ.get("SIM_THREADS", "").strip()
    workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(workers, n_points))


def run_sweep(cfg: dict) -> RunResult:
    """One independent scenario per axis value; table assembled in input
    order regardless of completion order or worker count."""
    mode, axis = cfg["mode"], cfg["axis"]
    values = cfg["values"]
    base = {k: v for k, v in cfg.items() if k not in _SWEEP_KEYS}
    payloads = [(mode, base, axis, v) for v in values]
    workers = sweep_workers(len(values))
    if workers == 1:
        results = [_sweep_point(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, payloads))

    metric_keys = sorted(results[0][1]) if results else []
    columns = ["axis_value"] + metric_keys + ["runtime_s"]
    rows = [(value, *[summ[k] for k in metric_keys], runtime)
            for value, summ, runtime in results]
    summary: dict = {"axis": axis, "mode": mode, "workers": workers}
    if mode == "squeeze" and axis == "n_init" and len(values) >= 2:
        xs = np.asarray(values, dtype=float)
        ys = np.asarray([summ["min_d1_sq"] for _, summ, _ in results])
        summary["slope_k"] = float(np.polyfit(xs, ys, 1)[0])
    scenario = Scenario(name="sweep", cfg=cfg, params=None, n_max=0,
                        dt=float(base.get("dt", 0.0)),
                        t_final=float(base.get("t_final", 0.0)),
                        record_every=1, positivity_every=1,
                        out=str(base.get("out", "") or ""),
                        fmt=str(base.get("fmt", "csv")))
    return RunResult(scenario, None, summary, columns, rows)


# ------------------------------------------------------------------ output

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12e}"


def render_csv(result: RunResult) -> str:
    """Self-describing header, one data row per record, trailing summary.

    All values are formatted to fixed precision so identical configs give
    identical files (runtime_s columns excepted, by nature).
    """
    s = result.scenario
    lines = [f"# spinphonon {__version__}",
             f"# backend = {_backends.BACKEND}",
             f"# scenario = {s.name}"]
    for key in sorted(s.cfg):
        value = s.cfg[key]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {key} = {value}")
    for key in sorted(s.derived):
        lines.append(f"# derived_{key} = {s.derived[key]}")
    if result.trajectory is not None:
        lines.append(f"# dt_eff = {result.trajectory.meta['dt_eff']!r}")
        lines.append(f"# n_steps = {result.trajectory.meta['n_steps']}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row))
    for key in sorted(result.summary):
        value = result.summary[key]
        if isinstance(value, (int, float, np.floating)):
            lines.append(f"# summary_{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def write_output(result: RunResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_csv(result))


def format_summary(result: RunResult) -> str:
    parts = [f"scenario={result.scenario.name}",
             f"backend={_backends.BACKEND}"]
    for key in sorted(result.summary):
        value = result.summary[key]
        if isinstance(value, (int, float, np.floating)):
            parts.append(f"{key}={value:.6g}")
        elif isinstance(value, str):
            parts.append(f"{key}={value}")
    return "  ".join(parts)
