"""Scenario configuration, figure presets, orchestration and file output.

A scenario is described by a YAML key/value tree (or a numbered preset).
Running it evolves the chosen master equation(s) over the sample grid and
emits one scalar CSV per solver, one photon-distribution CSV per snapshot
time, and a deterministic provenance record.  With ``solver: all`` the
standard comparison triple is produced: GKSL, dressed ME with white
noise, and dressed ME with Ohmic noise (the blue/black/red convention of
the figure renderer).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .dressed import (
    SpectralDensity,
    build_dressed_basis,
    compute_rates,
    compute_w_tensors,
    evolve_dme_bare,
    evolve_dme_dressed,
)
from .errors import ParseError, TruncationNotConverged, ValidationError
from .gksl import BareCoefficients, RateParams, evolve_gksl
from .hilbert import ModelParams, ModulationParams, TruncationScheme, build_hamiltonian, build_operators
from .observables import field_distribution, observe, photon_distribution, postselect_ground
from .rk import IntegratorConfig
from .states import (
    DEFAULT_TAIL_TOL,
    FieldStateSpec,
    auto_truncation,
    generate_field_state,
    project_to_dressed,
)

SOLVER_CHOICES = ("gksl", "dme_dressed", "dme_bare", "all")
DEFAULT_SNAPSHOT_CANDIDATES = (1000.0, 2000.0, 3000.0)
SCALAR_COLUMNS = ["t", "P_e", "n_mean", "mandel_Q", "negativity",
                  "purity_qubit", "purity_field"]
PS_COLUMNS = ["P_g", "n_mean_ps", "mandel_Q_ps", "F_ph", "M_av", "M_opt"]


def _triple(g, Omega):
    return {"model": {"g": g, "Omega0": Omega}}


def _merge(base: dict, extra: dict) -> dict:
    out = {k: (v.copy() if isinstance(v, dict) else v) for k, v in base.items()}
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _preset_table() -> dict[int, dict]:
    """Published parameter sets for the 18 reference scenarios."""
    coh = {"initial": {"kind": "coherent", "alpha": math.sqrt(50.0)},
           "rates": {"kappa0": 2e-4, "gamma0": 2e-4, "gamma_phi": 2e-4},
           "grid": {"t_max": 3000.0}}
    cat = {"initial": {"kind": "odd_cat", "alpha": 7.071},
           "rates": {"kappa0": 1e-5, "gamma0": 1e-5, "gamma_phi": 1e-5},
           "grid": {"t_max": 3000.0}}
    sqc = {"initial": {"kind": "squeezed_coherent", "s": 0.7, "beta": 14.157},
           "rates": {"kappa0": 1e-5, "gamma0": 1e-5, "gamma_phi": 1e-5},
           "grid": {"t_max": 3000.0}}
    sqv = {"initial": {"kind": "squeezed_vacuum", "s": 1.544},
           "rates": {"kappa0": 1e-3, "gamma0": 1e-3, "gamma_phi": 1e-3},
           "grid": {"t_max": 2000.0}}
    th = {"initial": {"kind": "thermal", "alpha": 5.0},
          "rates": {"kappa0": 1e-3, "gamma0": 1e-3, "gamma_phi": 1e-3},
          "grid": {"t_max": 2000.0}}
    exc = {"initial": {"kind": "fock", "fock_n": 0, "qubit": "excited"},
           "rates": {"kappa0": 1e-5, "gamma0": 1e-5, "gamma_phi": 1e-5},
           "grid": {"t_max": 2000.0}}
    mod = {"initial": {"kind": "fock", "fock_n": 0, "qubit": "ground"},
           "rates": {"kappa0": 1e-6, "gamma0": 1e-6, "gamma_phi": 1e-6},
           "grid": {"t_max": 1e5}, "postselect": True, "trunc": {"Q1": 20}}

    t3 = [(0.1, 2.9699), (0.3, 4.7736), (0.5, 6.4121)]
    presets = {}
    for i, (g, Om) in enumerate(t3):
        presets[1 + i] = _merge(coh, _triple(g, Om))
        presets[4 + i] = _merge(cat, _triple(g, Om))
        presets[7 + i] = _merge(sqc, _triple(g, Om))
        presets[14 + i] = _merge(_merge(exc, _triple(g, Om)),
                                 {"trunc": {"Q1": 12 if i < 2 else 14}})
    presets[10] = _merge(sqv, _triple(0.5, 1.5))
    presets[11] = _merge(sqv, _triple(0.8, 2.9))
    presets[12] = _merge(th, _triple(0.5, 1.5))
    presets[13] = _merge(th, _triple(0.8, 2.9))
    presets[17] = _merge(mod, {
        "model": {"g": 0.05, "Omega0": 0.5,
                  "modulation": {"epsilon": 0.08, "eta0": 2.00715, "alpha": -5e-8}}})
    presets[18] = _merge(mod, {
        "model": {"g": 0.15, "Omega0": 2.9,
                  "modulation": {"epsilon": 0.08, "eta0": 3.931, "alpha": 8e-7}}})
    return presets


PRESETS = _preset_table()


# -- config parsing ----------------------------------------------------------

def _as_float(value, path):
    if isinstance(value, bool) or value is None:
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise ValidationError(f"{path}: expected a number, got {value!r}") from None
    raise ValidationError(f"{path}: expected a number, got {value!r}")


def _as_int(value, path):
    f = _as_float(value, path)
    if f != int(f):
        raise ValidationError(f"{path}: expected an integer, got {value!r}")
    return int(f)


def _as_bool(value, path):
    if isinstance(value, bool):
        return value
    raise ValidationError(f"{path}: expected true/false, got {value!r}")


class _Section:
    """One mapping level of the config tree; unknown keys are hard errors."""

    def __init__(self, data, path):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: expected a mapping, got {type(data).__name__}")
        self.data = dict(data)
        self.path = path

    def take(self, key, default=None):
        return self.data.pop(key, default)

    def take_float(self, key, default=None):
        v = self.data.pop(key, None)
        return default if v is None else _as_float(v, f"{self.path}.{key}")

    def take_int(self, key, default=None):
        v = self.data.pop(key, None)
        return default if v is None else _as_int(v, f"{self.path}.{key}")

    def take_bool(self, key, default=None):
        v = self.data.pop(key, None)
        return default if v is None else _as_bool(v, f"{self.path}.{key}")

    def section(self, key):
        return _Section(self.data.pop(key, None), f"{self.path}.{key}")

    def finish(self):
        if self.data:
            keys = ", ".join(f"{self.path}.{k}" for k in sorted(self.data))
            raise ValidationError(f"unknown config keys: {keys}")


@dataclass
class ScenarioConfig:
    """Fully validated scenario description."""

    model: ModelParams
    rates: RateParams
    reservoir_kind: str
    initial: FieldStateSpec
    qubit_excited: bool
    solver: str = "all"
    q1: int | None = None            # None = auto under the tail policy
    tail_tol: float = DEFAULT_TAIL_TOL
    t_max: float = 1000.0
    n_samples: int = 1201
    snapshots: tuple = ()
    postselect: bool = False
    output: str | None = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    prune_epsilon: float = 1e-12     # relative to max |W| entry
    Omega_c: float | None = None
    omega_c: float | None = None
    figure: int | None = None

    def grid_times(self) -> np.ndarray:
        base = np.linspace(0.0, self.t_max, self.n_samples)
        if self.snapshots:
            base = np.union1d(base, np.asarray(self.snapshots, dtype=float))
        return base

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def to_dict(self) -> dict:
        mod = self.model.modulation
        d = {
            "model": {
                "omega": self.model.omega,
                "Omega0": self.model.Omega0,
                "g": self.model.g,
                "modulation": None if mod is None else {
                    "epsilon": mod.epsilon, "eta0": mod.eta0, "alpha": mod.alpha},
            },
            "rates": {"kappa0": self.rates.kappa0, "gamma0": self.rates.gamma0,
                      "gamma_phi": self.rates.gamma_phi},
            "reservoir": {"kind": self.reservoir_kind,
                          "Omega_c": self.Omega_c, "omega_c": self.omega_c},
            "initial": {"kind": self.initial.kind, "alpha": self.initial.alpha,
                        "s": self.initial.s, "beta": self.initial.beta,
                        "fock_n": self.initial.fock_n,
                        "qubit": "excited" if self.qubit_excited else "ground"},
            "trunc": {"Q1": "auto" if self.q1 is None else self.q1,
                      "tail_tol": self.tail_tol},
            "grid": {"t_max": self.t_max, "n_samples": self.n_samples},
            "snapshots": list(self.snapshots),
            "postselect": self.postselect,
            "solver": self.solver,
            "integrator": {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol},
            "prune": {"epsilon": self.prune_epsilon},
        }
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a (possibly preset-expanded) config tree."""
    root = _Section(doc, "config")

    figure = root.take_int("figure")
    if figure is not None:
        if figure not in PRESETS:
            raise ValidationError(f"figure: no preset for figure {figure}")
        merged = _merge(PRESETS[figure], root.data)
        merged["figure"] = None
        cfg = config_from_dict(merged)
        cfg.figure = figure
        return cfg

    model_s = root.section("model")
    modulation = None
    mod_raw = model_s.take("modulation")
    if mod_raw is not None:
        mod_s = _Section(mod_raw, "config.model.modulation")
        modulation = ModulationParams(
            epsilon=mod_s.take_float("epsilon", 0.0),
            eta0=mod_s.take_float("eta0", 0.0),
            alpha=mod_s.take_float("alpha", 0.0),
        )
        mod_s.finish()
    try:
        model = ModelParams(
            omega=model_s.take_float("omega", 1.0),
            Omega0=model_s.take_float("Omega0"),
            g=model_s.take_float("g"),
            modulation=modulation,
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"config.model: {exc}") from exc
    model_s.finish()

    rates_s = root.section("rates")
    try:
        rates = RateParams(
            kappa0=rates_s.take_float("kappa0", 0.0),
            gamma0=rates_s.take_float("gamma0", 0.0),
            gamma_phi=rates_s.take_float("gamma_phi", 0.0),
        )
    except ValueError as exc:
        raise ValidationError(f"config.rates: {exc}") from exc
    rates_s.finish()

    res_s = root.section("reservoir")
    reservoir_kind = res_s.take("kind", "white")
    if reservoir_kind not in ("white", "ohmic"):
        raise ValidationError(f"config.reservoir.kind: unknown kind {reservoir_kind!r}")
    Omega_c = res_s.take_float("Omega_c")
    omega_c = res_s.take_float("omega_c")
    res_s.finish()

    init_s = root.section("initial")
    kind = init_s.take("kind")
    if kind is None:
        raise ValidationError("config.initial.kind is required")
    qubit = init_s.take("qubit", "ground")
    if qubit not in ("ground", "excited"):
        raise ValidationError(f"config.initial.qubit: expected ground/excited, got {qubit!r}")
    try:
        initial = FieldStateSpec(
            kind=kind,
            alpha=init_s.take_float("alpha", 0.0),
            s=init_s.take_float("s", 0.0),
            beta=init_s.take_float("beta", 0.0),
            fock_n=init_s.take_int("fock_n", 0),
        )
    except ValueError as exc:
        raise ValidationError(f"config.initial: {exc}") from exc
    init_s.finish()

    trunc_s = root.section("trunc")
    q1_raw = trunc_s.take("Q1", "auto")
    if isinstance(q1_raw, str):
        if q1_raw != "auto":
            raise ValidationError(f"config.trunc.Q1: expected integer or 'auto', got {q1_raw!r}")
        q1 = None
    else:
        q1 = _as_int(q1_raw, "config.trunc.Q1")
        if q1 < 0:
            raise ValidationError("config.trunc.Q1 must be >= 0")
    tail_tol = trunc_s.take_float("tail_tol", DEFAULT_TAIL_TOL)
    trunc_s.finish()

    grid_s = root.section("grid")
    t_max = grid_s.take_float("t_max")
    if t_max is None or t_max <= 0:
        raise ValidationError("config.grid.t_max must be a positive number")
    n_samples = grid_s.take_int("n_samples", 1201)
    if n_samples < 2:
        raise ValidationError("config.grid.n_samples must be >= 2")
    grid_s.finish()

    snaps_raw = root.take("snapshots")
    if snaps_raw is None:
        snapshots = tuple(t for t in DEFAULT_SNAPSHOT_CANDIDATES if t <= t_max)
    else:
        if not isinstance(snaps_raw, (list, tuple)):
            raise ValidationError("config.snapshots: expected a list of times")
        snapshots = tuple(sorted(_as_float(v, "config.snapshots") for v in snaps_raw))
        for t in snapshots:
            if t < 0 or t > t_max:
                raise ValidationError(f"config.snapshots: time {t} outside [0, t_max]")

    solver = root.take("solver", "all")
    if solver not in SOLVER_CHOICES:
        raise ValidationError(f"config.solver: expected one of {SOLVER_CHOICES}, got {solver!r}")
    if model.modulation is not None and solver == "dme_dressed":
        raise ValidationError(
            "config.solver: modulated scenarios require the bare-basis dressed "
            "solver (dme_bare); the dressed-basis form cannot follow Ω(t)"
        )

    postselect = root.take_bool("postselect", False)
    output = root.take("output")

    integ_s = root.section("integrator")
    rel_tol = integ_s.take_float("rel_tol", 1e-9)
    abs_tol = integ_s.take_float("abs_tol", 1e-11)
    integ_s.finish()

    prune_s = root.section("prune")
    prune_epsilon = prune_s.take_float("epsilon", 1e-12)
    prune_s.finish()

    root.finish()
    return ScenarioConfig(
        model=model, rates=rates, reservoir_kind=reservoir_kind,
        initial=initial, qubit_excited=(qubit == "excited"), solver=solver,
        q1=q1, tail_tol=tail_tol, t_max=t_max, n_samples=n_samples,
        snapshots=snapshots, postselect=postselect, output=output,
        rel_tol=rel_tol, abs_tol=abs_tol, prune_epsilon=prune_epsilon,
        Omega_c=Omega_c, omega_c=omega_c,
    )


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ParseError(f"invalid YAML{loc}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError("config document must be a key/value mapping")
    return config_from_dict(doc)


def preset_config(figure: int, overrides: dict | None = None) -> ScenarioConfig:
    doc = {"figure": figure}
    if overrides:
        doc.update(overrides)
    return config_from_dict(doc)


# -- running -----------------------------------------------------------------

@dataclass
class Trajectory:
    """Observable time series of one solver run, figure-ready."""

    solver: str
    times: np.ndarray
    records: list
    distributions: dict
    provenance: dict
    coefficient_trajectory: object = field(repr=False, default=None)

    @property
    def n_mean(self) -> np.ndarray:
        return np.array([r.n_mean for r in self.records])

    @property
    def P_e(self) -> np.ndarray:
        return np.array([r.P_e for r in self.records])


def _resolve_truncation(cfg: ScenarioConfig) -> TruncationScheme:
    if cfg.q1 is not None:
        return TruncationScheme(cfg.q1)
    return auto_truncation(cfg.initial, cfg.tail_tol)


def run_scenario(cfg: ScenarioConfig, out_dir: str | None = None) -> dict[str, Trajectory]:
    """Run the configured solver(s) and (optionally) write output files.

    With ``solver: all``, three tagged series are produced: ``gksl``,
    ``dme_white`` and ``dme_ohmic``.  DME runs use the dressed-basis
    solver for static Hamiltonians and the bare-basis W-tensor solver
    when modulation is active.
    """
    t_wall = time.perf_counter()
    trunc = _resolve_truncation(cfg)
    field_state = generate_field_state(cfg.initial, trunc, cfg.tail_tol, strict=True)
    rho0 = BareCoefficients.from_field_state(field_state, cfg.qubit_excited)
    grid = cfg.grid_times()
    icfg = cfg.integrator_config()

    if cfg.solver == "all":
        runs = [("gksl", None), ("dme_white", "white"), ("dme_ohmic", "ohmic")]
    elif cfg.solver == "gksl":
        runs = [("gksl", None)]
    else:
        runs = [(cfg.solver, cfg.reservoir_kind)]

    need_dme = any(kind is not None for _, kind in runs)
    basis = None
    if need_dme:
        ops = build_operators(trunc)
        h0 = build_hamiltonian(cfg.model, ops, t=0.0)
        basis = build_dressed_basis(h0, trunc)
        r0 = project_to_dressed(field_state, cfg.qubit_excited, basis)

    use_bare_dme = cfg.model.modulation is not None or cfg.solver == "dme_bare"

    results: dict[str, Trajectory] = {}
    for label, kind in runs:
        if kind is None:
            coeff_traj = evolve_gksl(rho0, cfg.model, cfg.rates, grid, icfg)
        else:
            sd = SpectralDensity.from_rates(kind, cfg.rates, cfg.model,
                                            Omega_c=cfg.Omega_c, omega_c=cfg.omega_c)
            rates_tbl = compute_rates(basis, sd)
            if use_bare_dme:
                w = compute_w_tensors(basis, rates_tbl, epsilon_rel=cfg.prune_epsilon)
                coeff_traj = evolve_dme_bare(rho0, cfg.model, w, grid, icfg)
            else:
                dtraj = evolve_dme_dressed(r0, basis, rates_tbl, grid)
                coeff_traj = dtraj.to_bare()
        results[label] = _collect(cfg, label, trunc, field_state, coeff_traj)

    wall = time.perf_counter() - t_wall
    target = out_dir or cfg.output
    if target is not None:
        write_outputs(results, cfg, target, wall_time=wall)
    return results


def _collect(cfg, label, trunc, field_state, coeff_traj) -> Trajectory:
    times = coeff_traj.times
    snapshot_set = set(float(t) for t in cfg.snapshots)
    records = []
    distributions = {}
    boundary_max = 0.0
    for i in range(len(coeff_traj)):
        coeffs = coeff_traj.coefficients(i)
        t = float(times[i])
        is_snapshot = t in snapshot_set
        rec = observe(coeffs, t, postselect=cfg.postselect, with_metrology=is_snapshot)
        records.append(rec)
        probs = photon_distribution(coeffs)
        boundary_max = max(boundary_max, float(probs[-1]))
        if is_snapshot:
            if cfg.postselect:
                rho_ps, _ = postselect_ground(coeffs)
                distributions[t] = field_distribution(rho_ps)
            else:
                distributions[t] = probs
    non_converged = bool(boundary_max >= cfg.tail_tol)
    if non_converged:
        warnings.warn(
            f"{label}: boundary Fock population reached {boundary_max:.2e} "
            f"(tail policy {cfg.tail_tol:g}); increase Q1",
            TruncationNotConverged,
            stacklevel=2,
        )
    provenance = {
        "solver": label,
        "q1": trunc.q1,
        "tail_mass": field_state.tail_mass,
        "boundary_max": boundary_max,
        "non_converged": non_converged,
        "n_grid": int(times.size),
    }
    return Trajectory(solver=label, times=times, records=records,
                      distributions=distributions, provenance=provenance,
                      coefficient_trajectory=coeff_traj)


# -- output files ------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".12g")


def _time_label(t: float) -> str:
    return format(float(t), "g")


def write_outputs(results: dict[str, Trajectory], cfg: ScenarioConfig,
                  out_dir: str, wall_time: float | None = None) -> list[str]:
    """Write scalar/distribution CSVs and provenance; deterministic bytes.

    On any failure the partially written files are removed before the
    error propagates.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    try:
        for label, traj in results.items():
            path = os.path.join(out_dir, f"scalars_{label}.csv")
            _write_scalars(path, traj, cfg.postselect)
            written.append(path)
            for t, probs in sorted(traj.distributions.items()):
                dpath = os.path.join(out_dir, f"dist_{label}_t{_time_label(t)}.csv")
                with open(dpath, "w", encoding="utf-8", newline="") as fh:
                    fh.write("n,P_n\n")
                    for n, p in enumerate(probs):
                        fh.write(f"{n},{_fmt(p)}\n")
                written.append(dpath)

        prov = {
            "config_hash": cfg.config_hash(),
            "version": __version__,
            "config": cfg.to_dict(),
            "runs": {label: traj.provenance for label, traj in results.items()},
        }
        ppath = os.path.join(out_dir, "provenance.json")
        with open(ppath, "w", encoding="utf-8") as fh:
            json.dump(prov, fh, sort_keys=True, indent=2)
            fh.write("\n")
        written.append(ppath)

        # Wall time lives in its own file so the core outputs stay
        # byte-identical across reruns of the same config.
        if wall_time is not None:
            tpath = os.path.join(out_dir, "timing.json")
            with open(tpath, "w", encoding="utf-8") as fh:
                json.dump({"wall_time_s": wall_time}, fh)
                fh.write("\n")
    except BaseException:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    return written


def _write_scalars(path: str, traj: Trajectory, postselect: bool) -> None:
    cols = SCALAR_COLUMNS + (PS_COLUMNS if postselect else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for rec in traj.records:
            row = [_fmt(rec.t), _fmt(rec.P_e), _fmt(rec.n_mean), _fmt(rec.mandel_Q),
                   _fmt(rec.negativity), _fmt(rec.purity_qubit), _fmt(rec.purity_field)]
            if postselect:
                row += [_fmt(rec.P_g), _fmt(rec.n_mean_ps), _fmt(rec.mandel_Q_ps),
                        _fmt(rec.F_ph), _fmt(rec.M_av), _fmt(rec.M_opt)]
            fh.write(",".join(row) + "\n")
