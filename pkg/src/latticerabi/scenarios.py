"""Named numerical experiments, cross-model comparison, file emission.

A dynamics scenario runs the same physical configuration through any
subset of the three propagators, records one shared observable series
per model, writes CSV + JSON sidecar files, and compares every model
pair.  Band scans are a second scenario kind.

Built-in scenarios
------------------
fig1        band structure at v = 2 with the free-particle reference
fig2_ddsc   g/w0 = 5.18, wq/w0 = 28.7, start |q=0>|n_b=1>, one trap period
fig2_dsc    g/w0 = 5.18, wq = 0, same start and window
fig3_ddsc   g/w0 = 7.7, g/wq = 0.43, start |p=-2> (n_b=0), momentum snapshots
fig3_dsc    g/w0 = 10, w0 = wq, same start, momentum snapshots
fig4        g/w0 = 5.18, wq = 0, six trap periods (collapse and revival)

The group names "fig2" and "fig3" run both members.  Time windows are a
documented choice: one trap period for the crossover and momentum-
distribution scenarios (fig4 carries the long-time physics), six for
fig4.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bands import BandTable, dispersion_scan
from .errors import ConfigurationError, UsageError
from .fock import FockPropagator, FockState, recommended_cutoff
from .grid_dynamics import (
    GridSpec,
    QubitAmplitudes,
    evolve,
    prepare_initial_state,
    record_times,
)
from .params import SystemParams, from_ratios, q_excursion_estimate, to_rabi_params
from .periodic import evolve_periodic, prepare_two_band
from .series import COLUMNS, ObservableSeries

__all__ = [
    "DEFAULT_BREAKDOWN_THRESHOLD",
    "Scenario",
    "BandScan",
    "ComparisonReport",
    "compare",
    "builtin_scenarios",
    "builtin_names",
    "run_scenario",
    "ScenarioResult",
]

DEFAULT_BREAKDOWN_THRESHOLD = 0.05  # fraction of the BZ half-width (2 hbar k0)
COMPARED_OBSERVABLES = ("x", "p", "q", "sigma_x", "sigma_z", "p_in")
SNAPSHOT_P_WINDOW = 12.0

MODEL_NAMES = ("full", "periodic", "rabi")


@dataclass(frozen=True)
class Scenario:
    """One dynamics experiment: identical physics fed to several models."""

    name: str
    models: tuple[str, ...]
    params: SystemParams
    qubit: QubitAmplitudes
    t_max: float
    n_records: int = 800
    n_points: int | None = None
    x_half_width: float | None = None
    dt: float | None = None
    cutoff: int = 600
    snapshot_count: int = 0
    threshold: float = DEFAULT_BREAKDOWN_THRESHOLD
    description: str = ""

    def __post_init__(self):
        bad = [m for m in self.models if m not in MODEL_NAMES]
        if bad:
            raise ConfigurationError(f"unknown models {bad}; choose from {MODEL_NAMES}")
        if not self.models:
            raise ConfigurationError("scenario needs at least one model")
        if self.t_max <= 0:
            raise ConfigurationError(f"t_max must be positive, got {self.t_max}")
        if self.n_records < 1:
            raise ConfigurationError(f"n_records must be >= 1, got {self.n_records}")


@dataclass(frozen=True)
class BandScan:
    """Band-structure scenario (no time evolution)."""

    name: str
    v: float
    n_bands: int = 2
    q_resolution: int = 257
    description: str = ""


@dataclass
class ComparisonReport:
    """Deviation metrics between two observable series on one time grid."""

    pair: tuple[str, str]
    threshold: float
    max_dev: dict[str, float]
    rms_dev: dict[str, float]
    breakdown_time: float | None
    leakage_trace: np.ndarray = field(repr=False)
    q_tail_trace: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "threshold": self.threshold,
            "max_dev": self.max_dev,
            "rms_dev": self.rms_dev,
            "breakdown_time": self.breakdown_time,
            "max_leakage": float(self.leakage_trace.max()) if len(self.leakage_trace) else 0.0,
            "max_q_tail": float(self.q_tail_trace.max()) if len(self.q_tail_trace) else 0.0,
            "leakage_trace": [float(v) for v in self.leakage_trace],
            "q_tail_trace": [float(v) for v in self.q_tail_trace],
            "times": [float(t) for t in self.times],
        }


def compare(
    series_a: ObservableSeries,
    series_b: ObservableSeries,
    threshold: float = DEFAULT_BREAKDOWN_THRESHOLD,
    pair: tuple[str, str] = ("a", "b"),
) -> ComparisonReport:
    """Deviation metrics; breakdown = first |dq| above threshold * BZ half-width.

    Both series must share one record-time grid; resampling is not
    performed.
    """
    if not series_a.same_time_grid(series_b):
        raise UsageError("series do not share a common time grid; rerun with shared records")
    max_dev: dict[str, float] = {}
    rms_dev: dict[str, float] = {}
    for name in COMPARED_OBSERVABLES:
        d = np.abs(series_a[name] - series_b[name])
        max_dev[name] = float(d.max()) if len(d) else 0.0
        rms_dev[name] = float(np.sqrt(np.mean(d**2))) if len(d) else 0.0
    dq = np.abs(series_a["q"] - series_b["q"])
    limit = threshold * 2.0
    above = np.nonzero(dq > limit)[0]
    breakdown = float(series_a.t[above[0]]) if above.size else None
    return ComparisonReport(
        pair=pair,
        threshold=threshold,
        max_dev=max_dev,
        rms_dev=rms_dev,
        breakdown_time=breakdown,
        leakage_trace=series_a["leakage"].copy(),
        q_tail_trace=series_a["q_tail"].copy(),
        times=series_a.t.copy(),
    )


def builtin_scenarios() -> dict[str, object]:
    """Registry of built-in experiments keyed by name."""
    fig2_params = from_ratios(5.18, 28.7)
    dsc_params = from_ratios(5.18, 0.0)
    t2 = fig2_params.trap_period
    reg: dict[str, object] = {}
    reg["fig1"] = BandScan(
        name="fig1", v=2.0,
        description="two lowest bands at lattice depth v=2 vs free particle")
    reg["fig2_ddsc"] = Scenario(
        name="fig2_ddsc", models=("full", "periodic", "rabi"),
        params=fig2_params, qubit=QubitAmplitudes.band(1), t_max=t2,
        description="crossover, dispersive deep strong coupling (wq/w0=28.7)")
    reg["fig2_dsc"] = Scenario(
        name="fig2_dsc", models=("full", "periodic", "rabi"),
        params=dsc_params, qubit=QubitAmplitudes.band(1), t_max=dsc_params.trap_period,
        description="crossover, deep strong coupling (wq=0)")
    fig3_ddsc = from_ratios(7.7, 7.7 / 0.43)
    fig3_dsc = from_ratios(10.0, 1.0)
    reg["fig3_ddsc"] = Scenario(
        name="fig3_ddsc", models=("full", "periodic"),
        params=fig3_ddsc, qubit=QubitAmplitudes.band(0), t_max=fig3_ddsc.trap_period,
        snapshot_count=8,
        description="momentum distribution, dispersive regime (g/wq=0.43)")
    reg["fig3_dsc"] = Scenario(
        name="fig3_dsc", models=("full", "periodic"),
        params=fig3_dsc, qubit=QubitAmplitudes.band(0), t_max=fig3_dsc.trap_period,
        snapshot_count=8,
        description="momentum distribution, deep strong coupling (w0=wq)")
    reg["fig4"] = Scenario(
        name="fig4", models=("full", "periodic", "rabi"),
        params=dsc_params, qubit=QubitAmplitudes.band(1),
        t_max=6.0 * dsc_params.trap_period, n_records=1536,
        description="collapse and revival of the initial-state population")
    return reg


GROUPS = {"fig2": ("fig2_ddsc", "fig2_dsc"), "fig3": ("fig3_ddsc", "fig3_dsc")}


def builtin_names() -> list[str]:
    return sorted(builtin_scenarios().keys() | GROUPS.keys())


@dataclass
class ScenarioResult:
    name: str
    files: list[str]
    series: dict[str, ObservableSeries]
    reports: dict[tuple[str, str], ComparisonReport]
    band_table: BandTable | None = None


def _scenario_sidecar(s: Scenario, grid: GridSpec | None, extra: dict) -> dict:
    rp = to_rabi_params(s.params)
    doc = {
        "scenario": s.name,
        "description": s.description,
        "software_version": __version__,
        "units": "E_r = hbar^2 k0^2/(2m); lengths 1/k0; momenta hbar k0; times hbar/E_r",
        "params": {
            "v": s.params.v,
            "w0": s.params.w0,
            "wq": rp.wq,
            "g": rp.g,
            "g_over_w0": rp.g_over_w0,
            "wq_over_w0": rp.wq_over_w0,
        },
        "qubit": {"c0": [s.qubit.c0.real, s.qubit.c0.imag],
                  "c1": [s.qubit.c1.real, s.qubit.c1.imag]},
        "t_max": s.t_max,
        "n_records": s.n_records,
        "cutoff": s.cutoff,
        "q_excursion_estimate": q_excursion_estimate(s.params),
        "breakdown_threshold": s.threshold,
    }
    if grid is not None:
        doc["grid"] = {
            "n_points": grid.n_points,
            "x_half_width": grid.x_half_width,
            "dt": grid.dt,
            "n_steps": grid.n_steps,
            "record_stride": grid.record_stride,
            "p_max": grid.p_max,
            "fold_shift_bins": grid.fold_shift_bins,
        }
    doc.update(extra)
    return doc


def _convergence_probe(s: Scenario, grid: GridSpec) -> dict:
    """Short-window dt-halving and grid-doubling deltas for the full model.

    The probe window is min(t_max/8, quarter trap period): long enough to
    exercise every Hamiltonian term, cheap enough to run by default.
    """
    probe_t = min(s.t_max / 8.0, s.params.trap_period / 4.0)
    n_rec = 16

    def run(n_points: int, dt: float) -> ObservableSeries:
        g = GridSpec.build(s.params, probe_t, n_records=n_rec, n_points=n_points,
                           x_half_width=grid.x_half_width, dt=dt)
        psi = prepare_initial_state(s.params, g, s.qubit)
        return evolve(psi, s.params, g)

    base = run(grid.n_points, grid.dt)
    half = run(grid.n_points, grid.dt / 2.0)
    doubled = run(grid.n_points * 2, grid.dt)
    out = {"probe_t": probe_t, "dt_halving": {}, "grid_doubling": {}}
    for c in COLUMNS[1:]:
        out["dt_halving"][c] = float(np.abs(base[c] - half[c]).max())
        out["grid_doubling"][c] = float(np.abs(base[c] - doubled[c]).max())
    return out


def _snapshot_rows(snapshots, p_window: float = SNAPSHOT_P_WINDOW):
    """Transpose momentum snapshots into CSV rows restricted to |p| <= window."""
    if not snapshots:
        return [], []
    _, p, _ = snapshots[0]
    mask = np.abs(p) <= p_window
    cols = [p[mask]] + [dist[mask] for _, _, dist in snapshots]
    return [row for row in zip(*cols)], mask


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_band_scan(scan: BandScan, out_dir: str) -> ScenarioResult:
    table = dispersion_scan(scan.v, scan.n_bands, scan.q_resolution)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{scan.name}_bands.csv")
    header = ["q"] + [f"band_{b}" for b in range(table.n_bands)] \
        + [f"free_{b}" for b in range(table.n_bands)]
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i, q in enumerate(table.q_grid):
            vals = [q] + [table.energies[b, i] for b in range(table.n_bands)] \
                + [table.free_energies[b, i] for b in range(table.n_bands)]
            fh.write(",".join(format(float(v), ".17g") for v in vals) + "\n")
    side = {
        "scenario": scan.name,
        "description": scan.description,
        "software_version": __version__,
        "v": scan.v,
        "n_bands": scan.n_bands,
        "q_resolution": scan.q_resolution,
        "n_max": table.n_max,
        "gap_at_q0": float(table.gap()[np.argmin(np.abs(table.q_grid))]),
    }
    json_path = os.path.join(out_dir, f"{scan.name}_bands.json")
    _write_json(json_path, side)
    return ScenarioResult(name=scan.name, files=[csv_path, json_path],
                          series={}, reports={}, band_table=table)


def run_scenario(
    scenario,
    out_dir: str = ".",
    convergence_probe: bool = True,
) -> ScenarioResult:
    """Run one scenario (or a BandScan); write CSV/JSON; compare model pairs."""
    if isinstance(scenario, BandScan):
        return run_band_scan(scenario, out_dir)
    s: Scenario = scenario
    os.makedirs(out_dir, exist_ok=True)
    files: list[str] = []
    series: dict[str, ObservableSeries] = {}
    needs_grid = "full" in s.models or "periodic" in s.models
    grid = None
    if needs_grid:
        grid = GridSpec.build(s.params, s.t_max, s.n_records,
                              n_points=s.n_points, x_half_width=s.x_half_width, dt=s.dt)
    times = record_times(s.t_max, s.n_records)

    snapshot_records: tuple[int, ...] = ()
    if s.snapshot_count > 0:
        snapshot_records = tuple(
            int(round(i * s.n_records / max(1, s.snapshot_count - 1)))
            for i in range(s.snapshot_count))

    snapshots = []
    if "full" in s.models:
        psi = prepare_initial_state(s.params, grid, s.qubit)
        if snapshot_records:
            series["full"], snapshots = evolve(psi, s.params, grid,
                                               snapshot_records=snapshot_records, times=times)
        else:
            series["full"] = evolve(psi, s.params, grid, times=times)
    if "periodic" in s.models:
        m_points = grid.fold_shift_bins if grid is not None else 512
        tb = prepare_two_band(s.params, s.qubit, m_points)
        dt = grid.dt if grid is not None else s.dt
        series["periodic"] = evolve_periodic(tb, s.params, s.t_max, s.n_records,
                                             dt=dt, times=times)
    if "rabi" in s.models:
        rp = to_rabi_params(s.params)
        initial = FockState.vacuum(s.qubit, s.cutoff)
        prop = FockPropagator(rp, s.cutoff)
        fock_series, _ = prop.series(initial, times)
        if s.cutoff < recommended_cutoff(rp):
            fock_series.warnings.append(
                f"cutoff {s.cutoff} below recommended {recommended_cutoff(rp)}")
        series["rabi"] = fock_series

    extra: dict = {"models": list(s.models)}
    if convergence_probe and "full" in s.models:
        extra["convergence"] = _convergence_probe(s, grid)

    for model, ser in series.items():
        csv_path = os.path.join(out_dir, f"{s.name}_{model}.csv")
        ser.to_csv(csv_path)
        files.append(csv_path)
        side = _scenario_sidecar(s, grid if model in ("full", "periodic") else None,
                                 dict(extra, model=model, warnings=ser.warnings))
        json_path = os.path.join(out_dir, f"{s.name}_{model}.json")
        _write_json(json_path, side)
        files.append(json_path)

    if snapshots:
        rows, _ = _snapshot_rows(snapshots)
        snap_path = os.path.join(out_dir, f"{s.name}_full_momentum.csv")
        header = ["p"] + [f"P_t{times[k]:.6g}" for k, _, _ in snapshots]
        with open(snap_path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        files.append(snap_path)

    reports: dict[tuple[str, str], ComparisonReport] = {}
    order = [m for m in MODEL_NAMES if m in series]
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            rep = compare(series[a], series[b], threshold=s.threshold, pair=(a, b))
            reports[(a, b)] = rep
            rep_path = os.path.join(out_dir, f"{s.name}_compare_{a}_{b}.json")
            _write_json(rep_path, rep.to_json_dict())
            files.append(rep_path)

    return ScenarioResult(name=s.name, files=files, series=series, reports=reports)


def resolve_names(name: str) -> list[str]:
    """Expand a scenario or group name into concrete scenario names."""
    reg = builtin_scenarios()
    if name in GROUPS:
        return list(GROUPS[name])
    if name in reg:
        return [name]
    raise ConfigurationError(f"unknown scenario {name!r}; known: {', '.join(builtin_names())}")


def scenario_from_config(doc: dict) -> object:
    """Build a Scenario (or BandScan) from a JSON config document."""
    if not isinstance(doc, dict):
        raise ConfigurationError("config root must be a JSON object")
    kind = doc.get("kind", "dynamics")
    name = doc.get("name", "custom")
    if kind == "bands":
        return BandScan(name=name, v=float(doc.get("v", 2.0)),
                        n_bands=int(doc.get("n_bands", 2)),
                        q_resolution=int(doc.get("q_resolution", 257)),
                        description=doc.get("description", ""))
    if kind != "dynamics":
        raise ConfigurationError(f"unknown scenario kind {kind!r}")
    params_doc = doc.get("params")
    if not isinstance(params_doc, dict):
        raise ConfigurationError("config requires a 'params' object")
    if "g_over_w0" in params_doc:
        params = from_ratios(float(params_doc["g_over_w0"]),
                             float(params_doc.get("wq_over_w0", 0.0)))
    elif "v" in params_doc and "w0" in params_doc:
        params = SystemParams(v=float(params_doc["v"]), w0=float(params_doc["w0"]))
    else:
        raise ConfigurationError(
            "params must contain either (g_over_w0, wq_over_w0) or (v, w0)")
    qubit_doc = doc.get("qubit", "nb1")
    if isinstance(qubit_doc, str):
        presets = {"nb0": QubitAmplitudes.band(0), "nb1": QubitAmplitudes.band(1),
                   "plus": QubitAmplitudes.plus()}
        if qubit_doc not in presets:
            raise ConfigurationError(
                f"unknown qubit preset {qubit_doc!r}; choose from {sorted(presets)}")
        qubit = presets[qubit_doc]
    else:
        c0 = qubit_doc.get("c0", [0.0, 0.0])
        c1 = qubit_doc.get("c1", [0.0, 0.0])
        qubit = QubitAmplitudes(complex(c0[0], c0[1]), complex(c1[0], c1[1]))
    t_doc = doc.get("t_max")
    if isinstance(t_doc, dict) and "trap_periods" in t_doc:
        t_max = float(t_doc["trap_periods"]) * params.trap_period
    elif t_doc is not None:
        t_max = float(t_doc)
    else:
        raise ConfigurationError("config requires t_max (number or {'trap_periods': n})")
    return Scenario(
        name=name,
        models=tuple(doc.get("models", list(MODEL_NAMES))),
        params=params,
        qubit=qubit,
        t_max=t_max,
        n_records=int(doc.get("n_records", 800)),
        n_points=doc.get("n_points"),
        x_half_width=doc.get("x_half_width"),
        dt=doc.get("dt"),
        cutoff=int(doc.get("cutoff", 600)),
        snapshot_count=int(doc.get("snapshots", 0)),
        threshold=float(doc.get("threshold", DEFAULT_BREAKDOWN_THRESHOLD)),
        description=doc.get("description", ""),
    )
