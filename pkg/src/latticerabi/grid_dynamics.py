"""Split-operator propagation of the full single-atom Hamiltonian.

The dimensionless Hamiltonian on the position grid is

    H = p^2 + (v/2) cos(4x) + (w0^2/4) x^2

(see params module for the unit system).  Time stepping is second-order
Strang splitting: half-step of the local potential phase, full kinetic
step in Fourier space, half-step of the potential.  Every substep is
exactly unitary.

Grid conventions
----------------
The box [-L, L) is periodic and L is snapped to a multiple of pi/2.  This
makes the momentum spacing dp = pi/L an exact divisor of 4 hbar*k0, so

  * the lattice potential cos(4x) is exactly periodic over the box,
  * the carrier momenta +-2 lie exactly on the momentum grid,
  * shifting by one reciprocal-lattice vector (4 hbar*k0) is an exact
    roll by ``fold_shift_bins`` FFT bins, which the band-coherence
    observable sigma_z and the two-band conversion rely on.

Observables in the band picture use the diabatic fold

    p = q + (2 n_b - 1) * 2,   q in [-2, 2)

with exact-boundary momenta assigned by the half-open convention
(p = 0 folds to q = -2, n_b = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalFault, UsageError
from .params import SystemParams, q_excursion_estimate
from .series import COLUMNS, VALIDITY_Q_EDGE, ObservableSeries

__all__ = [
    "QubitAmplitudes",
    "GridSpec",
    "GridWavefunction",
    "fold_to_bz",
    "default_dt",
    "prepare_initial_state",
    "step",
    "evolve",
    "observables",
    "momentum_distribution",
    "fidelity",
    "record_times",
]

# Phase-per-step budget of the default dt rule (2*pi/200 per fastest scale).
DT_RULE_STEPS_PER_CYCLE = 200

# Momentum reach used by the dt rule: carriers at +-2 displaced by up to
# +-2 more, plus a few widths of the vacuum distribution.
DT_RULE_P_REACH = 4.6

EDGE_TAIL_LIMIT = 1e-12


@dataclass(frozen=True)
class QubitAmplitudes:
    """Weights of the two carrier momenta: c0 on p=-2 (n_b=0), c1 on p=+2."""

    c0: complex
    c1: complex

    def __post_init__(self):
        n2 = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if not (math.isfinite(n2) and n2 > 0.0):
            raise DomainError("qubit amplitudes must have positive finite norm")
        object.__setattr__(self, "c0", complex(self.c0) / math.sqrt(n2))
        object.__setattr__(self, "c1", complex(self.c1) / math.sqrt(n2))

    @classmethod
    def band(cls, n_b: int) -> "QubitAmplitudes":
        if n_b not in (0, 1):
            raise DomainError(f"band index must be 0 or 1, got {n_b}")
        return cls(1.0, 0.0) if n_b == 0 else cls(0.0, 1.0)

    @classmethod
    def plus(cls) -> "QubitAmplitudes":
        """Equal superposition (|n_b=0> + |n_b=1>)/sqrt(2): <sigma_z> = 1."""
        s = 1.0 / math.sqrt(2.0)
        return cls(s, s)


def _snap_half_width(x_half_width: float) -> tuple[float, int]:
    """Round the half-width up to L = M*pi/4 with M even; returns (L, M)."""
    m = int(math.ceil(x_half_width * 4.0 / math.pi))
    m += m % 2
    m = max(m, 2)
    return m * math.pi / 4.0, m


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic position grid plus time stepping plan.

    x_half_width is snapped up to a multiple of pi/2 at construction (see
    module docstring); pass exact values from ``GridSpec.build`` to avoid
    surprises when comparing grids.
    """

    n_points: int
    x_half_width: float
    dt: float
    n_steps: int
    record_stride: int

    def __post_init__(self):
        if self.n_points < 1024 or self.n_points & (self.n_points - 1):
            raise ConfigurationError(
                f"n_points must be a power of two >= 1024, got {self.n_points}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive and finite, got {self.dt}")
        if self.n_steps < 1 or self.record_stride < 1 or self.n_steps % self.record_stride:
            raise ConfigurationError(
                f"n_steps ({self.n_steps}) must be a positive multiple of "
                f"record_stride ({self.record_stride})")
        snapped, m = _snap_half_width(self.x_half_width)
        object.__setattr__(self, "x_half_width", snapped)
        object.__setattr__(self, "_m_cell", m)
        if self.p_max < 8.0:
            raise ConfigurationError(
                f"momentum grid must span at least +-8 hbar*k0; got +-{self.p_max:.3f} "
                f"(increase n_points above {self.n_points} or shrink the box)")

    @property
    def dx(self) -> float:
        return 2.0 * self.x_half_width / self.n_points

    @property
    def p_max(self) -> float:
        return math.pi * self.n_points / (2.0 * self.x_half_width)

    @property
    def fold_shift_bins(self) -> int:
        """Number of FFT bins equal to one reciprocal-lattice vector (4 hbar*k0)."""
        return self._m_cell

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_stride

    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    def p(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def t_max(self) -> float:
        return self.n_steps * self.dt

    def validate_for(self, params: SystemParams) -> None:
        """Check scenario-dependent sizing rules; raise ConfigurationError."""
        required = required_half_width(params)
        if self.x_half_width < required - 1e-9:
            raise ConfigurationError(
                f"x_half_width {self.x_half_width:.2f} too small for this scenario; "
                f"need at least {required:.2f} (1/k0)")
        # Vacuum tail at the box edge must be negligible before wrap-around.
        tail = math.exp(-params.w0 * self.x_half_width**2 / 2.0)
        if tail > EDGE_TAIL_LIMIT:
            need = math.sqrt(-2.0 * math.log(EDGE_TAIL_LIMIT) / params.w0)
            raise ConfigurationError(
                f"vacuum tail at the box edge is {tail:.2e} > {EDGE_TAIL_LIMIT}; "
                f"need x_half_width >= {need:.2f}")

    @classmethod
    def build(
        cls,
        params: SystemParams,
        t_max: float,
        n_records: int = 400,
        n_points: int | None = None,
        x_half_width: float | None = None,
        dt: float | None = None,
        min_fold_bins: int = 512,
    ) -> "GridSpec":
        """Apply the sizing rules and return a validated spec.

        min_fold_bins keeps the folded momentum grid at least this fine so
        that two-band conversions have the resolution evolve_periodic
        requires.
        """
        if x_half_width is None:
            x_half_width = max(required_half_width(params), min_fold_bins * math.pi / 4.0)
        half, m = _snap_half_width(x_half_width)
        if n_points is None:
            n_points = 1024
            while n_points < 8 * m:
                n_points *= 2
        if dt is None:
            dt = default_dt(params)
        n_steps = max(n_records, int(math.ceil(t_max / dt)))
        n_steps += (-n_steps) % n_records
        dt = t_max / n_steps
        spec = cls(n_points=n_points, x_half_width=half, dt=dt,
                   n_steps=n_steps, record_stride=n_steps // n_records)
        spec.validate_for(params)
        return spec


def required_half_width(params: SystemParams) -> float:
    """Box sizing rule: max(8 vacuum widths, 4 classical amplitudes).

    The classical amplitude converts the a-priori momentum excursion into
    position via dx/dt = 2p: A_cl = 2 * p_excursion / w0.  The factor-4
    margin keeps even weakly populated diffraction orders (one lattice
    kick beyond the excursion) inside the box at their classical turning
    points.
    """
    vac = 8.0 / math.sqrt(params.w0)
    a_cl = 2.0 * q_excursion_estimate(params) / params.w0
    return max(vac, 4.0 * a_cl)


def default_dt(params: SystemParams) -> float:
    """dt rule: 1/200 of the fastest cycle among trap, lattice and kinetic.

    The kinetic scale uses the dynamical momentum reach rather than the
    grid Nyquist momentum; the kinetic substep is exact at every grid
    momentum, so splitting accuracy is governed by occupied momenta.  The
    dt-halving convergence evidence emitted with every scenario validates
    the choice.
    """
    fastest = max(params.w0, params.v, DT_RULE_P_REACH**2)
    return (2.0 * math.pi / DT_RULE_STEPS_PER_CYCLE) / fastest


@dataclass
class GridWavefunction:
    """Complex amplitudes psi(x) on a GridSpec, normalized to sum |psi|^2 dx = 1."""

    amplitudes: np.ndarray
    grid: GridSpec

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx)

    def copy(self) -> "GridWavefunction":
        return GridWavefunction(self.amplitudes.copy(), self.grid)


def record_times(t_max: float, n_records: int) -> np.ndarray:
    """Canonical record times shared across models: k * (t_max/n_records)."""
    return np.arange(n_records + 1) * (t_max / n_records)


def fold_to_bz(p):
    """Fold physical momentum into (q, n_b) with p = q + (2 n_b - 1)*2.

    q lands in the half-open zone [-2, 2); momenta exactly on a fold
    boundary follow that convention (p = 0 gives q = -2, n_b = 1).
    Accepts scalars or arrays.
    """
    p_arr = np.asarray(p, dtype=float)
    q = np.mod(p_arr, 4.0) - 2.0
    n_b = np.rint((p_arr - q + 2.0) / 4.0).astype(int)
    if np.isscalar(p) or p_arr.ndim == 0:
        return float(q), int(n_b)
    return q, n_b


def prepare_initial_state(
    params: SystemParams, grid: GridSpec, qubit: QubitAmplitudes
) -> GridWavefunction:
    """Trap vacuum carrying the qubit superposition of the +-2 hbar*k0 carriers.

    psi(x) ~ (c0 e^{-2ix} + c1 e^{+2ix}) exp(-w0 x^2 / 4), giving the trap
    ground-state width <x^2> = 1/w0 and momentum width <(p -+ 2)^2> = w0/4.
    """
    grid.validate_for(params)
    x = grid.x()
    envelope = np.exp(-params.w0 * x**2 / 4.0)
    psi = (qubit.c0 * np.exp(-2j * x) + qubit.c1 * np.exp(2j * x)) * envelope
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return GridWavefunction(psi.astype(complex), grid)


class Propagator:
    """Precomputed split-operator kernels for one (params, grid) pair."""

    def __init__(self, params: SystemParams, grid: GridSpec):
        self.params = params
        self.grid = grid
        x = grid.x()
        p = grid.p()
        self.x = x
        self.p = p
        self.potential = 0.5 * params.v * np.cos(4.0 * x) + 0.25 * params.w0**2 * x**2
        self._half_v = np.exp(-0.5j * self.potential * grid.dt)
        self._full_v = self._half_v * self._half_v
        self._kinetic = np.exp(-1j * p**2 * grid.dt)
        q, n_b = fold_to_bz(p)
        self.q_fold = q
        self.band = n_b
        self._band0 = n_b == 0
        self._band1 = n_b == 1
        self._in_bands = self._band0 | self._band1
        self._valid = self._in_bands & (np.abs(q) <= VALIDITY_Q_EDGE)
        self._shift = grid.fold_shift_bins

    def step_block(self, psi: np.ndarray, n_sub: int) -> np.ndarray:
        """Advance n_sub Strang steps with merged interior potential factors."""
        psi = self._half_v * psi
        for _ in range(n_sub - 1):
            psi = np.fft.ifft(self._kinetic * np.fft.fft(psi))
            psi = self._full_v * psi
        psi = np.fft.ifft(self._kinetic * np.fft.fft(psi))
        psi = self._half_v * psi
        return psi

    def observables_of(self, psi: np.ndarray, psi0: np.ndarray | None = None) -> dict:
        dx = self.grid.dx
        density = np.abs(psi) ** 2
        norm = float(np.sum(density) * dx)
        psi_k = np.fft.fft(psi)
        pk = np.abs(psi_k) ** 2
        pk_sum = pk.sum()
        pk /= pk_sum
        out = {
            "x": float(np.sum(self.x * density) * dx / norm),
            "p": float(np.sum(self.p * pk)),
            "q": float(np.sum(self.q_fold * pk)),
            "sigma_x": float(pk[self._band0].sum() - pk[self._band1].sum()),
            "norm": norm,
            "leakage": float(1.0 - pk[self._in_bands].sum()),
            "q_tail": float(1.0 - pk[self._valid].sum()),
        }
        amp = psi_k / math.sqrt(pk_sum)
        partner = np.roll(amp, -self._shift)
        out["sigma_z"] = float(2.0 * np.real(np.sum(np.conj(amp[self._band0]) * partner[self._band0])))
        kinetic = float(np.sum(self.p**2 * pk))
        out["energy"] = kinetic + float(np.sum(self.potential * density) * dx / norm)
        if psi0 is not None:
            out["p_in"] = float(abs(np.sum(np.conj(psi0) * psi) * dx) ** 2)
        return out


def step(state: GridWavefunction, params: SystemParams) -> GridWavefunction:
    """Single Strang step; convenience wrapper, builds kernels each call."""
    prop = Propagator(params, state.grid)
    psi = prop.step_block(state.amplitudes, 1)
    if not np.isfinite(psi[0]) or not np.all(np.isfinite(psi)):
        raise NumericalFault("non-finite amplitudes after one step")
    return GridWavefunction(psi, state.grid)


def evolve(
    state: GridWavefunction,
    params: SystemParams,
    grid: GridSpec | None = None,
    snapshot_records: tuple[int, ...] = (),
    times: np.ndarray | None = None,
) -> ObservableSeries | tuple[ObservableSeries, list]:
    """Propagate through grid.n_steps and record every record_stride steps.

    Records include t = 0.  ``times`` overrides the reported time stamps
    (used by the scenario runner to share one canonical grid across
    models).  When snapshot_records is non-empty, also returns
    (series, snapshots) where each snapshot is (record_index, p, P(p)).
    """
    grid = grid or state.grid
    if grid is not state.grid and grid != state.grid:
        raise UsageError("state was prepared on a different grid")
    prop = Propagator(params, grid)
    psi0 = state.amplitudes.copy()
    psi = state.amplitudes.copy()
    n_rec = grid.n_records
    if times is None:
        times = record_times(grid.t_max(), n_rec)
    elif len(times) != n_rec + 1:
        raise UsageError(f"need {n_rec + 1} time stamps, got {len(times)}")
    rows = {c: np.empty(n_rec + 1) for c in COLUMNS}
    snapshots = []

    def record(k: int):
        obs = prop.observables_of(psi, psi0)
        if not math.isfinite(obs["norm"]):
            raise NumericalFault(f"non-finite state at step {k * grid.record_stride}")
        rows["t"][k] = times[k]
        for c in COLUMNS[1:]:
            rows[c][k] = obs[c]
        if k in snapshot_records:
            p_sorted, pk_sorted = _sorted_momentum(prop, psi)
            snapshots.append((k, p_sorted, pk_sorted))

    record(0)
    for k in range(1, n_rec + 1):
        psi = prop.step_block(psi, grid.record_stride)
        record(k)
    series = ObservableSeries(rows)
    if snapshot_records:
        return series, snapshots
    return series


def _sorted_momentum(prop: Propagator, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pk = np.abs(np.fft.fft(psi)) ** 2
    pk /= pk.sum()
    order = np.fft.fftshift(np.arange(len(pk)))
    return np.fft.fftshift(prop.p), pk[order]


def observables(state: GridWavefunction, params: SystemParams) -> dict:
    """Expectation values in the band picture; see series module for keys."""
    return Propagator(params, state.grid).observables_of(state.amplitudes)


def momentum_distribution(state: GridWavefunction) -> tuple[np.ndarray, np.ndarray]:
    """(p, P(p)) sorted by ascending momentum; sum of P equals 1."""
    pk = np.abs(np.fft.fft(state.amplitudes)) ** 2
    pk /= pk.sum()
    p = state.grid.p()
    return np.fft.fftshift(p), np.fft.fftshift(pk)


def fidelity(a: GridWavefunction, b: GridWavefunction) -> float:
    """|<a|b>|^2 on a shared grid."""
    if a.grid != b.grid:
        raise UsageError("fidelity requires both states on one grid")
    return float(abs(np.sum(np.conj(a.amplitudes) * b.amplitudes) * a.grid.dx) ** 2)
