"""Two-band model on a periodic quasi-momentum grid.

Restricting the lattice problem to the two lowest diabatic bands leaves a
two-component spinor over the zone q in [-2, 2).  The kinetic-plus-lattice
part is q-local,

    M(q) = [[(q-2)^2 - 4,  v/4],
            [ v/4,  (q+2)^2 - 4]]

(the 4 E_r offset is subtracted so energies compare directly with the
Rabi model), while the trap acts as (w0^2/4) x^2 with x = i d/dq.

Umklapp closure
---------------
The trap couples the zone edges with a band flip: amplitude leaving
(q -> -2, n_b = 1) re-enters at (q = +2, n_b = 0), exactly as in the full
model where momentum flows continuously through p = 0.  Both bands
together therefore form a single closed momentum circle p in [-4, 4):
band 0 occupies p = q - 2, band 1 occupies p = q + 2, and the kinetic
energy p^2 - 4 is continuous across both seams.  The propagator works
directly on that circle: the trap step is a Fourier transform along the
8-periodic p coordinate (conjugate positions sit on the half-site comb
x_k = k*pi/4), and the lattice/kinetic step is the exact 2x2 exponential
at each q, pairing antipodal circle points p and p + 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConversionError, DomainError, NumericalFault, UsageError
from .grid_dynamics import GridSpec, GridWavefunction, fold_to_bz, default_dt, record_times
from .params import SystemParams
from .series import COLUMNS, VALIDITY_Q_EDGE, ObservableSeries

__all__ = [
    "MIN_Q_RESOLUTION",
    "TwoBandState",
    "prepare_two_band",
    "evolve_periodic",
    "from_grid_state",
    "to_grid_state",
    "to_observables",
]

MIN_Q_RESOLUTION = 512
CONVERSION_LEAK_LIMIT = 1e-6


@dataclass
class TwoBandState:
    """Spinor over the q grid; component index is the band label n_b."""

    spinor: np.ndarray  # complex, shape (2, M)

    def __post_init__(self):
        self.spinor = np.asarray(self.spinor, dtype=complex)
        if self.spinor.ndim != 2 or self.spinor.shape[0] != 2:
            raise UsageError(f"spinor must have shape (2, M), got {self.spinor.shape}")

    @property
    def m_points(self) -> int:
        return self.spinor.shape[1]

    def q_grid(self) -> np.ndarray:
        m = self.m_points
        return -2.0 + np.arange(m) * (4.0 / m)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.spinor) ** 2))

    def copy(self) -> "TwoBandState":
        return TwoBandState(self.spinor.copy())


def prepare_two_band(params: SystemParams, qubit, m_points: int = MIN_Q_RESOLUTION) -> TwoBandState:
    """Vacuum Gaussian at q = 0 weighted by the qubit amplitudes.

    Matches prepare_initial_state: momentum width <q^2> = w0/4 per band.
    """
    q = -2.0 + np.arange(m_points) * (4.0 / m_points)
    envelope = np.exp(-(q**2) / params.w0)
    spinor = np.vstack([qubit.c0 * envelope, qubit.c1 * envelope]).astype(complex)
    spinor /= math.sqrt(np.sum(np.abs(spinor) ** 2))
    return TwoBandState(spinor)


def _to_circle(spinor: np.ndarray) -> np.ndarray:
    """Arrange (chi0, chi1) on the p circle in FFT order.

    FFT index j < M holds p = j*dp in [0, 4) (band 1 at q = p - 2);
    index M + j holds p = (j - M)*dp in [-4, 0) (band 0 at q = p + 2).
    Both halves are indexed by the same ascending q.
    """
    return np.concatenate([spinor[1], spinor[0]])


def _from_circle(phi: np.ndarray) -> np.ndarray:
    m = phi.size // 2
    return np.vstack([phi[m:], phi[:m]])


class _PeriodicPropagator:
    def __init__(self, params: SystemParams, m_points: int, dt: float):
        self.params = params
        self.m = m_points
        self.dt = dt
        dp = 4.0 / m_points
        q = -2.0 + np.arange(m_points) * dp
        self.q = q
        self.x_circle = 2.0 * math.pi * np.fft.fftfreq(2 * m_points, d=dp)
        self._trap_full = np.exp(-0.25j * params.w0**2 * self.x_circle**2 * dt)
        self._u_half = self._band_step(dt / 2.0)
        self._u_full = self._band_step(dt)

    def _band_step(self, tau: float) -> tuple[np.ndarray, ...]:
        """Exact exponential of M(q): entries of exp(-i M(q) tau) per q."""
        q = self.q
        v = self.params.v
        mean = q**2  # average of the two diagonal entries of M(q)
        bz = -4.0 * q
        bx = np.full_like(q, v / 4.0)
        mag = np.hypot(bx, bz)
        theta = mag * tau
        phase = np.exp(-1j * mean * tau)
        sinc = np.where(mag > 0.0, np.sin(theta) / np.where(mag > 0.0, mag, 1.0), tau)
        u00 = phase * (np.cos(theta) - 1j * sinc * bz)
        u11 = phase * (np.cos(theta) + 1j * sinc * bz)
        u01 = phase * (-1j * sinc * bx)
        return u00, u01, u11

    def _apply_band(self, phi: np.ndarray, u) -> np.ndarray:
        u00, u01, u11 = u
        m = self.m
        chi1 = phi[:m]
        chi0 = phi[m:]
        new0 = u00 * chi0 + u01 * chi1
        new1 = u01 * chi0 + u11 * chi1
        return np.concatenate([new1, new0])

    def step_block(self, phi: np.ndarray, n_sub: int) -> np.ndarray:
        phi = self._apply_band(phi, self._u_half)
        for _ in range(n_sub - 1):
            phi = np.fft.fft(self._trap_full * np.fft.ifft(phi))
            phi = self._apply_band(phi, self._u_full)
        phi = np.fft.fft(self._trap_full * np.fft.ifft(phi))
        phi = self._apply_band(phi, self._u_half)
        return phi

    def observables_of(self, phi: np.ndarray, phi0: np.ndarray | None = None) -> dict:
        m = self.m
        q = self.q
        prob = np.abs(phi) ** 2
        norm = float(prob.sum())
        prob = prob / norm
        p1 = prob[:m]   # band 1, p = q + 2
        p0 = prob[m:]   # band 0, p = q - 2
        chi1 = phi[:m]
        chi0 = phi[m:]
        c = np.fft.ifft(phi)
        cprob = np.abs(c) ** 2
        cprob /= cprob.sum()
        out = {
            "x": float(np.sum(self.x_circle * cprob)),
            "p": float(np.sum((q - 2.0) * p0) + np.sum((q + 2.0) * p1)),
            "q": float(np.sum(q * (p0 + p1))),
            "sigma_x": float(p0.sum() - p1.sum()),
            "sigma_z": float(2.0 * np.real(np.sum(np.conj(chi0) * chi1)) / norm),
            "norm": norm,
            "leakage": 0.0,
            "q_tail": float((p0 + p1)[np.abs(q) > VALIDITY_Q_EDGE].sum()),
        }
        kin0 = (q - 2.0) ** 2 - 4.0
        kin1 = (q + 2.0) ** 2 - 4.0
        coupling = 2.0 * (self.params.v / 4.0) * np.real(np.sum(np.conj(chi0) * chi1)) / norm
        trap = 0.25 * self.params.w0**2 * float(np.sum(self.x_circle**2 * cprob))
        out["energy"] = float(np.sum(kin0 * p0) + np.sum(kin1 * p1)) + coupling + trap
        if phi0 is not None:
            out["p_in"] = float(abs(np.vdot(phi0, phi)) ** 2 / norm)
        return out


def evolve_periodic(
    initial: TwoBandState,
    params: SystemParams,
    t_max: float,
    n_records: int = 400,
    dt: float | None = None,
    times: np.ndarray | None = None,
) -> ObservableSeries:
    """Strang propagation: 2x2 half-step, trap full step on the circle, 2x2 half-step."""
    m = initial.m_points
    if m < MIN_Q_RESOLUTION:
        raise DomainError(f"q-grid resolution {m} below the minimum {MIN_Q_RESOLUTION}")
    if dt is None:
        dt = default_dt(params)
    n_steps = max(n_records, int(math.ceil(t_max / dt)))
    n_steps += (-n_steps) % n_records
    dt = t_max / n_steps
    stride = n_steps // n_records
    prop = _PeriodicPropagator(params, m, dt)
    phi0 = _to_circle(initial.spinor)
    phi = phi0.copy()
    if times is None:
        times = record_times(t_max, n_records)
    elif len(times) != n_records + 1:
        raise UsageError(f"need {n_records + 1} time stamps, got {len(times)}")
    rows = {c: np.empty(n_records + 1) for c in COLUMNS}

    def record(k: int):
        obs = prop.observables_of(phi, phi0)
        if not math.isfinite(obs["norm"]):
            raise NumericalFault(f"non-finite state at step {k * stride}")
        rows["t"][k] = times[k]
        for c in COLUMNS[1:]:
            rows[c][k] = obs[c]

    record(0)
    for k in range(1, n_records + 1):
        phi = prop.step_block(phi, stride)
        record(k)
    return ObservableSeries(rows)


def to_observables(state: TwoBandState, params: SystemParams) -> dict:
    """Same observable set as the full model (leakage identically zero)."""
    prop = _PeriodicPropagator(params, state.m_points, dt=1.0)
    return prop.observables_of(_to_circle(state.spinor))


def from_grid_state(psi: GridWavefunction) -> TwoBandState:
    """Rebin the momentum amplitudes of a grid state into the two-band spinor.

    The grid's momentum spacing divides 4 exactly (box snapping), so the
    conversion is a lossless gather for amplitudes inside bands {0, 1}.
    """
    grid = psi.grid
    amp = np.fft.fft(psi.amplitudes)
    amp = amp / math.sqrt(float(np.sum(np.abs(amp) ** 2)))
    p = grid.p()
    q, n_b = fold_to_bz(p)
    in_bands = (n_b == 0) | (n_b == 1)
    leaked = float(np.sum(np.abs(amp[~in_bands]) ** 2))
    if leaked >= CONVERSION_LEAK_LIMIT:
        raise ConversionError(
            f"grid state leaks {leaked:.3e} probability outside bands 0 and 1 "
            f"(limit {CONVERSION_LEAK_LIMIT})")
    m = grid.fold_shift_bins
    dq = 4.0 / m
    spinor = np.zeros((2, m), dtype=complex)
    idx = np.rint((q + 2.0) / dq).astype(int) % m
    for band in (0, 1):
        sel = n_b == band
        spinor[band, idx[sel]] = amp[sel]
    return TwoBandState(spinor)


def to_grid_state(state: TwoBandState, grid: GridSpec) -> GridWavefunction:
    """Embed the spinor back into a grid wavefunction (zero outside bands 0, 1)."""
    m = grid.fold_shift_bins
    if state.m_points != m:
        raise UsageError(
            f"two-band resolution {state.m_points} does not match the grid's "
            f"folded momentum resolution {m}")
    p = grid.p()
    q, n_b = fold_to_bz(p)
    dq = 4.0 / m
    idx = np.rint((q + 2.0) / dq).astype(int) % m
    amp = np.zeros(grid.n_points, dtype=complex)
    for band in (0, 1):
        sel = n_b == band
        amp[sel] = state.spinor[band, idx[sel]]
    psi = np.fft.ifft(amp)
    norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dx)
    if norm == 0.0:
        raise UsageError("two-band state has zero norm")
    return GridWavefunction(psi / norm, grid)
