"""Ideal quantum Rabi model in a truncated Fock space.

Hamiltonian (dimensionless, energies in E_r, derived from the two-band
reduction with the 4 E_r kinetic constant dropped):

    H = w0 a'a + (wq/2) sigma_z - i g sigma_x (a' - a)

where sigma_x = |n_b=0><n_b=0| - |n_b=1><n_b=1| is diagonal in the band
basis and sigma_z flips the bands.  The coupling sign is fixed by the
band labelling p = q + (2 n_b - 1)*2: with it, the quadratures

    x = (a + a') / sqrt(w0)          [1/k0]
    q = i sqrt(w0)/2 (a' - a)        [hbar k0]

reproduce the full lattice model's trajectories inside the Brillouin
zone, including signs.  At wq = 0 the evolution of |0>|n_b> is the
displaced vacuum with coherent amplitude (-1)^(n_b+1) beta(t),
beta(t) = i (g/w0) (e^{-i w0 t} - 1), so a superposition of both bands
grows into the cat state (|beta>|n_b=1> + |-beta>|n_b=0>)/sqrt(2).

Propagation is spectral: one dense Hermitian eigendecomposition, then
exact phases for any output time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .params import RabiParams
from .series import COLUMNS, ObservableSeries

__all__ = [
    "FockState",
    "build_hamiltonian",
    "FockPropagator",
    "evolve_fock",
    "quadratures",
    "coherent_amplitudes",
    "coherent_overlap",
    "beta_t",
    "dsc_state",
    "dsc_fidelity",
    "cat_state",
    "DscOracle",
    "parity_expectation",
    "mean_excitation",
    "recommended_cutoff",
    "state_overlap",
    "state_fidelity",
]

CUTOFF_TAIL_FRACTION = 0.05
CUTOFF_TAIL_LIMIT = 1e-8


@dataclass
class FockState:
    """Amplitudes over {band} x {Fock level}, shape (2, N+1)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 2 or self.amplitudes.shape[0] != 2:
            raise UsageError(f"amplitudes must have shape (2, N+1), got {self.amplitudes.shape}")

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[1] - 1

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def top_tail(self) -> float:
        """Population of the top 5% of Fock levels (cutoff health indicator)."""
        n_levels = self.amplitudes.shape[1]
        k = max(1, int(math.ceil(CUTOFF_TAIL_FRACTION * n_levels)))
        return float(np.sum(np.abs(self.amplitudes[:, -k:]) ** 2))

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    @classmethod
    def from_flat(cls, vec: np.ndarray) -> "FockState":
        return cls(vec.reshape(2, -1))

    @classmethod
    def vacuum(cls, qubit, cutoff: int) -> "FockState":
        """|0> oscillator vacuum weighted by QubitAmplitudes."""
        amp = np.zeros((2, cutoff + 1), dtype=complex)
        amp[0, 0] = qubit.c0
        amp[1, 0] = qubit.c1
        return cls(amp)


def recommended_cutoff(rp: RabiParams) -> int:
    """N >= 4 (2g/w0)^2: generous headroom above the largest displacement."""
    return int(math.ceil(4.0 * rp.beta_max**2))


def build_hamiltonian(rp: RabiParams, cutoff: int) -> np.ndarray:
    """Dense Hermitian matrix of dimension 2*(cutoff+1); Hermitian to 1e-14."""
    if cutoff < 1:
        raise DomainError(f"cutoff must be >= 1, got {cutoff}")
    n1 = cutoff + 1
    n = np.arange(n1)
    ladder = np.zeros((n1, n1))
    ladder[1:, :-1] = np.diag(np.sqrt(n[1:]))  # a^dagger
    a_minus = ladder.T
    drive = ladder - a_minus  # a' - a (real antisymmetric)
    h = np.zeros((2 * n1, 2 * n1), dtype=complex)
    osc = rp.w0 * np.diag(n).astype(complex)
    h[:n1, :n1] = osc - 1j * rp.g * drive      # sigma_x = +1 block (n_b = 0)
    h[n1:, n1:] = osc + 1j * rp.g * drive      # sigma_x = -1 block (n_b = 1)
    h[:n1, n1:] = 0.5 * rp.wq * np.eye(n1)
    h[n1:, :n1] = 0.5 * rp.wq * np.eye(n1)
    return h


class FockPropagator:
    """One-time eigendecomposition; exact evolution to arbitrary times."""

    def __init__(self, rp: RabiParams, cutoff: int):
        self.rp = rp
        self.cutoff = cutoff
        self.energies, self.modes = np.linalg.eigh(build_hamiltonian(rp, cutoff))

    def states_at(self, initial: FockState, times: np.ndarray) -> np.ndarray:
        """Array of flattened states, shape (len(times), 2*(N+1))."""
        if initial.cutoff != self.cutoff:
            raise UsageError("initial state cutoff does not match propagator")
        coeff = self.modes.conj().T @ initial.flat()
        phases = np.exp(-1j * np.outer(np.asarray(times), self.energies))
        return (phases * coeff) @ self.modes.T

    def series(self, initial: FockState, times: np.ndarray) -> tuple[ObservableSeries, dict]:
        """ObservableSeries plus extras {'n_bar', 'parity'} arrays."""
        times = np.asarray(times, dtype=float)
        states = self.states_at(initial, times)
        n1 = self.cutoff + 1
        n = np.arange(n1)
        w0 = self.rp.w0
        coeff = self.modes.conj().T @ initial.flat()
        energy = float(np.sum(self.energies * np.abs(coeff) ** 2))
        psi0 = initial.flat()
        rows = {c: np.empty(len(times)) for c in COLUMNS}
        extras = {"n_bar": np.empty(len(times)), "parity": np.empty(len(times))}
        warnings: list[str] = []
        signs = (-1.0) ** n
        k_tail = max(1, int(math.ceil(CUTOFF_TAIL_FRACTION * n1)))
        tail_flagged = False
        for i, t in enumerate(times):
            vec = states[i]
            b0 = vec[:n1]
            b1 = vec[n1:]
            pop0 = float(np.sum(np.abs(b0) ** 2))
            pop1 = float(np.sum(np.abs(b1) ** 2))
            a_mean = complex(
                np.sum(np.conj(b0[:-1]) * np.sqrt(n[1:]) * b0[1:])
                + np.sum(np.conj(b1[:-1]) * np.sqrt(n[1:]) * b1[1:])
            )
            q_mean = math.sqrt(w0) * a_mean.imag
            sx = pop0 - pop1
            rows["t"][i] = t
            rows["x"][i] = 2.0 * a_mean.real / math.sqrt(w0)
            rows["q"][i] = q_mean
            rows["p"][i] = q_mean - 2.0 * sx
            rows["sigma_x"][i] = sx
            rows["sigma_z"][i] = 2.0 * np.real(np.sum(np.conj(b0) * b1))
            rows["p_in"][i] = float(abs(np.vdot(psi0, vec)) ** 2)
            rows["norm"][i] = pop0 + pop1
            rows["energy"][i] = energy
            rows["leakage"][i] = 0.0
            rows["q_tail"][i] = 0.0
            extras["n_bar"][i] = float(np.sum(n * (np.abs(b0) ** 2 + np.abs(b1) ** 2)))
            extras["parity"][i] = float(2.0 * np.real(np.sum(signs * np.conj(b0) * b1)))
            tail = float(np.sum(np.abs(b0[-k_tail:]) ** 2) + np.sum(np.abs(b1[-k_tail:]) ** 2))
            if tail > CUTOFF_TAIL_LIMIT and not tail_flagged:
                warnings.append(
                    f"cutoff health violated at t={t:.6g}: top-{k_tail} population {tail:.3e}")
                tail_flagged = True
        return ObservableSeries(rows, warnings=warnings), extras


def evolve_fock(initial: FockState, rp: RabiParams, times: np.ndarray) -> ObservableSeries:
    """Spectral propagation recording the standard observable set."""
    series, _ = FockPropagator(rp, initial.cutoff).series(initial, times)
    return series


def quadratures(state: FockState, rp: RabiParams) -> tuple[float, float]:
    """(<x> in 1/k0, <q> in hbar k0) for the mode quadrature convention above."""
    n1 = state.cutoff + 1
    n = np.arange(n1)
    a_mean = 0j
    for b in state.amplitudes:
        a_mean += complex(np.sum(np.conj(b[:-1]) * np.sqrt(n[1:]) * b[1:]))
    return 2.0 * a_mean.real / math.sqrt(rp.w0), math.sqrt(rp.w0) * a_mean.imag


def mean_excitation(state: FockState) -> float:
    n = np.arange(state.cutoff + 1)
    return float(np.sum(n * np.sum(np.abs(state.amplitudes) ** 2, axis=0)))


def parity_expectation(state: FockState) -> float:
    """<sigma_z (-1)^{a'a}>, the conserved Rabi parity."""
    n = np.arange(state.cutoff + 1)
    signs = (-1.0) ** n
    b0, b1 = state.amplitudes
    return float(2.0 * np.real(np.sum(signs * np.conj(b0) * b1)))


def coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes of |beta>, computed in log space (safe for |beta|^2 >> 1)."""
    n = np.arange(cutoff + 1)
    if beta == 0:
        amp = np.zeros(cutoff + 1, dtype=complex)
        amp[0] = 1.0
        return amp
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff + 1)))))
    log_mag = -0.5 * abs(beta) ** 2 + n * math.log(abs(beta)) - 0.5 * log_fact
    phase = n * np.angle(beta)
    return np.exp(log_mag + 1j * phase)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """<alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha)*beta)."""
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta)


def beta_t(t: float, g_over_w0: float, w0: float = 1.0) -> complex:
    """Coherent displacement of the wq = 0 solution: i (g/w0)(e^{-i w0 t} - 1)."""
    return 1j * g_over_w0 * (np.exp(-1j * w0 * t) - 1.0)


def _require_cutoff(beta_max: float, cutoff: int):
    need = int(math.ceil(beta_max**2 + 8.0 * beta_max))
    if cutoff < need:
        raise DomainError(
            f"cutoff {cutoff} too small for displacement |beta|max = {beta_max:.3g}; "
            f"need at least {need}")


def dsc_state(t: float, g_over_w0: float, n_b: int, cutoff: int, w0: float = 1.0) -> FockState:
    """Displaced-vacuum solution at wq = 0 for an initial |0>|n_b>.

    The band n_b carries the coherent amplitude (-1)^(n_b+1) beta(t); the
    ignorable global phase is dropped.
    """
    if n_b not in (0, 1):
        raise DomainError(f"band index must be 0 or 1, got {n_b}")
    _require_cutoff(2.0 * g_over_w0, cutoff)
    beta = beta_t(t, g_over_w0, w0)
    amp = np.zeros((2, cutoff + 1), dtype=complex)
    amp[n_b] = coherent_amplitudes((-1.0) ** (n_b + 1) * beta, cutoff)
    return FockState(amp)


def dsc_fidelity(t: float, g_over_w0: float, w0: float = 1.0) -> float:
    """Initial-state population of the displaced solution: exp(-|beta(t)|^2)."""
    return float(np.exp(-abs(beta_t(t, g_over_w0, w0)) ** 2))


def cat_state(t: float, g_over_w0: float, cutoff: int, w0: float = 1.0) -> FockState:
    """(|beta(t)>|n_b=1> + |-beta(t)>|n_b=0>)/sqrt(2), exact at wq = 0."""
    _require_cutoff(2.0 * g_over_w0, cutoff)
    beta = beta_t(t, g_over_w0, w0)
    amp = np.empty((2, cutoff + 1), dtype=complex)
    amp[1] = coherent_amplitudes(beta, cutoff) / math.sqrt(2.0)
    amp[0] = coherent_amplitudes(-beta, cutoff) / math.sqrt(2.0)
    return FockState(amp)


@dataclass(frozen=True)
class DscOracle:
    """Closed-form deep-strong-coupling solution for one initial band."""

    g_over_w0: float
    n_b: int
    w0: float = 1.0

    @property
    def beta_max(self) -> float:
        return 2.0 * self.g_over_w0

    def beta(self, t: float) -> complex:
        return beta_t(t, self.g_over_w0, self.w0)

    def fidelity(self, t: float) -> float:
        return dsc_fidelity(t, self.g_over_w0, self.w0)

    def state(self, t: float, cutoff: int) -> FockState:
        return dsc_state(t, self.g_over_w0, self.n_b, cutoff, self.w0)


def state_overlap(a: FockState, b: FockState) -> complex:
    if a.cutoff != b.cutoff:
        raise UsageError("states have different cutoffs")
    return complex(np.vdot(a.flat(), b.flat()))


def state_fidelity(a: FockState, b: FockState) -> float:
    return float(abs(state_overlap(a, b)) ** 2)
