"""Dimensionless unit system and physical parameters.

Every quantity in this package is expressed in lattice recoil units built
from the single-photon wave-vector k0 of the driving field:

    energy    E_r = hbar^2 k0^2 / (2 m)
    length    1 / k0
    momentum  hbar k0
    time      hbar / E_r

with hbar = 1 internally.  In these units the single-atom Hamiltonian

    H = p^2/2m + (V/2) cos(4 k0 x) + (m w_trap^2 / 2) x^2

becomes

    H = p~^2 + (v/2) cos(4 x~) + (w0^2/4) x~^2

where p~ = p/(hbar k0), x~ = k0 x, v = V/E_r and w0 = hbar*w_trap/E_r.
Only the two dimensionless numbers (v, w0) enter any computation.

The effective Rabi-model parameters derived from (v, w0) are

    qubit splitting   wq = v/2
    mode frequency    w0
    coupling          g  = 2 sqrt(w0)

so the coupling ratio is g/w0 = 2/sqrt(w0): shallow traps put the
simulator arbitrarily deep into the strong-coupling regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "UnitSystem",
    "UNITS",
    "SystemParams",
    "RabiParams",
    "to_rabi_params",
    "from_ratios",
]


@dataclass(frozen=True)
class UnitSystem:
    """Descriptive record of the internal unit conventions.

    All members equal 1.0 by construction; the object exists so that code
    and serialized metadata can state unambiguously which convention a
    number is expressed in.
    """

    energy: str = "E_r = hbar^2 k0^2 / (2 m)"
    length: str = "1/k0"
    momentum: str = "hbar k0"
    time: str = "hbar / E_r"
    hbar: float = 1.0


UNITS = UnitSystem()


@dataclass(frozen=True)
class SystemParams:
    """Physical knobs of the cold-atom system.

    v:  lattice depth V/E_r (>= 0)
    w0: trap frequency hbar*w_trap/E_r (> 0)
    """

    v: float
    w0: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and self.v >= 0.0):
            raise DomainError(f"lattice depth v must be finite and >= 0, got {self.v}")
        if not (math.isfinite(self.w0) and self.w0 > 0.0):
            raise DomainError(f"trap frequency w0 must be finite and > 0, got {self.w0}")

    @property
    def trap_period(self) -> float:
        """Trap oscillation period 2*pi/w0 in units of hbar/E_r."""
        return 2.0 * math.pi / self.w0


@dataclass(frozen=True)
class RabiParams:
    """Effective quantum Rabi model parameters (all in E_r/hbar)."""

    w0: float
    wq: float
    g: float

    @property
    def g_over_w0(self) -> float:
        return self.g / self.w0

    @property
    def wq_over_w0(self) -> float:
        return self.wq / self.w0

    @property
    def beta_max(self) -> float:
        """Largest coherent displacement reached at wq = 0: 2 g / w0."""
        return 2.0 * self.g / self.w0


def to_rabi_params(p: SystemParams) -> RabiParams:
    """Map (v, w0) to the effective Rabi parameters (w0, wq=v/2, g=2*sqrt(w0))."""
    return RabiParams(w0=p.w0, wq=0.5 * p.v, g=2.0 * math.sqrt(p.w0))


def from_ratios(g_over_w0: float, wq_over_w0: float) -> SystemParams:
    """Invert the parameter map from the ratios quoted in figure captions.

    g/w0 = 2/sqrt(w0) gives w0 = 4/(g/w0)^2, and wq = v/2 gives
    v = 2*(wq/w0)*w0.  Round-trips with to_rabi_params to ~1e-16 relative.
    """
    if not (math.isfinite(g_over_w0) and g_over_w0 > 0.0):
        raise DomainError(f"g/w0 must be finite and > 0, got {g_over_w0}")
    if not (math.isfinite(wq_over_w0) and wq_over_w0 >= 0.0):
        raise DomainError(f"wq/w0 must be finite and >= 0, got {wq_over_w0}")
    w0 = 4.0 / g_over_w0**2
    v = 2.0 * wq_over_w0 * w0
    return SystemParams(v=v, w0=w0)


def q_excursion_estimate(p: SystemParams) -> float:
    """A-priori estimate of the quasi-momentum excursion, in units of hbar*k0.

    The ideal Rabi model displaces the mode by at most beta_max = 2 g/w0,
    which corresponds to a momentum amplitude sqrt(w0) * beta_max.  With
    g = 2*sqrt(w0) this evaluates to 4 regardless of w0: the simulated
    momentum always tries to leave the first Brillouin zone (half-width 2).
    """
    rp = to_rabi_params(p)
    return math.sqrt(p.w0) * rp.beta_max
