"""Band structure of the periodic Hamiltonian in the plane-wave basis.

The Bloch functions are labelled so that the plane wave attached to
quasi-momentum q and band index n_b carries physical momentum

    p = q + (2 n_b - 1) * 2      [hbar k0]

with q restricted to the first Brillouin zone [-2, 2).  In this basis the
periodic Hamiltonian is tridiagonal: diagonal kinetic energies
(q + (2 n_b - 1)*2)^2 and coupling v/4 between adjacent bands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalFault

__all__ = [
    "BZ_HALF_WIDTH",
    "DEFAULT_N_MAX",
    "hp_matrix",
    "band_energies",
    "two_band_matrix",
    "dispersion_scan",
    "BandTable",
]

BZ_HALF_WIDTH = 2.0

# 2*n_max + 2 plane waves; converged to <1e-10 in the lowest two bands for
# v <= 20 (doubling n_max changes them by less than that).
DEFAULT_N_MAX = 12


def hp_matrix(q: float, v: float, n_max: int) -> np.ndarray:
    """Plane-wave matrix of the periodic Hamiltonian at quasi-momentum q.

    Spans band indices n_b in {-n_max, ..., n_max + 1}; returns a real
    symmetric tridiagonal matrix in units of E_r.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    nb = np.arange(-n_max, n_max + 2)
    diag = (q + (2 * nb - 1) * 2.0) ** 2
    off = np.full(nb.size - 1, v / 4.0)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def band_energies(q: float, v: float, n_bands: int = 2, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Lowest n_bands eigenvalues of hp_matrix, ascending, in E_r."""
    if n_bands < 1:
        raise DomainError(f"n_bands must be >= 1, got {n_bands}")
    if n_bands > 2 * n_max:
        raise DomainError(f"n_bands={n_bands} requires n_max >= {(n_bands + 1) // 2}")
    h = hp_matrix(q, v, n_max)
    try:
        energies = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(h)) if np.all(np.isfinite(h)) else float("inf")
        raise NumericalFault(f"eigen-solver failed (matrix condition {cond:.3e}): {exc}") from exc
    return energies[:n_bands]


def two_band_matrix(q: float | np.ndarray, v: float) -> np.ndarray:
    """Exact 2x2 restriction to n_b in {0, 1}.

    Returns [[(q-2)^2, v/4], [v/4, (q+2)^2]]; the constant 4 E_r kinetic
    offset is retained (spectra are absolute).  At q = 0 the eigenvalues
    are 4 +- v/4, so the gap equals v/2 exactly.
    """
    q = np.asarray(q, dtype=float)
    out = np.empty(q.shape + (2, 2))
    out[..., 0, 0] = (q - 2.0) ** 2
    out[..., 1, 1] = (q + 2.0) ** 2
    out[..., 0, 1] = v / 4.0
    out[..., 1, 0] = v / 4.0
    return out


@dataclass
class BandTable:
    """Dispersion scan over the first Brillouin zone."""

    q_grid: np.ndarray            # shape (nq,), in hbar*k0
    energies: np.ndarray          # shape (n_bands, nq), in E_r
    free_energies: np.ndarray     # same shape, v = 0 reference
    v: float
    n_max: int
    eigenvectors: np.ndarray | None = field(default=None, repr=False)  # (nq, n_pw, n_bands)

    @property
    def n_bands(self) -> int:
        return self.energies.shape[0]

    def gap(self) -> np.ndarray:
        """Gap between the two lowest bands at each q (requires n_bands >= 2)."""
        return self.energies[1] - self.energies[0]


def dispersion_scan(
    v: float,
    n_bands: int = 2,
    q_resolution: int = 257,
    n_max: int = DEFAULT_N_MAX,
    keep_eigenvectors: bool = False,
) -> BandTable:
    """band_energies on a uniform q grid over [-2, 2), plus the v=0 reference."""
    if q_resolution < 2:
        raise DomainError(f"q_resolution must be >= 2, got {q_resolution}")
    q_grid = -BZ_HALF_WIDTH + np.arange(q_resolution) * (2 * BZ_HALF_WIDTH / q_resolution)
    energies = np.empty((n_bands, q_resolution))
    free = np.empty_like(energies)
    vecs = np.empty((q_resolution, 2 * n_max + 2, n_bands)) if keep_eigenvectors else None
    for i, q in enumerate(q_grid):
        if keep_eigenvectors:
            w, u = np.linalg.eigh(hp_matrix(q, v, n_max))
            energies[:, i] = w[:n_bands]
            vecs[i] = u[:, :n_bands]
        else:
            energies[:, i] = band_energies(q, v, n_bands, n_max)
        free[:, i] = band_energies(q, 0.0, n_bands, n_max)
    return BandTable(q_grid=q_grid, energies=energies, free_energies=free,
                     v=v, n_max=n_max, eigenvectors=vecs)
