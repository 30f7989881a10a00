"""Time series of recorded observables, shared by all three propagators.

Column conventions (one row per record time):

    t        time in hbar/E_r
    x        <x> in 1/k0
    p        <p> in hbar*k0 (Fock model: reconstructed as <q> - 2<sigma_x>)
    q        quasi-momentum expectation; folded into [-2, 2) for the grid
             and periodic models, unbounded for the Fock model
    sigma_x  P(n_b = 0) - P(n_b = 1)
    sigma_z  2 Re sum_q psi0*(q) psi1(q)
    p_in     overlap-squared with the run's initial state
    norm     total probability
    energy   <H> in E_r (per-model convention, see module docs)
    leakage  probability outside bands {0, 1}
    q_tail   probability outside the validity region of the Rabi
             correspondence: 1 - P(n_b in {0,1} and |q| <= 1.8)

CSV output uses 17 significant digits so binary64 values round-trip
exactly and file bytes are reproducible for identical inputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

__all__ = ["COLUMNS", "VALIDITY_Q_EDGE", "ObservableSeries"]

COLUMNS = ("t", "x", "p", "q", "sigma_x", "sigma_z", "p_in", "norm", "energy",
           "leakage", "q_tail")

# |q| beyond this marks the state as outside the region where the Rabi
# correspondence is trusted (0.9 of the zone half-width).
VALIDITY_Q_EDGE = 1.8


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass
class ObservableSeries:
    """Columnar record of observables along one propagation run."""

    data: dict[str, np.ndarray]
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        missing = [c for c in COLUMNS if c not in self.data]
        if missing:
            raise UsageError(f"series is missing columns {missing}")
        n = len(self.data["t"])
        for c in COLUMNS:
            self.data[c] = np.asarray(self.data[c], dtype=float)
            if len(self.data[c]) != n:
                raise UsageError(f"column {c!r} has length {len(self.data[c])}, expected {n}")

    def __len__(self) -> int:
        return len(self.data["t"])

    def __getitem__(self, column: str) -> np.ndarray:
        return self.data[column]

    @property
    def t(self) -> np.ndarray:
        return self.data["t"]

    def to_csv(self, path=None) -> str | None:
        buf = io.StringIO()
        buf.write(",".join(COLUMNS) + "\n")
        cols = [self.data[c] for c in COLUMNS]
        for row in zip(*cols):
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path) -> "ObservableSeries":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        if tuple(header) != COLUMNS:
            raise UsageError(f"unexpected CSV header {header} in {path}")
        if rows:
            arr = np.array(rows, dtype=float)
        else:
            arr = np.empty((0, len(COLUMNS)))
        return cls(data={c: arr[:, i] for i, c in enumerate(COLUMNS)})

    def same_time_grid(self, other: "ObservableSeries") -> bool:
        return len(self) == len(other) and bool(np.array_equal(self.t, other.t))
