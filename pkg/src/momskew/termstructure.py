"""Container for moment term structures and its delimited-text form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMNS = ("P", "mu2", "mu3", "kappa3", "se_kappa3", "n_samples")


@dataclass
class MomentTermStructure:
    """Second/third moments and skewness of P-period trading returns.

    ``se_kappa3`` and ``n_samples`` are only populated by estimators.
    ``flags`` collects per-period notes (e.g. periods dropped for lack of data).
    """

    periods: np.ndarray
    mu2: np.ndarray
    mu3: np.ndarray
    kappa3: np.ndarray
    se_kappa3: np.ndarray | None = None
    n_samples: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.periods = np.asarray(self.periods, dtype=np.int64)
        self.mu2 = np.asarray(self.mu2, dtype=float)
        self.mu3 = np.asarray(self.mu3, dtype=float)
        self.kappa3 = np.asarray(self.kappa3, dtype=float)
        if self.se_kappa3 is not None:
            self.se_kappa3 = np.asarray(self.se_kappa3, dtype=float)
        if self.n_samples is not None:
            self.n_samples = np.asarray(self.n_samples, dtype=np.int64)

    @classmethod
    def from_moments(cls, periods, mu2, mu3, **kw) -> "MomentTermStructure":
        mu2 = np.asarray(mu2, dtype=float)
        mu3 = np.asarray(mu3, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            kappa3 = np.where(mu2 > 0, mu3 / np.abs(mu2) ** 1.5, np.nan)
        return cls(periods, mu2, mu3, kappa3, **kw)

    def __len__(self):
        return len(self.periods)

    def at(self, P: int) -> float:
        """Skewness at period ``P``."""
        idx = np.flatnonzero(self.periods == P)
        if not len(idx):
            raise KeyError(P)
        return float(self.kappa3[idx[0]])

    def se_at(self, P: int) -> float:
        idx = np.flatnonzero(self.periods == P)
        return float(self.se_kappa3[idx[0]])

    def peak(self) -> tuple[int, float]:
        i = int(np.nanargmax(self.kappa3))
        return int(self.periods[i]), float(self.kappa3[i])

    def write_csv(self, path) -> None:
        cols = ["P", "mu2", "mu3", "kappa3"]
        if self.se_kappa3 is not None:
            cols.append("se_kappa3")
        if self.n_samples is not None:
            cols.append("n_samples")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for i in range(len(self)):
                row = [str(int(self.periods[i])), repr(float(self.mu2[i])),
                       repr(float(self.mu3[i])), repr(float(self.kappa3[i]))]
                if self.se_kappa3 is not None:
                    row.append(repr(float(self.se_kappa3[i])))
                if self.n_samples is not None:
                    row.append(str(int(self.n_samples[i])))
                w.writerow(row)

    @classmethod
    def read_csv(cls, path) -> "MomentTermStructure":
        with open(Path(path), newline="") as fh:
            rows = list(csv.DictReader(fh))
        get = lambda k, t: np.array([t(r[k]) for r in rows]) if rows and k in rows[0] else None
        return cls(
            periods=get("P", int),
            mu2=get("mu2", float),
            mu3=get("mu3", float),
            kappa3=get("kappa3", float),
            se_kappa3=get("se_kappa3", float),
            n_samples=get("n_samples", int),
        )
