"""Curve containers shared by the Monte Carlo and threshold modules."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


class CurveError(ValueError):
    pass


@dataclass
class SweepCurve:
    """Event-probability estimates over a parameter grid.

    Estimates live in [0, 1].  For increasing events the curve must be
    nondecreasing within 3 sigma; ``check_monotone`` enforces that.
    """

    ps: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    replicas: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.ps = np.asarray(self.ps, dtype=float)
        self.estimates = np.asarray(self.estimates, dtype=float)
        self.stderrs = np.asarray(self.stderrs, dtype=float)
        if not (len(self.ps) == len(self.estimates) == len(self.stderrs)):
            raise CurveError("grid, estimates and stderrs must have equal length")
        if np.any(self.estimates < -1e-12) or np.any(self.estimates > 1 + 1e-12):
            raise CurveError("estimates must lie in [0, 1]")
        if np.any(np.diff(self.ps) <= 0):
            raise CurveError("parameter grid must be strictly increasing")

    def check_monotone(self, z: float = 3.0, atol: float = 1e-9) -> None:
        """Reject decreases beyond z combined standard errors.

        The absolute floor absorbs float-level noise in analytically
        monotone curves whose statistical error is essentially zero.
        """
        for j in range(len(self.ps) - 1):
            slack = z * float(np.hypot(self.stderrs[j], self.stderrs[j + 1])) + atol
            if self.estimates[j + 1] < self.estimates[j] - slack:
                raise CurveError(
                    f"curve decreases beyond {z} sigma between p={self.ps[j]} "
                    f"and p={self.ps[j + 1]}"
                )

    def to_csv(self, metadata: dict | None = None) -> str:
        buf = io.StringIO()
        for key, value in (metadata or {}).items():
            buf.write(f"# {key}: {value}\n")
        buf.write("p,estimate,stderr,n_replicas\n")
        for p, est, se in zip(self.ps, self.estimates, self.stderrs):
            buf.write(f"{float(p)!r},{float(est)!r},{float(se)!r},{self.replicas}\n")
        return buf.getvalue()


class CurveFamily:
    """f_n(x) estimates for several sizes n on one common x grid."""

    def __init__(self, xs, entries: dict[int, tuple[np.ndarray, np.ndarray]], z: float = 3.0):
        self.xs = np.asarray(xs, dtype=float)
        if np.any(np.diff(self.xs) <= 0):
            raise CurveError("x grid must be strictly increasing")
        self.entries: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for n, (values, stderrs) in sorted(entries.items()):
            values = np.asarray(values, dtype=float)
            stderrs = np.asarray(stderrs, dtype=float)
            if values.shape != self.xs.shape or stderrs.shape != self.xs.shape:
                raise CurveError(f"size-{n} curve does not match the x grid")
            self._check_monotone(n, values, stderrs, z)
            self.entries[n] = (values, stderrs)

    @staticmethod
    def _check_monotone(n, values, stderrs, z, atol: float = 1e-9) -> None:
        for j in range(len(values) - 1):
            slack = z * float(np.hypot(stderrs[j], stderrs[j + 1])) + atol
            if values[j + 1] < values[j] - slack:
                raise CurveError(f"size-{n} curve decreases beyond {z} sigma at index {j}")

    @property
    def sizes(self) -> list[int]:
        return sorted(self.entries)

    def values(self, n: int) -> np.ndarray:
        return self.entries[n][0]

    def to_csv(self, metadata: dict | None = None) -> str:
        buf = io.StringIO()
        for key, value in (metadata or {}).items():
            buf.write(f"# {key}: {value}\n")
        buf.write("n,x,value,stderr\n")
        for n in self.sizes:
            values, stderrs = self.entries[n]
            for x, v, s in zip(self.xs, values, stderrs):
                buf.write(f"{n},{float(x)!r},{float(v)!r},{float(s)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CurveFamily":
        rows = []
        header_seen = False
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line.lower() != "n,x,value,stderr":
                    raise CurveError(f"unexpected header {line!r}")
                header_seen = True
                continue
            n_str, x_str, v_str, s_str = line.split(",")
            rows.append((int(n_str), float(x_str), float(v_str), float(s_str)))
        if not rows:
            raise CurveError("no data rows")
        sizes = sorted({r[0] for r in rows})
        xs = sorted({r[1] for r in rows})
        index = {x: j for j, x in enumerate(xs)}
        entries = {}
        for n in sizes:
            values = np.full(len(xs), np.nan)
            stderrs = np.full(len(xs), np.nan)
            for rn, x, v, s in rows:
                if rn == n:
                    values[index[x]] = v
                    stderrs[index[x]] = s
            if np.any(np.isnan(values)):
                raise CurveError(f"size {n} is missing grid points")
            entries[n] = (values, stderrs)
        return cls(xs, entries)
