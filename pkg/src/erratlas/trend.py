"""Ordinary least squares trend lines with mean-response confidence bands.

Fits y = slope*x + intercept per segment via the closed-form normal equations.
The band is the classic OLS confidence interval for the mean response,
half-width t_{1-a/2, n-2} * s * sqrt(1/n + (x - xbar)^2 / Sxx), which collapses
to zero width on exactly collinear points.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import DegenerateFit


@dataclass(frozen=True)
class SegmentFit:
    slope: float
    intercept: float
    n: int
    x_grid: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    residual_std: float


@dataclass(frozen=True)
class TrendFit:
    segments: list[SegmentFit]
    split_at: float | None


def fit_segment(
    xs: np.ndarray,
    ys: np.ndarray,
    confidence: float = 0.95,
    grid_points: int = 50,
) -> SegmentFit:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    n = xs.size
    if n < 3:
        raise DegenerateFit(f"need at least 3 points per segment, got {n}")
    if np.all(xs == xs[0]):
        raise DegenerateFit("all x values are equal")
    xbar = xs.mean()
    sxx = float(((xs - xbar) ** 2).sum())
    if sxx == 0.0:
        raise DegenerateFit("all x values are equal")
    sxy = float(((xs - xbar) * (ys - ys.mean())).sum())
    slope = sxy / sxx
    intercept = float(ys.mean() - slope * xbar)

    resid = ys - (slope * xs + intercept)
    s2 = float((resid**2).sum()) / (n - 2)
    s = np.sqrt(max(s2, 0.0))

    grid = np.linspace(xs.min(), xs.max(), grid_points)
    tq = stats.t.ppf(1 - (1 - confidence) / 2, n - 2)
    half = tq * s * np.sqrt(1.0 / n + (grid - xbar) ** 2 / sxx)
    mean_line = slope * grid + intercept
    return SegmentFit(
        slope=slope,
        intercept=intercept,
        n=n,
        x_grid=grid,
        band_lo=mean_line - half,
        band_hi=mean_line + half,
        residual_std=float(s),
    )


def trend_fit(
    points: list[tuple[float, float]],
    split_at: float | None = None,
    confidence: float = 0.95,
    grid_points: int = 50,
) -> TrendFit:
    """Fit one segment, or two split at x < split_at / x >= split_at."""
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if split_at is None:
        return TrendFit([fit_segment(xs, ys, confidence, grid_points)], None)
    left = xs < split_at
    segments = [
        fit_segment(xs[mask], ys[mask], confidence, grid_points)
        for mask in (left, ~left)
    ]
    return TrendFit(segments, split_at)


def write_fits_csv(path: str | Path, fits: dict[str, TrendFit]) -> None:
    """Plot-ready rows: one per grid point, keyed by fit name and segment."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["fit", "segment", "slope", "intercept", "x", "band_lo", "band_hi"])
        for name in sorted(fits):
            for si, seg in enumerate(fits[name].segments):
                for x, lo, hi in zip(seg.x_grid, seg.band_lo, seg.band_hi):
                    w.writerow(
                        [name, si, repr(seg.slope), repr(seg.intercept), repr(float(x)), repr(float(lo)), repr(float(hi))]
                    )
