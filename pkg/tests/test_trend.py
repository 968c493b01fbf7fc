import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erratlas.errors import DegenerateFit
from erratlas.trend import fit_segment, trend_fit, write_fits_csv


def lstsq_oracle(xs, ys):
    """Independent route: least squares on the design matrix."""
    design = np.column_stack([np.asarray(xs, float), np.ones(len(xs))])
    coef, *_ = np.linalg.lstsq(design, np.asarray(ys, float), rcond=None)
    return float(coef[0]), float(coef[1])


def test_exact_line_zero_width_band():
    pts = [(x, 2.0 * x + 1.0) for x in (0.0, 0.25, 0.5, 0.75, 1.0)]
    fit = trend_fit(pts)
    seg = fit.segments[0]
    assert seg.slope == pytest.approx(2.0, abs=1e-12)
    assert seg.intercept == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(seg.band_lo, seg.band_hi)
    assert np.allclose(seg.band_lo, 2.0 * seg.x_grid + 1.0)


def test_random_fit_matches_lstsq_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        xs = rng.uniform(0, 1, size=30)
        ys = 0.7 * xs + 0.1 + rng.normal(0, 0.05, size=30)
        seg = fit_segment(xs, ys)
        slope, intercept = lstsq_oracle(xs, ys)
        assert seg.slope == pytest.approx(slope, abs=1e-9)
        assert seg.intercept == pytest.approx(intercept, abs=1e-9)


def test_split_fit_equals_independent_segments():
    rng = np.random.default_rng(1)
    left = [(x, 0.2 * x + rng.normal(0, 0.01)) for x in rng.uniform(0.0, 0.4, 20)]
    right = [(x, -0.5 * x + 1 + rng.normal(0, 0.01)) for x in rng.uniform(0.6, 1.0, 20)]
    fit = trend_fit(left + right, split_at=0.5)
    assert len(fit.segments) == 2
    solo_left = trend_fit(left).segments[0]
    solo_right = trend_fit(right).segments[0]
    assert fit.segments[0].slope == pytest.approx(solo_left.slope, abs=1e-12)
    assert fit.segments[1].slope == pytest.approx(solo_right.slope, abs=1e-12)
    assert fit.segments[0].intercept == pytest.approx(solo_left.intercept, abs=1e-12)
    assert fit.segments[1].intercept == pytest.approx(solo_right.intercept, abs=1e-12)


def test_band_has_textbook_halfwidth():
    # spot-check the t-quantile band against a direct formula evaluation
    from scipy import stats

    rng = np.random.default_rng(2)
    xs = rng.uniform(0, 1, 12)
    ys = xs * 0.3 + rng.normal(0, 0.1, 12)
    seg = fit_segment(xs, ys, confidence=0.95, grid_points=7)
    n = len(xs)
    resid = ys - (seg.slope * xs + seg.intercept)
    s = np.sqrt(resid @ resid / (n - 2))
    tq = stats.t.ppf(0.975, n - 2)
    sxx = np.sum((xs - xs.mean()) ** 2)
    for x, lo, hi in zip(seg.x_grid, seg.band_lo, seg.band_hi):
        half = tq * s * np.sqrt(1 / n + (x - xs.mean()) ** 2 / sxx)
        mid = seg.slope * x + seg.intercept
        assert lo == pytest.approx(mid - half, abs=1e-12)
        assert hi == pytest.approx(mid + half, abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(DegenerateFit):
        trend_fit([(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)])
    with pytest.raises(DegenerateFit):
        trend_fit([(0.1, 1.0), (0.2, 2.0)])
    with pytest.raises(DegenerateFit):
        trend_fit([(x, x) for x in (0.1, 0.2, 0.3, 0.7, 0.8)], split_at=0.5)  # right has 2 pts


@settings(max_examples=30, deadline=None)
@given(
    shift=st.floats(min_value=-5, max_value=5, allow_nan=False),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_y_shift_moves_intercept_only(shift, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, 1, 10)
    ys = rng.uniform(0, 1, 10)
    base = fit_segment(xs, ys)
    moved = fit_segment(xs, ys + shift)
    assert moved.slope == pytest.approx(base.slope, abs=1e-9)
    assert moved.intercept == pytest.approx(base.intercept + shift, abs=1e-9)


def test_fits_csv_layout(tmp_path):
    pts = [(x, 2 * x) for x in np.linspace(0, 1, 8)]
    fits = {"demo": trend_fit(pts, grid_points=5)}
    path = tmp_path / "fits.csv"
    write_fits_csv(path, fits)
    lines = path.read_text().splitlines()
    assert lines[0] == "fit,segment,slope,intercept,x,band_lo,band_hi"
    assert len(lines) == 1 + 5
