import math

import numpy as np
import pytest

from iondeco import experiments, observables
from iondeco.errors import ValidationError

# Engine-oracle values frozen for the published-table comparison.
COMPUTED_QUARTER = {0.001: 0.988365661, 0.005: 0.944625263, 0.01: 0.895677539, 0.1: 0.533807989}
COMPUTED_THREE_QUARTER = {0.001: 0.965951975, 0.005: 0.852310295, 0.01: 0.748931593, 0.1: 0.414864394}


def small_spec(**kwargs):
    defaults = dict(alpha=4.0, r_values=(0.0,), t_grid=np.linspace(0.0, math.pi, 65),
                    targets=("minus",), engine="eigen")
    defaults.update(kwargs)
    return experiments.SweepSpec(**defaults)


def test_sweep_decoherence_free_minus():
    series = experiments.sweep(small_spec())
    col = series.probabilities[(0.0, "minus")]
    assert col[0] == pytest.approx(0.5, abs=1e-12)
    # grid point 16 is exactly T = pi/4
    assert series.t_rad[16] == pytest.approx(math.pi / 4, abs=1e-15)
    assert col[16] == pytest.approx(1.0, abs=1e-9)


def test_sweep_empty_r_values():
    series = experiments.sweep(small_spec(r_values=()))
    assert series.probabilities == {}
    assert series.purities == {}
    assert series.t_rad.size == 65


def test_sweep_engines_agree():
    grid = np.linspace(0.0, math.pi, 9)
    eig = experiments.sweep(small_spec(r_values=(0.01,), t_grid=grid))
    ode = experiments.sweep(small_spec(r_values=(0.01,), t_grid=grid, engine="ode"))
    dev = np.abs(eig.probabilities[(0.01, "minus")] - ode.probabilities[(0.01, "minus")]).max()
    assert dev <= 1e-6


def test_sweep_deterministic_repeat():
    spec = small_spec(r_values=(0.01,), engine="mc", t_grid=np.linspace(0.0, 1.0, 4),
                      n_traj=2000, seed=11)
    a = experiments.sweep(spec)
    b = experiments.sweep(spec)
    assert np.array_equal(a.probabilities[(0.01, "minus")], b.probabilities[(0.01, "minus")])


def test_sweep_spec_validation():
    with pytest.raises(ValidationError):
        small_spec(engine="magic")
    with pytest.raises(ValidationError):
        small_spec(r_values=(-0.1,))
    with pytest.raises(ValidationError):
        small_spec(t_grid=np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValidationError):
        small_spec(targets=("sideways",))
    with pytest.raises(ValidationError):
        experiments.scaled_system(1.0)


def quarter_degree_series(r_values, targets):
    grid = np.radians(np.arange(0, 1441, dtype=float) * 0.25)
    return experiments.sweep(small_spec(r_values=r_values, t_grid=grid, targets=targets))


def test_find_peaks_decoherence_free():
    series = quarter_degree_series((0.0,), ("minus", "plus"))
    peaks = experiments.find_peaks(series)
    tall_minus = [p for p in peaks if p.target == "minus" and p.value > 0.99]
    tall_plus = [p for p in peaks if p.target == "plus" and p.value > 0.99]
    assert [round(math.degrees(p.t_peak_rad), 2) for p in tall_minus] == [45.0, 225.0]
    assert [round(math.degrees(p.t_peak_rad), 2) for p in tall_plus] == [135.0, 315.0]
    for p in tall_minus + tall_plus:
        assert p.value == pytest.approx(1.0, abs=1e-6)
        assert p.value <= 1.0 + 1e-9


def test_find_peaks_monotone_series_empty():
    grid = np.linspace(0.0, 1.0, 50)
    series = experiments.TimeSeries(
        t_rad=grid, t_deg=np.degrees(grid),
        probabilities={(0.0, "minus"): np.linspace(0.2, 0.9, 50)},
        purities={0.0: np.ones(50)}, spec=small_spec())
    assert experiments.find_peaks(series) == []


def test_find_peaks_too_few_points():
    grid = np.array([0.0, 1.0])
    series = experiments.TimeSeries(
        t_rad=grid, t_deg=np.degrees(grid),
        probabilities={(0.0, "minus"): np.array([0.1, 0.2])},
        purities={0.0: np.ones(2)}, spec=small_spec())
    assert experiments.find_peaks(series) == []


def test_find_peaks_plateau_resolves_to_smallest_t():
    grid = np.linspace(0.0, 6.0, 7)
    y = np.array([0.1, 0.5, 0.5, 0.5, 0.2, 0.6, 0.1])
    series = experiments.TimeSeries(
        t_rad=grid, t_deg=np.degrees(grid),
        probabilities={(0.0, "minus"): y},
        purities={0.0: np.ones(7)}, spec=small_spec())
    peaks = experiments.find_peaks(series)
    assert [p.grid_index for p in peaks] == [1, 5]
    assert peaks[0].t_peak_rad == pytest.approx(1.0)  # no refinement across a plateau


def test_peak_values_decrease_with_r():
    series = quarter_degree_series((0.0, 0.001, 0.005, 0.01, 0.1), ("minus",))
    peaks = experiments.find_peaks(series)
    near_quarter = {}
    for p in peaks:
        deg = math.degrees(p.t_peak_rad)
        if 35.0 < deg < 55.0:
            near_quarter[p.r] = p.value
    values = [near_quarter[r] for r in (0.0, 0.001, 0.005, 0.01, 0.1)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_table1_rows():
    rows = experiments.table1()
    assert len(rows) == 5
    free = rows[0]
    assert free.r == 0.0
    assert free.p_quarter == pytest.approx(1.0, abs=1e-9)
    assert free.p_three_quarter == pytest.approx(1.0, abs=1e-9)
    for row in rows[1:]:
        assert row.dev_quarter <= 0.01
        assert row.p_quarter == pytest.approx(COMPUTED_QUARTER[row.r], abs=1e-6)
        assert row.p_three_quarter == pytest.approx(COMPUTED_THREE_QUARTER[row.r], abs=1e-6)
    quarters = [row.p_quarter for row in rows]
    assert all(a > b for a, b in zip(quarters, quarters[1:]))  # peaks get lower with R


def test_physical_units_published_point():
    report = experiments.physical_units(8.95e6, 4.0, [0.001])
    assert report.a_rad_s == pytest.approx(2.311e6, rel=1e-3)
    assert report.inv_gamma_ns[0.001] == pytest.approx(0.433, abs=0.01)
    assert report.t_quarter_us == pytest.approx(0.340, abs=0.005)


def test_physical_units_large_r():
    report = experiments.physical_units(8.95e6, 4.0, [0.1])
    assert report.inv_gamma_ns[0.1] == pytest.approx(43.3, abs=0.2)


def test_physical_units_edge_cases():
    report = experiments.physical_units(8.95e6, 4.0, [0.0])
    assert report.inv_gamma_ns[0.0] == 0.0
    with pytest.raises(ValidationError):
        experiments.physical_units(8.95e6, 1.0, [0.001])
    with pytest.raises(ValidationError):
        experiments.physical_units(0.0, 4.0, [0.001])


def test_physical_units_self_consistent():
    report = experiments.physical_units(8.95e6, 4.0, [0.001])
    assert report.a_rad_s * report.t_quarter_us * 1e-6 == pytest.approx(math.pi / 4.0, rel=1e-15)


def test_audit_report_contents():
    report = experiments.audit()
    assert report.published_formula_quarter == pytest.approx(158.0 / 128.0, abs=1e-9)
    assert report.published_formula_three_quarter == pytest.approx(-15.0 / 64.0, abs=1e-9)
    assert report.exceeds_probability_bounds
    assert report.closed_form_gap_quarter == pytest.approx(0.234375, abs=1e-9)
    assert report.transcription_max_dev <= 1e-9
    assert len(report.three_quarter_rows) == 4
    for r, computed, published, dev in report.three_quarter_rows:
        assert computed == pytest.approx(COMPUTED_THREE_QUARTER[r], abs=1e-6)
        assert published == experiments.PUBLISHED_P_THREE_QUARTER[r]
        assert 0.02 <= dev <= 0.11  # unresolved column, reported side by side
