"""Spectra: limiting bands, gap criterion, interlacing, and small solver runs."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_bem.charvalue import CharacteristicValue, RootWindow
from phonon_bem.geometry import Circle
from phonon_bem.kernels import LameParams
from phonon_bem.spectra import (
    EigenProblemKind,
    _split_window,
    band_sweep,
    bloch_eigenvalues,
    brillouin_path,
    dirichlet_eigenvalues,
    expand,
    gap_report,
    interlacing_check,
    limiting_bands,
    modified_eigenvalues,
    transition_eigenvalues,
)

DISK = Circle((0.5, 0.5), 0.3)
INC = LameParams(1.0, 1.0)

sorted_lists = st.lists(st.floats(0.1, 50.0), min_size=3, max_size=10).map(sorted)


@settings(max_examples=100, deadline=None)
@given(sorted_lists, sorted_lists)
def test_limiting_bands_are_disjoint_sorted_intervals(w, wt):
    lb = limiting_bands(w, wt)
    for lo, hi in lb.intervals:
        assert lo <= hi
    for (a, b), (c, d) in zip(lb.intervals, lb.intervals[1:]):
        assert b < c


@settings(max_examples=100, deadline=None)
@given(sorted_lists, sorted_lists)
def test_gaps_have_positive_width_and_match_criterion(w, wt):
    rep = gap_report(w, wt)
    for g in rep.gaps:
        assert g.width > 0
        assert g.lower == w[g.j] and g.upper == wt[g.j - 1]
    assert sum(rep.verdicts) == len(rep.gaps)


@settings(max_examples=100, deadline=None)
@given(sorted_lists)
def test_interlaced_inputs_pass(w):
    # w~_j chosen between w_j and w_(j+2) always passes
    wt = [0.5 * (w[j] + w[j + 2]) for j in range(len(w) - 2)]
    assert all(v.holds for v in interlacing_check(w, wt))


def test_interlacing_violation_detected():
    v = interlacing_check([1.0, 2.0, 3.0, 4.0], [0.5, 2.5])
    assert [x.holds for x in v] == [False, True]
    assert v[0].lower_slack == pytest.approx(-0.5)


def test_gap_report_example():
    w = [1.0, 1.0, 2.0, 3.0]
    wt = [1.5, 2.5]
    rep = gap_report(w, wt, rho=2.0)
    assert [(g.j, g.lower, g.upper) for g in rep.gaps] == [(1, 1.0, 1.5), (2, 2.0, 2.5)]
    assert rep.rho == 2.0
    assert rep.limiting.intervals == [(0.0, 1.0), (1.5, 2.0), (2.5, 3.0)]


def test_coincident_values_are_not_a_gap():
    rep = gap_report([1.0, 2.0, 3.0], [2.0 + 1e-12])
    assert rep.gaps == [] and rep.verdicts == [False]


def test_brillouin_path():
    p = brillouin_path(2)
    assert len(p) == 7
    assert p[0] == (0.0, 0.0) and p[-1] == (0.0, 0.0)
    assert (np.pi, 0.0) in p and (np.pi, np.pi) in p


def test_expand_repeats_multiplicity():
    vals = [CharacteristicValue(2.0 + 0j, 2, 0.0, 0.0), CharacteristicValue(1.0 + 0j, 1, 0.0, 0.0)]
    assert expand(vals) == [1.0, 2.0, 2.0]


def test_split_window_avoids_poles():
    w = RootWindow(1.0, 10.0, 0.1)
    parts = _split_window(w, (3.0, 5.0), 0.2)
    assert [(p.lo, p.hi) for p in parts] == [(1.0, 2.8), (3.2, 4.8), (5.2, 10.0)]


def test_problem_kind_validation():
    EigenProblemKind("transition", tau=3.0, direction=(0.6, 0.8))
    with pytest.raises(ValueError):
        EigenProblemKind("elastic")
    with pytest.raises(ValueError):
        EigenProblemKind("modified", rho=0.0)
    with pytest.raises(ValueError):
        EigenProblemKind("transition", direction=(1.0, 1.0))


def test_bloch_alpha_domain():
    with pytest.raises(ValueError):
        bloch_eigenvalues(DISK, LameParams(10.0, 10.0), INC, 1.0, (7.0, 0.0), RootWindow(1, 2, 0.1), N=16)


def test_disk_dirichlet_small_window():
    vals = dirichlet_eigenvalues(DISK, INC, RootWindow(10.8, 13.0, 0.1), N=64)
    got = [(round(v.omega.real, 6), v.multiplicity) for v in vals]
    assert got == [(11.216132, 2), (12.772353, 1)]


def test_modified_contains_axisymmetric_dirichlet_value():
    # the n = 0 torsional disk mode has zero mean traction and survives in the modified problem
    vals = modified_eigenvalues(DISK, INC, 1.0, RootWindow(12.6, 12.9, 0.05), N=48)
    assert any(abs(v.omega.real - 12.7723532340) < 1e-6 for v in vals)


def test_transition_small_tau_matches_modified():
    W = RootWindow(12.2, 12.5, 0.05)
    m = modified_eigenvalues(DISK, INC, 1.0, W, N=48)
    t = transition_eigenvalues(DISK, INC, 1e-4, (1.0, 0.0), 1.0, W, N=48)
    assert expand(m) == pytest.approx(expand(t), rel=1e-6)


def test_band_sweep_single_sample():
    d = band_sweep(DISK, LameParams(1e3, 1e3), INC, path=[(np.pi, np.pi)], J=2,
                   window=RootWindow(10.5, 13.0, 0.1), N=48, N_scan=24)
    assert d.incomplete == [False]
    # the (pi, pi) point keeps the square symmetry, so the lowest pair stays double
    assert d.bands[0][0] == pytest.approx(d.bands[0][1], abs=1e-8)
    assert d.bands[0][0] == pytest.approx(11.2038, abs=1e-3)
    with pytest.raises(ValueError):
        band_sweep(DISK, LameParams(1e3, 1e3), INC, path=[(1.0, 1.0)], near_gamma="sometimes")


def test_band_sweep_reports_incomplete_samples():
    d = band_sweep(DISK, LameParams(1e3, 1e3), INC, path=[(np.pi, np.pi)], J=3,
                   window=RootWindow(10.5, 11.5, 0.1), N=32, N_scan=None)
    assert d.incomplete == [True]
    assert np.isnan(d.bands[0][2])
