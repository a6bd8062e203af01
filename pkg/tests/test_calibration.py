import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from docquad.calibration import (Calibration, KInterval, TrainingSample, calibrate, default_calibration,
                                 feasible_k_intervals, optimize_k, parse_calibration, read_calibration,
                                 solved_at, write_calibration)
from oracles import grid_solved_count, max_breakpoint, random_sample


def test_two_line_crossing():
    s = TrainingSample((1.0, 0.0), (0.0, 0.5), (True, False))
    assert feasible_k_intervals(s) == [KInterval(0.5, math.inf)]


def test_single_correct_candidate():
    assert feasible_k_intervals(TrainingSample((0.3,), (0.1,), (True,))) == [KInterval(0.0, math.inf)]


def test_no_correct_candidate():
    assert feasible_k_intervals(TrainingSample((0.3, 0.2), (0.1, 0.4), (False, False))) == []


def test_tie_counts_as_solved():
    s = TrainingSample((1.0, 1.0), (0.5, 0.5), (False, True))
    assert feasible_k_intervals(s) == [KInterval(0.0, math.inf)]


def test_bounded_interval():
    # correct line wins only between its crossings with the other two
    s = TrainingSample((0.0, 1.0, 2.0), (1.0, 0.5, -1.5), (False, True, False))
    assert feasible_k_intervals(s) == [KInterval(0.5, 2.0)]


def test_optimize_overlap_midpoint():
    k, count, flagged = optimize_k([[KInterval(0.5, math.inf)], [KInterval(0.0, 1.0)]])
    assert (k, count, flagged) == (0.75, 2, False)


def test_optimize_unbounded_from_zero():
    assert optimize_k([[KInterval(0.0, math.inf)]]) == (0.0, 1, False)


def test_optimize_unbounded_above():
    assert optimize_k([[KInterval(2.0, math.inf)]]) == (3.0, 1, False)


def test_optimize_point_region():
    k, count, _ = optimize_k([[KInterval(0.0, 1.0)], [KInterval(1.0, 2.0)]])
    assert (k, count) == (1.0, 2)


def test_optimize_no_feasible_sample():
    assert optimize_k([[], []]) == (0.0, 0, True)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_intervals_match_grid(seed):
    rng = np.random.default_rng(seed)
    s = random_sample(rng, n_max=3)
    ks = np.arange(0, 6.0, 1e-3)
    solved = grid_solved_count([s], ks) > 0
    ivs = feasible_k_intervals(s)
    inside = np.zeros(len(ks), dtype=bool)
    for iv in ivs:
        inside |= (ks >= iv.lo) & (ks <= iv.hi)
    edges = np.array([b for iv in ivs for b in (iv.lo, iv.hi) if math.isfinite(b)])
    # grid points at an interval boundary are ties and may go either way
    near = np.zeros(len(ks), dtype=bool) if edges.size == 0 else \
        (np.abs(ks[:, None] - edges[None, :]) < 1e-9).any(axis=1)
    assert np.array_equal(solved[~near], inside[~near])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_optimum_beats_both_extremes(seed):
    rng = np.random.default_rng(seed)
    samples = [random_sample(rng) for _ in range(6)]
    k, count, _ = calibrate(samples)
    at_zero = sum(solved_at(s, 0.0) for s in samples)
    pure_contour = sum(s.correct[int(np.argmax(s.C))] for s in samples)
    assert count >= at_zero and count >= pure_contour
    assert sum(solved_at(s, k) for s in samples) == count


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_reordering_invariance(seed):
    rng = np.random.default_rng(seed)
    samples = [random_sample(rng) for _ in range(5)]
    shuffled = []
    for s in samples:
        p = rng.permutation(len(s.C))
        shuffled.append(TrainingSample(tuple(np.array(s.C)[p]), tuple(np.array(s.R)[p]),
                                       tuple(np.array(s.correct)[p].tolist())))
    assert calibrate(samples) == calibrate(shuffled)


def test_count_matches_grid_oracle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        samples = [random_sample(rng) for _ in range(int(rng.integers(1, 8)))]
        _, count, _ = calibrate(samples)
        ks = np.arange(0.0, max_breakpoint(samples) + 1.0, 1e-4)
        assert count == grid_solved_count(samples, ks).max()


def test_file_roundtrip(tmp_path):
    cal = Calibration(k=23.5, n_top=11, count=190, dataset_id="synthetic-seed-1")
    path = tmp_path / "cal.txt"
    write_calibration(path, cal)
    assert read_calibration(path) == cal
    flagged = Calibration(k=0.0, n_top=5, count=0, dataset_id="x", flagged=True)
    write_calibration(path, flagged)
    assert read_calibration(path) == flagged


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_calibration("version=1\nk 3\n")
    with pytest.raises(ValueError):
        parse_calibration("version=9\nk=1\nn_top=11\n")


def test_packaged_calibration():
    cal = default_calibration()
    assert cal.k > 0 and cal.n_top == 11 and cal.count > 0
    assert cal.dataset_id.startswith("synthetic-seed-")


def test_sample_validation():
    with pytest.raises(ValueError):
        TrainingSample((), (), ())
    with pytest.raises(ValueError):
        TrainingSample((1.0,), (1.0, 2.0), (True,))
