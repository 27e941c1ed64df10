import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cab_ellipse.detector import Detection
from cab_ellipse.evaluation import (
    EvalWeights,
    RunReport,
    error_score,
    match,
    multiple_error,
    success_rate,
    summarize,
)
from cab_ellipse.geometry import EllipseParams, ellipse_through

T = EllipseParams(100, 100, 50, 30, 0.0)


def test_weights_defaults_and_validation():
    assert EvalWeights() == EvalWeights(0.05, 0.1, 0.2)
    with pytest.raises(ValueError):
        EvalWeights(0, 0.1, 0.2)


def test_identical_is_zero():
    assert error_score(T, T) == 0


def test_direct_substitution():
    d = ellipse_through(110, 110, 60, 40, np.radians(5))
    assert error_score(T, d) == pytest.approx(3.0)


def test_radius_tolerance_is_failure_boundary():
    d = EllipseParams(100, 100, 60, 40, 0.0)
    assert error_score(T, d) == pytest.approx(1.0)


def test_angle_wraps_at_180():
    a = ellipse_through(0, 0, 50, 20, np.radians(89))
    b = ellipse_through(0, 0, 50, 20, np.radians(-89))
    assert error_score(a, b) == pytest.approx(0.2 * 2)


def test_round_ellipses_ignore_angle():
    a = EllipseParams(0, 0, 50, 49.9, 0.0)
    b = EllipseParams(0, 0, 50, 49.9, 1.0)
    assert error_score(a, b) == 0


def test_exact_matches_give_zero_me():
    truths = [T, EllipseParams(300, 200, 40, 20, 0.5)]
    assert multiple_error(truths, list(reversed(truths))) == 0


def test_one_missed_is_failure():
    truths = [T, EllipseParams(300, 200, 40, 20, 0.5)]
    me = multiple_error(truths, [T])
    assert me == 1.0
    assert not RunReport([0.0, 2.0], me).success


def test_single_pair():
    d = EllipseParams(100, 100, 50, 30 + 6.2, 0.0)  # mean radius diff 3.1
    assert multiple_error([T], [d]) == pytest.approx(0.31)


def test_empty_truth_rejected():
    with pytest.raises(ValueError):
        multiple_error([], [T])


def test_accepts_detection_objects():
    assert multiple_error([T], [Detection(T, 0.9, 10)]) == 0


def test_greedy_tie_breaking():
    a = EllipseParams(0, 0, 10, 5, 0)
    b = EllipseParams(0, 0, 10, 5, 0)
    assert match([a, b], [a]) == [(0, 0, 0.0)]


def test_success_rate_examples():
    ok = RunReport([0.1], 0.1)
    bad = RunReport([2.0], 2.0)
    assert success_rate([ok] * 35) == 100
    assert success_rate([bad] * 10) == 0
    assert success_rate([ok] * 7 + [bad] * 3) == 70


def test_summarize_single_run_std_zero():
    s = summarize([RunReport([0.2], 0.2, runtime=1.5, seed=4)])
    assert s["ME_std"] == 0 and s["SR"] == 100
    assert s["per_run"] == [{"seed": 4, "ME": 0.2, "success": True, "runtime_s": 1.5}]
    assert summarize([RunReport([0.2], 0.2, runtime=1.5)], timing=False)["runtime_mean_s"] == 0


ellipses = st.builds(
    lambda x0, y0, r1, r2, th: ellipse_through(x0, y0, r1, r2, th),
    st.floats(0, 400),
    st.floats(0, 300),
    st.floats(5, 150),
    st.floats(5, 150),
    st.floats(-1.5, 1.5),
)


@settings(max_examples=200, deadline=None)
@given(ellipses, ellipses)
def test_es_symmetric_and_nonnegative(a, b):
    assert error_score(a, b) == pytest.approx(error_score(b, a))
    assert error_score(a, b) >= 0


@settings(max_examples=60, deadline=None)
@given(st.lists(ellipses, min_size=1, max_size=3), st.lists(ellipses, max_size=4), st.randoms())
def test_me_permutation_invariant(truths, dets, rnd):
    me = multiple_error(truths, dets)
    for _ in range(3):
        t2 = truths[:]
        d2 = dets[:]
        rnd.shuffle(t2)
        rnd.shuffle(d2)
        assert multiple_error(t2, d2) == pytest.approx(me)


@settings(max_examples=60, deadline=None)
@given(ellipses, st.lists(ellipses, min_size=1, max_size=3))
def test_duplicate_detection_increases_me(truth, dets):
    # one truth: it is already matched to its best detection, so a copy is pure surplus
    me = multiple_error([truth], dets)
    _, j, _ = match([truth], dets)[0]
    assert multiple_error([truth], dets + [dets[j]]) > me


def test_duplicate_of_matched_pair_in_full_scene():
    truths = [T, EllipseParams(300, 200, 40, 20, 0.5)]
    assert multiple_error(truths, truths + [T]) == pytest.approx(2.0 / 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=1, max_size=40))
def test_success_rate_bounds(mes):
    sr = success_rate([RunReport([m], m) for m in mes])
    assert 0 <= sr <= 100
