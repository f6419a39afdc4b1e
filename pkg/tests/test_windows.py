"""Sliding-window construction over residual series."""

import pytest

from rnnp.windows import make_windows


def rows(n):
    return [[float(i)] for i in range(n)]


class TestMakeWindows:
    def test_boundary_single_window(self):
        w = make_windows(rows(49), list(range(49)), tau=49)
        assert len(w) == 1
        assert w[0].target == 48

    def test_count_arithmetic(self):
        w = make_windows(rows(52), list(range(52)), tau=49)
        assert len(w) == 4

    def test_four_calendar_years_window_count(self):
        # 2007-2010 spans 35064 hours (2008 is a leap year).
        n = 35064
        shared = [0.0]
        features = [shared] * n
        w = make_windows(features, [0.0] * n, tau=49)
        assert len(w) == n - 49 + 1 == 35016

    def test_window_contents(self):
        w = make_windows(rows(6), [10.0, 11.0, 12.0, 13.0, 14.0, 15.0], tau=3)
        assert len(w) == 4
        assert w[0].xs == [[0.0], [1.0], [2.0]]
        assert w[0].target == 12.0
        assert w[-1].xs == [[3.0], [4.0], [5.0]]
        assert w[-1].target == 15.0

    def test_stride(self):
        w = make_windows(rows(10), list(range(10)), tau=3, stride=4)
        assert [win.target for win in w] == [2, 6]

    def test_rows_shared_not_copied(self):
        features = rows(5)
        w = make_windows(features, list(range(5)), tau=2)
        assert w[0].xs[1] is features[1]
        assert w[1].xs[0] is features[1]

    def test_too_short_series(self):
        with pytest.raises(ValueError, match="shorter than tau"):
            make_windows(rows(3), [0.0] * 3, tau=4)

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            make_windows(rows(5), [0.0] * 4, tau=2)

    def test_bad_tau_and_stride(self):
        with pytest.raises(ValueError):
            make_windows(rows(3), [0.0] * 3, tau=0)
        with pytest.raises(ValueError):
            make_windows(rows(3), [0.0] * 3, tau=2, stride=0)
