import logging

import numpy as np
import pytest

from latticeqm.decorators import record_time_usage
from latticeqm.errors import (
    CommandLineError,
    ConsistencyViolationError,
    DimensionMismatchError,
    InvalidInputError,
    LatticeMismatchError,
    LatticeqmError,
    NonFiniteError,
    NonMonotoneRegradeError,
    PathExplosionError,
    SizeGuardError,
    TimeOrderError,
    consistency_check_tolerance,
    dimension_check,
    finite_check,
    integer_check,
    site_range_check,
    size_guard_check,
    time_order_check,
)


class TestHierarchy:
    @pytest.mark.parametrize("error", [DimensionMismatchError, NonFiniteError, PathExplosionError, CommandLineError])
    def test_invalid_input(self, error):
        assert issubclass(error, InvalidInputError)
        assert issubclass(error, ValueError)

    def test_not_invalid_input(self):
        assert not issubclass(ConsistencyViolationError, InvalidInputError)
        assert not issubclass(NonMonotoneRegradeError, InvalidInputError)
        assert issubclass(ConsistencyViolationError, LatticeqmError)


class TestGuards:
    def test_finite_check(self):
        finite_check(np.ones(3), "x")
        with pytest.raises(NonFiniteError):
            finite_check(np.array([1.0, np.nan]), "x")

    def test_dimension_check(self):
        dimension_check(3, 3, "psi")
        with pytest.raises(DimensionMismatchError, match="psi"):
            dimension_check(2, 3, "psi")

    @pytest.mark.parametrize("t1, t2", [(-1, 2), (3, 2)])
    def test_time_order_check(self, t1, t2):
        with pytest.raises(TimeOrderError):
            time_order_check(t1, t2)

    def test_size_guard_check(self):
        size_guard_check(10, 10, "paths")
        with pytest.raises(SizeGuardError):
            size_guard_check(11, 10, "paths")
        with pytest.raises(PathExplosionError):
            size_guard_check(11, 10, "paths", error=PathExplosionError)

    @pytest.mark.parametrize("site", [-1, 4])
    def test_site_range_check(self, site):
        with pytest.raises(LatticeMismatchError):
            site_range_check(site, 4)

    def test_consistency_check_tolerance(self):
        consistency_check_tolerance(1e-12, 1e-10, "fuzz")
        with pytest.raises(ConsistencyViolationError) as e:
            consistency_check_tolerance(1e-9, 1e-10, "fuzz")
        assert e.value.deviation == 1e-9
        assert e.value.tolerance == 1e-10

    @pytest.mark.parametrize("value, expected", [(3, 3), (np.int64(4), 4), (2.0, 2), (np.float64(-1.0), -1)])
    def test_integer_check_accepts(self, value, expected):
        out = integer_check(value, "site")
        assert out == expected
        assert type(out) is int

    @pytest.mark.parametrize("value", [1.7, "1", None, True, np.bool_(False), float("inf"), [1]])
    def test_integer_check_rejects(self, value):
        with pytest.raises(InvalidInputError, match="site must be an integer"):
            integer_check(value, "site")


def test_record_time_usage(caplog):
    @record_time_usage
    def square(x, offset=0):
        return x * x + offset

    with caplog.at_level(logging.DEBUG, logger="lqm.decorators"):
        assert square(3, offset=1) == 10
    assert square.__name__ == "square"
    assert "Function square took" in caplog.text
