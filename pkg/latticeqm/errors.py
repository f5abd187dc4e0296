"""
Custom exceptions for latticeqm module
"""
import numpy as np


class LatticeqmError(Exception):
    pass


class InvalidInputError(LatticeqmError, ValueError):
    pass


class DimensionMismatchError(InvalidInputError):
    pass


class NonFiniteError(InvalidInputError):
    pass


class TimeOrderError(InvalidInputError):
    pass


class LatticeMismatchError(InvalidInputError):
    pass


class InfeasibleSetupError(InvalidInputError):
    pass


class SizeGuardError(InvalidInputError):
    pass


class PathExplosionError(SizeGuardError):
    pass


class NonConsecutiveError(InvalidInputError):
    pass


class NotCombinableError(InvalidInputError):
    pass


class DecompositionError(InvalidInputError):
    pass


class FilterPlacementError(InvalidInputError):
    pass


class NonAssociativeError(InvalidInputError):
    pass


class VanishingDerivativeError(InvalidInputError):
    pass


class CommandLineError(InvalidInputError):
    pass


class NonMonotoneRegradeError(LatticeqmError):
    pass


class DomainCoverageError(InvalidInputError):
    pass


class ConsistencyViolationError(LatticeqmError):
    """A computed deviation exceeded its stated tolerance."""

    def __init__(self, message, deviation=None, tolerance=None):
        super().__init__(message)
        self.deviation = deviation
        self.tolerance = tolerance


def finite_check(values, name):
    if np.all(np.isfinite(values)):
        return
    else:
        raise NonFiniteError(f"{name} contains non-finite entries")


def dimension_check(actual, expected, name):
    if actual == expected:
        return
    else:
        raise DimensionMismatchError(f"{name} has dimension {actual}, expected {expected}")


def time_order_check(t1, t2):
    if 0 <= t1 <= t2:
        return
    else:
        raise TimeOrderError(f"Times must satisfy 0 <= t1 <= t2, got t1={t1}, t2={t2}")


def size_guard_check(size, limit, name, error=SizeGuardError):
    if size <= limit:
        return
    else:
        raise error(f"{name} of size {size} exceeds the limit of {limit}")


def site_range_check(site, num_sites, name="site"):
    if 0 <= int(site) < num_sites:
        return
    else:
        raise LatticeMismatchError(f"{name} {site} outside lattice of {num_sites} sites")


def consistency_check_tolerance(deviation, tolerance, what):
    if deviation <= tolerance:
        return
    else:
        raise ConsistencyViolationError(
            f"{what}: deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}",
            deviation=deviation,
            tolerance=tolerance,
        )


def integer_check(value, name):
    """Return `value` as an int; only integral numbers are accepted"""
    if isinstance(value, (int, np.integer)) and not isinstance(value, (bool, np.bool_)):
        return int(value)
    elif isinstance(value, (float, np.floating)) and np.isfinite(value) and float(value).is_integer():
        return int(value)
    else:
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
