import itertools
import logging
import math
from functools import reduce

import numpy as np
from attrs import field, frozen

from latticeqm.config import BRUTEFORCE_CHUNK, BRUTEFORCE_PATH_LIMIT, NEAR_ZERO_AMPLITUDE, TINY_SCALE
from latticeqm.errors import InvalidInputError, NonFiniteError, PathExplosionError, size_guard_check
from latticeqm.lattice.lattice_core import Kernel, hole_mask
from latticeqm.setups.setup_algebra import Setup, decompose_at, insert_sigma_everywhere, validate

logger = logging.getLogger("lqm.amplitude_engine")
logger.addHandler(logging.NullHandler())


@frozen
class Amplitude:
    value: complex = field(converter=complex)

    @value.validator
    def _check_value(self, attribute, value):
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise NonFiniteError(f"amplitude {value} is not finite")

    def __add__(self, other):
        return Amplitude(self.value + other.value)

    def __mul__(self, other):
        return Amplitude(self.value * other.value)

    def __complex__(self):
        return self.value

    def __abs__(self):
        return abs(self.value)


@frozen
class TransferMatrix:
    name = "transfer_matrix"


@frozen
class RecursiveDecompose:
    """Product rule at the given single-hole filter times; an empty tuple means every single-hole filter"""

    split_times: tuple = field(default=(), converter=lambda ts: tuple(sorted(int(t) for t in ts)))
    name = "recursive_decompose"


@frozen
class SigmaInsertion:
    name = "sigma_insertion"


@frozen
class BruteForcePaths:
    name = "bruteforce_paths"


DEFAULT_STRATEGIES = (TransferMatrix(), RecursiveDecompose(), SigmaInsertion(), BruteForcePaths())


@frozen
class ConsistencyReport:
    values: dict
    deviations: dict
    max_deviation: float

    def to_dict(self):
        return {
            "values": {k: [v.real, v.imag] for k, v in self.values.items()},
            "deviations": dict(self.deviations),
            "max_deviation": self.max_deviation,
        }


def amplitude(a: Setup, k: Kernel) -> Amplitude:
    """Amplitude of a setup by transfer matrices: kernel steps between filters, 0/1 hole masks at filters

    Args:
        a (Setup): setup whose sites lie on the kernel's lattice.
        k (Kernel): single-step kernel.

    Returns:
        Amplitude: <detector| K^(gap) M_N ... M_1 K^(gap) |source>.

    Raises:
        LatticeMismatchError: If a site of the setup is outside the kernel's lattice.
    """
    validate(a, k.size)
    state = np.zeros(k.size, dtype=complex)
    state[a.source.site] = 1.0
    t = a.source.time
    for f in a.filters:
        state = np.linalg.matrix_power(k.step, f.time - t) @ state
        state = hole_mask(k.size, f.holes) * state
        t = f.time
    state = np.linalg.matrix_power(k.step, a.detector.time - t) @ state
    return Amplitude(state[a.detector.site])


def _sites_per_time(a: Setup, num_sites):
    sites = []
    for t in range(a.source.time + 1, a.detector.time):
        f = a.filter_at(t)
        sites.append(np.arange(num_sites) if f is None else np.asarray(f.holes, dtype=int))
    return sites


def amplitude_bruteforce(a: Setup, k: Kernel) -> Amplitude:
    """Literal sum over every site sequence threading all holes, weighted by products of kernel entries

    Raises:
        PathExplosionError: If the number of paths exceeds BRUTEFORCE_PATH_LIMIT.
    """
    validate(a, k.size)
    sites = _sites_per_time(a, k.size)
    shape = tuple(len(s) for s in sites)
    num_paths = reduce(lambda x, y: x * y, shape, 1)
    size_guard_check(num_paths, BRUTEFORCE_PATH_LIMIT, "path enumeration", PathExplosionError)
    if num_paths == 0:
        return Amplitude(0.0)
    step = k.step
    partial_sums = []
    for start in range(0, num_paths, BRUTEFORCE_CHUNK):
        index = np.arange(start, min(start + BRUTEFORCE_CHUNK, num_paths))
        coords = np.unravel_index(index, shape) if shape else ()
        columns = [np.full(index.shape, a.source.site)]
        columns += [s[c] for s, c in zip(sites, coords)]
        columns.append(np.full(index.shape, a.detector.site))
        paths = np.stack(columns, axis=1)
        weights = np.prod(step[paths[:, 1:], paths[:, :-1]], axis=1)
        partial_sums.append(np.sum(weights))
    logger.debug(f"bruteforce: {num_paths} paths in {len(partial_sums)} chunks")
    return Amplitude(np.sum(partial_sums))


def amplitude_decomposed(a: Setup, k: Kernel, split_times=()) -> Amplitude:
    """Product of the amplitudes of the consecutive pieces obtained by splitting at single-hole filters"""
    if not split_times:
        split_times = tuple(f.time for f in a.filters if f.single_hole)
    pieces = []
    rest = a
    for t in sorted(split_times):
        earlier, rest = decompose_at(rest, t)
        pieces.append(earlier)
    pieces.append(rest)
    return reduce(lambda x, y: x * y, (amplitude(p, k) for p in pieces))


def evaluate(a: Setup, k: Kernel, strategy) -> Amplitude:
    if isinstance(strategy, TransferMatrix):
        return amplitude(a, k)
    if isinstance(strategy, RecursiveDecompose):
        return amplitude_decomposed(a, k, strategy.split_times)
    if isinstance(strategy, SigmaInsertion):
        return amplitude(insert_sigma_everywhere(a, k.size), k)
    if isinstance(strategy, BruteForcePaths):
        return amplitude_bruteforce(a, k)
    raise InvalidInputError(f"unknown evaluation strategy {strategy!r}")


def relative_deviation(z1: complex, z2: complex) -> float:
    """|z1 - z2| relative to the larger modulus; absolute when both are below NEAR_ZERO_AMPLITUDE"""
    z1, z2 = complex(z1), complex(z2)
    scale = max(abs(z1), abs(z2))
    if scale < NEAR_ZERO_AMPLITUDE:
        return abs(z1 - z2)
    return abs(z1 - z2) / max(scale, TINY_SCALE)


def strategy_label(strategy):
    if isinstance(strategy, RecursiveDecompose) and strategy.split_times:
        return f"{strategy.name}@{','.join(str(t) for t in strategy.split_times)}"
    return strategy.name


def consistency_check(a: Setup, k: Kernel, strategies=DEFAULT_STRATEGIES) -> ConsistencyReport:
    """Evaluate a setup under several strategies and report the pairwise relative deviations

    Deviations are reported, never raised; callers decide whether a breach is fatal.
    """
    if len(strategies) < 2:
        raise InvalidInputError("consistency_check needs at least two strategies")
    values = {}
    for strategy in strategies:
        values[strategy_label(strategy)] = evaluate(a, k, strategy).value
    deviations = {}
    for (n1, z1), (n2, z2) in itertools.combinations(values.items(), 2):
        deviations[f"{n1}|{n2}"] = relative_deviation(z1, z2)
    max_deviation = max(deviations.values())
    logger.debug(f"consistency_check: max deviation {max_deviation:.3e} over {len(values)} strategies")
    return ConsistencyReport(values, deviations, max_deviation)
