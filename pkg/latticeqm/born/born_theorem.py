import logging
import math
from functools import reduce

import numpy as np
import polars as pl
from attrs import field, frozen
from scipy.special import gammaln, ndtr, xlog1py, xlogy

from latticeqm.composite.composite_systems import product_state
from latticeqm.config import BORN_DIRECT_MAX_REPLICAS, PRODUCT_STATE_LIMIT, WINDOW_ROUNDING_SLACK
from latticeqm.decorators import record_time_usage
from latticeqm.errors import InvalidInputError, site_range_check, size_guard_check
from latticeqm.io_utils import frame_output
from latticeqm.lattice.lattice_core import WaveFunction

logger = logging.getLogger("lqm.born_theorem")
logger.addHandler(logging.NullHandler())


def _unit_interval(instance, attribute, value):
    if not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{attribute.name} must lie in [0, 1], got {value}")


@frozen
class ProjectorWindow:
    """Inclusive range [n_min, n_max] of replica counts at the detected site passed by the projector filter"""

    n_min: int = field(converter=int)
    n_max: int = field(converter=int)

    @property
    def empty(self):
        return self.n_min > self.n_max

    def check(self, N):
        if not 0 <= self.n_min <= N or not 0 <= self.n_max <= N:
            raise InvalidInputError(f"window [{self.n_min}, {self.n_max}] outside [0, {N}]")
        return self


@frozen
class BornExperiment:
    """Detection probability p = |A_k|^2, replica count N, target fraction f and half-width epsilon"""

    p: float = field(converter=float, validator=_unit_interval)
    N: int = field(converter=int)
    f: float = field(converter=float, validator=_unit_interval)
    epsilon: float = field(converter=float)

    @N.validator
    def _check_n(self, attribute, value):
        if value < 1:
            raise InvalidInputError(f"N must be a positive integer, got {value}")

    @epsilon.validator
    def _check_epsilon(self, attribute, value):
        if value < 0 or not math.isfinite(value):
            raise InvalidInputError(f"epsilon must be a non-negative finite number, got {value}")
        if self.f + value < 0.0 or self.f - value > 1.0:
            raise InvalidInputError(f"window [{self.f - value}, {self.f + value}] misses [0, 1]")

    @classmethod
    def from_wave_function(cls, psi: WaveFunction, k_site: int, N: int, f: float, epsilon: float):
        return cls(born_probability(psi, k_site), N, f, epsilon)

    @property
    def window(self):
        return projector_window(self.f, self.epsilon, self.N)

    @property
    def sigma(self):
        return math.sqrt(self.p * (1.0 - self.p) / self.N)


def born_probability(psi: WaveFunction, k_site: int) -> float:
    """|A_k|^2 of a normalized wave function"""
    if not psi.normalized:
        raise InvalidInputError("born_probability needs a wave function flagged normalized")
    site_range_check(k_site, psi.size)
    return float(abs(psi.coeffs[k_site]) ** 2)


def projector_window(f: float, epsilon: float, N: int) -> ProjectorWindow:
    """n_min = ceil((f - eps) N), n_max = floor((f + eps) N), clipped to [0, N]

    A slack of WINDOW_ROUNDING_SLACK keeps products such as 0.38 * 100 = 37.99999... on the intended integer.
    """
    lo = math.ceil((f - epsilon) * N - WINDOW_ROUNDING_SLACK)
    hi = math.floor((f + epsilon) * N + WINDOW_ROUNDING_SLACK)
    return ProjectorWindow(min(max(lo, 0), N), min(max(hi, 0), N))


def _log_binomial_terms(p, N, n):
    return gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1) + xlogy(n, p) + xlog1py(N - n, -p)


def window_mass(p: float, N: int, window: ProjectorWindow) -> float:
    """Binomial mass sum_{n in window} C(N, n) p^n (1 - p)^(N - n), in log space with compensated summation"""
    window.check(N)
    if window.empty:
        return 0.0
    n = np.arange(window.n_min, window.n_max + 1, dtype=float)
    terms = np.exp(_log_binomial_terms(p, N, n))
    return min(max(math.fsum(terms), 0.0), 1.0)


def overlap_exact(e: BornExperiment) -> float:
    """(Psi_N, P Psi_N) for the fraction-window projector, as an exact binomial sum

    Example:
        `overlap_exact(BornExperiment(p=0.36, N=10_000, f=0.36, epsilon=0.02))`
    """
    return window_mass(e.p, e.N, e.window)


def deviation_norm(e: BornExperiment) -> float:
    """|P Psi_N - Psi_N|^2 = 1 - (Psi_N, P Psi_N), since the filter is a projector"""
    return 1.0 - overlap_exact(e)


def overlap_gaussian(e: BornExperiment) -> float:
    """Gaussian limit: mass of N(p, p(1 - p)/N) on [f - eps, f + eps]"""
    if e.p in (0.0, 1.0):
        raise InvalidInputError(f"the Gaussian limit is degenerate for p = {e.p}")
    upper = (e.f + e.epsilon - e.p) / e.sigma
    lower = (e.f - e.epsilon - e.p) / e.sigma
    # difference of upper tails loses less precision when both bounds sit above the mean
    if lower > 0:
        return float(ndtr(-lower) - ndtr(-upper))
    return float(ndtr(upper) - ndtr(lower))


def hoeffding_bound(N: int, f: float, p: float, epsilon: float) -> float:
    """2 exp(-2 N (eps - |f - p|)^2), an upper bound on deviation_norm when |f - p| < eps"""
    margin = epsilon - abs(f - p)
    if margin <= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-2.0 * N * margin**2))


def small_N_direct(psi: WaveFunction, k_site: int, window: ProjectorWindow, N: int) -> float:
    """Literal configuration-space overlap for N replicas of psi

    Builds the N-fold product state, counts at every configuration how many replicas sit at `k_site`,
    keeps the components whose count lies in the window and sums their squared moduli.

    Raises:
        SizeGuardError: If N exceeds BORN_DIRECT_MAX_REPLICAS or L**N exceeds PRODUCT_STATE_LIMIT.
    """
    if not psi.normalized:
        raise InvalidInputError("small_N_direct needs a wave function flagged normalized")
    site_range_check(k_site, psi.size)
    size_guard_check(N, BORN_DIRECT_MAX_REPLICAS, "replica count")
    size_guard_check(psi.size**N, PRODUCT_STATE_LIMIT, "configuration space")
    window.check(N)
    state = product_state([psi] * N)
    at_site = (np.arange(psi.size) == k_site).astype(int)
    counts = reduce(np.add.outer, [at_site] * N)
    passed = (counts >= window.n_min) & (counts <= window.n_max)
    return float(np.vdot(state, passed * state).real)


@record_time_usage
def convergence_scan(p: float, f: float, epsilon: float, N_list, return_as_pandas=False) -> pl.DataFrame:
    """convergence_scan - overlap and deviation of the fraction-window projector as N grows

    Args:
        p (float): |A_k|^2.
        f (float): target fraction.
        epsilon (float): window half-width.
        N_list (list): ascending replica counts.
        return_as_pandas (bool): If True, returns a pandas dataframe. If False, returns a polars dataframe.

    Returns:
        pl.DataFrame: columns N, overlap_exact, overlap_gaussian (null for p in {0, 1}), deviation_norm.

    Example:
        `df = latticeqm.born.convergence_scan(0.36, 0.36, 0.02, [100, 1000, 10000])`
    """
    N_list = [int(n) for n in N_list]
    if N_list != sorted(N_list):
        raise InvalidInputError(f"N_list must be ascending, got {N_list}")
    rows = {"N": [], "overlap_exact": [], "overlap_gaussian": [], "deviation_norm": []}
    for N in N_list:
        e = BornExperiment(p, N, f, epsilon)
        exact = overlap_exact(e)
        rows["N"].append(N)
        rows["overlap_exact"].append(exact)
        rows["overlap_gaussian"].append(None if p in (0.0, 1.0) else overlap_gaussian(e))
        rows["deviation_norm"].append(1.0 - exact)
        logger.debug(f"convergence_scan: N={N}, window={e.window}, overlap={exact:.15g}")
    schema = {"N": pl.Int64, "overlap_exact": pl.Float64, "overlap_gaussian": pl.Float64, "deviation_norm": pl.Float64}
    return frame_output(pl.DataFrame(rows, schema=schema), return_as_pandas)
