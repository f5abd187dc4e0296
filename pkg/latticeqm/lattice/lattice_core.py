import logging

import numpy as np
from attrs import field, frozen, validators
from scipy.stats import unitary_group

from latticeqm.config import (
    BOUNDARIES,
    DEFAULT_BOUNDARY,
    DEFAULT_DT,
    DEFAULT_HBAR,
    MAX_SERIES_TERMS,
    NORMALIZATION_TOLERANCE,
    SERIES_SCALING_NORM,
    SERIES_TERM_TOLERANCE,
    UNITARY_TOLERANCE,
)
from latticeqm.errors import (
    DimensionMismatchError,
    InvalidInputError,
    NonFiniteError,
    dimension_check,
    finite_check,
    integer_check,
    site_range_check,
    time_order_check,
)

logger = logging.getLogger("lqm.lattice_core")
logger.addHandler(logging.NullHandler())


def _frozen_array(dtype):
    def convert(values):
        arr = np.array(values, dtype=dtype, copy=True)
        arr.setflags(write=False)
        return arr

    return convert


def _integer(name):
    return lambda value: integer_check(value, name)


def _positive(instance, attribute, value):
    if not value > 0:
        raise InvalidInputError(f"{attribute.name} must be positive, got {value}")


@frozen
class LatticeConfig:
    """Discrete arena of `num_sites` sites and time indices 0..num_steps.

    Ring lattices need at least three sites; open lattices accept any positive size.
    """

    num_sites: int = field(converter=_integer("num_sites"))
    num_steps: int = field(converter=_integer("num_steps"))
    dt: float = field(default=DEFAULT_DT, converter=float, validator=_positive)
    hbar: float = field(default=DEFAULT_HBAR, converter=float, validator=_positive)
    boundary: str = field(default=DEFAULT_BOUNDARY, validator=validators.in_(BOUNDARIES))

    @num_sites.validator
    def _check_sites(self, attribute, value):
        minimum = 3 if self.boundary == "ring" else 1
        if value < minimum:
            raise InvalidInputError(f"{self.boundary} lattice needs at least {minimum} sites, got {value}")

    @num_steps.validator
    def _check_steps(self, attribute, value):
        if value < 1:
            raise InvalidInputError(f"num_steps must be at least 1, got {value}")

    def event(self, site, time):
        event = Event(site, time)
        site_range_check(event.site, self.num_sites)
        if not 0 <= event.time <= self.num_steps:
            raise InvalidInputError(f"time {event.time} outside [0, {self.num_steps}]")
        return event


@frozen(order=True)
class Event:
    site: int = field(converter=_integer("site"))
    time: int = field(converter=_integer("time"))


@frozen(eq=False)
class Kernel:
    """Single-time-step transition matrix; entry [to, from] is the elementary amplitude of one step."""

    step: np.ndarray = field(converter=_frozen_array(complex))
    label: str = field(default="kernel")

    @step.validator
    def _check_step(self, attribute, value):
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise DimensionMismatchError(f"kernel step must be square, got shape {value.shape}")
        finite_check(value, "kernel step")

    @property
    def size(self):
        return self.step.shape[0]

    def unitarity_error(self):
        return float(np.max(np.abs(self.step.conj().T @ self.step - np.eye(self.size))))

    def is_unitary(self, tol=UNITARY_TOLERANCE):
        return self.unitarity_error() <= tol


@frozen(eq=False)
class WaveFunction:
    coeffs: np.ndarray = field(converter=_frozen_array(complex))
    time: int = field(default=0, converter=_integer("time"))
    normalized: bool = field(default=False)

    @coeffs.validator
    def _check_coeffs(self, attribute, value):
        if value.ndim != 1:
            raise DimensionMismatchError(f"wave function must be a vector, got shape {value.shape}")
        finite_check(value, "wave function")

    @normalized.validator
    def _check_normalized(self, attribute, value):
        if value and abs(float(np.vdot(self.coeffs, self.coeffs).real) - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidInputError("wave function flagged normalized does not have unit norm")

    @property
    def size(self):
        return self.coeffs.shape[0]

    def probabilities(self):
        return np.abs(self.coeffs) ** 2


def expm_taylor(a, tol=SERIES_TERM_TOLERANCE):
    """Matrix exponential by scaling and squaring of the truncated Taylor series.

    The matrix is scaled by 2**-s until its 1-norm is at most SERIES_SCALING_NORM, the series is
    summed until a term falls below `tol` relative to the partial sum, and the result is squared s times.

    Args:
        a (np.ndarray): square complex matrix.
        tol (float): relative size of the last series term kept.

    Returns:
        np.ndarray: exp(a).
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = int(np.ceil(np.log2(norm / SERIES_SCALING_NORM))) if norm > SERIES_SCALING_NORM else 0
    scaled = a / (2.0**squarings)
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, MAX_SERIES_TERMS + 1):
        term = term @ scaled / j
        result = result + term
        if np.max(np.abs(term)) <= tol * np.max(np.abs(result)):
            break
    else:
        logger.warning(f"expm_taylor: series not converged after {MAX_SERIES_TERMS} terms")
    for _ in range(squarings):
        result = result @ result
    logger.debug(f"expm_taylor: n={n}, norm={norm:.3e}, squarings={squarings}, terms={j}")
    return result


def tight_binding_hamiltonian(config: LatticeConfig, hop: complex, onsite) -> np.ndarray:
    num_sites = config.num_sites
    onsite = np.asarray(onsite, dtype=float)
    dimension_check(onsite.shape, (num_sites,), "onsite")
    finite_check(onsite, "onsite")
    hop = complex(hop)
    if not np.isfinite(hop):
        raise NonFiniteError(f"hop {hop} is not finite")
    ham = np.diag(onsite).astype(complex)
    for i in range(num_sites - 1):
        ham[i, i + 1] += hop
        ham[i + 1, i] += np.conj(hop)
    if config.boundary == "ring":
        ham[num_sites - 1, 0] += hop
        ham[0, num_sites - 1] += np.conj(hop)
    return ham


def make_tight_binding_kernel(config: LatticeConfig, hop: complex, onsite) -> Kernel:
    """Nearest-neighbour hopping kernel K = exp(-i H dt / hbar)

    Args:
        config (LatticeConfig): lattice size, dt, hbar and boundary.
        hop (complex): coupling on the bond i -> i+1 (its conjugate on the reverse bond).
        onsite (array-like): real onsite energies, one per site.

    Returns:
        Kernel: unitary step kernel.

    Example:
        `k = make_tight_binding_kernel(LatticeConfig(4, 6), hop=0.7, onsite=[0, 0.5, 0, 0.5])`
    """
    ham = tight_binding_hamiltonian(config, hop, onsite)
    step = expm_taylor(-1j * ham * config.dt / config.hbar)
    kernel = Kernel(step, label=f"tight-binding(L={config.num_sites}, hop={hop}, {config.boundary})")
    logger.debug(f"{kernel.label}: unitarity error {kernel.unitarity_error():.2e}")
    return kernel


def random_unitary_kernel(num_sites: int, seed=None) -> Kernel:
    step = unitary_group.rvs(num_sites, random_state=np.random.default_rng(seed))
    return Kernel(step, label=f"haar(L={num_sites}, seed={seed})")


def hole_mask(num_sites, holes) -> np.ndarray:
    mask = np.zeros(num_sites)
    for site in holes:
        site_range_check(site, num_sites, "hole")
        mask[int(site)] = 1.0
    return mask


def masked_kernel(k: Kernel, holes) -> Kernel:
    """Kernel followed by a filter that only passes `holes`: M K, generally not unitary"""
    mask = hole_mask(k.size, holes)
    return Kernel(mask[:, None] * k.step, label=f"masked({k.label})")


def propagator(kernel: Kernel, t1: int, t2: int) -> np.ndarray:
    """Amplitude matrix from time t1 to t2, the (t2 - t1)-fold composition of the kernel"""
    time_order_check(t1, t2)
    return np.linalg.matrix_power(kernel.step, t2 - t1)


def point_state(num_sites: int, site: int, time: int = 0) -> WaveFunction:
    site_range_check(site, num_sites)
    coeffs = np.zeros(num_sites, dtype=complex)
    coeffs[site] = 1.0
    return WaveFunction(coeffs, time=time, normalized=True)


def random_wave_function(num_sites: int, seed=None, time: int = 0) -> WaveFunction:
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=num_sites) + 1j * rng.normal(size=num_sites)
    return normalize(WaveFunction(coeffs, time=time))


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    dimension_check(b.size, a.size, "second wave function")
    return complex(np.vdot(a.coeffs, b.coeffs))


def norm_sq(a: WaveFunction) -> float:
    return float(np.vdot(a.coeffs, a.coeffs).real)


def normalize(a: WaveFunction) -> WaveFunction:
    norm = norm_sq(a)
    if norm <= 0.0:
        raise InvalidInputError("cannot normalize the zero wave function")
    return WaveFunction(a.coeffs / np.sqrt(norm), time=a.time, normalized=True)
