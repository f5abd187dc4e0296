import logging

import attrs
import numpy as np
from attrs import field, frozen

from latticeqm.errors import (
    DecompositionError,
    FilterPlacementError,
    InfeasibleSetupError,
    InvalidInputError,
    NonConsecutiveError,
    NotCombinableError,
    integer_check,
    site_range_check,
)
from latticeqm.lattice.lattice_core import Event, LatticeConfig

logger = logging.getLogger("lqm.setup_algebra")
logger.addHandler(logging.NullHandler())


def _sorted_holes(holes):
    return tuple(sorted({integer_check(h, "hole site") for h in holes}))


def _sorted_filters(filters):
    return tuple(sorted(filters, key=lambda f: f.time))


@frozen
class FilterSpec:
    """Instantaneous filter at `time` passing only the sites in `holes`.

    An empty hole set must be requested explicitly with `blocking=True`.
    """

    time: int = field(converter=lambda value: integer_check(value, "filter time"))
    holes: tuple = field(converter=_sorted_holes)
    blocking: bool = field(default=False)

    @holes.validator
    def _check_holes(self, attribute, value):
        if any(h < 0 for h in value):
            raise InvalidInputError(f"filter at t={self.time} has negative hole sites {value}")
        if not value and not self.blocking:
            raise InvalidInputError(f"filter at t={self.time} has no holes; pass blocking=True for a blocking filter")
        if value and self.blocking:
            raise InvalidInputError(f"blocking filter at t={self.time} cannot have holes")

    @property
    def single_hole(self):
        return len(self.holes) == 1


@frozen
class Setup:
    """Source event, time-ordered filters and detector event; stored in normalized form."""

    source: Event
    detector: Event
    filters: tuple = field(default=(), converter=_sorted_filters)

    @filters.validator
    def _check_filters(self, attribute, value):
        if self.source.time >= self.detector.time:
            raise InvalidInputError(
                f"source time {self.source.time} must precede detector time {self.detector.time}"
            )
        times = [f.time for f in value]
        if len(set(times)) != len(times):
            raise InvalidInputError(f"more than one filter at the same time: {times}")
        for t in times:
            if not self.source.time < t < self.detector.time:
                raise InvalidInputError(
                    f"filter time {t} not strictly between {self.source.time} and {self.detector.time}"
                )

    def filter_at(self, t):
        for f in self.filters:
            if f.time == t:
                return f
        return None

    @property
    def filter_times(self):
        return tuple(f.time for f in self.filters)

    def free_times(self):
        occupied = set(self.filter_times)
        return tuple(t for t in range(self.source.time + 1, self.detector.time) if t not in occupied)


def validate(setup: Setup, num_sites: int) -> Setup:
    """Check that every site named by the setup lies on a lattice of `num_sites` sites"""
    site_range_check(setup.source.site, num_sites, "source site")
    site_range_check(setup.detector.site, num_sites, "detector site")
    for f in setup.filters:
        for h in f.holes:
            site_range_check(h, num_sites, f"hole at t={f.time}")
    return setup


def equals(a: Setup, b: Setup) -> bool:
    return a == b


def and_compose(earlier: Setup, later: Setup) -> Setup:
    """Place `later` immediately after `earlier`; the shared event becomes a single-hole filter

    Raises:
        NonConsecutiveError: If earlier's detector is not later's source.
    """
    if earlier.detector != later.source:
        raise NonConsecutiveError(
            f"setups are not consecutive: earlier detector {earlier.detector} != later source {later.source}"
        )
    junction = FilterSpec(earlier.detector.time, (earlier.detector.site,))
    return Setup(earlier.source, later.detector, earlier.filters + (junction,) + later.filters)


def or_compose(a: Setup, b: Setup) -> Setup:
    """Merge two setups that differ only in the holes of one filter

    Raises:
        NotCombinableError: If the setups differ anywhere else, at more than one filter, or the
            differing hole sets overlap or are empty.
    """
    if a.source != b.source or a.detector != b.detector:
        raise NotCombinableError("setups with different source or detector cannot be or-combined")
    if a.filter_times != b.filter_times:
        raise NotCombinableError(f"filter times differ: {a.filter_times} vs {b.filter_times}")
    differing = [(fa, fb) for fa, fb in zip(a.filters, b.filters) if fa != fb]
    if len(differing) != 1:
        raise NotCombinableError(f"setups must differ at exactly one filter, found {len(differing)}")
    fa, fb = differing[0]
    if fa.blocking or fb.blocking:
        raise NotCombinableError(f"blocking filter at t={fa.time} cannot be or-combined")
    if set(fa.holes) & set(fb.holes):
        raise NotCombinableError(f"holes overlap at t={fa.time}: {fa.holes} and {fb.holes}")
    merged = FilterSpec(fa.time, fa.holes + fb.holes)
    return attrs.evolve(a, filters=tuple(merged if f.time == fa.time else f for f in a.filters))


def insert_sigma(a: Setup, t: int, num_sites: int) -> Setup:
    """Insert a filter whose holes cover the whole lattice, which is the same as no filter"""
    if not a.source.time < t < a.detector.time:
        raise FilterPlacementError(f"time {t} not strictly between {a.source.time} and {a.detector.time}")
    if a.filter_at(t) is not None:
        raise FilterPlacementError(f"setup already has a filter at t={t}")
    return attrs.evolve(a, filters=a.filters + (FilterSpec(t, range(num_sites)),))


def insert_sigma_everywhere(a: Setup, num_sites: int) -> Setup:
    sigmas = tuple(FilterSpec(t, range(num_sites)) for t in a.free_times())
    return attrs.evolve(a, filters=a.filters + sigmas)


def decompose_at(a: Setup, t: int):
    """Split a setup at a single-hole filter into (earlier, later) with and_compose(earlier, later) == a"""
    f = a.filter_at(t)
    if f is None:
        raise DecompositionError(f"no filter at t={t}")
    if not f.single_hole:
        raise DecompositionError(f"filter at t={t} has {len(f.holes)} holes, need exactly one")
    junction = Event(f.holes[0], t)
    earlier = Setup(a.source, junction, tuple(g for g in a.filters if g.time < t))
    later = Setup(junction, a.detector, tuple(g for g in a.filters if g.time > t))
    return earlier, later


def distribute_later(b: Setup, c: Setup, later: Setup):
    """Both sides of (b v c) later = (b later) v (c later), or None when either side is not allowed"""
    try:
        left = and_compose(or_compose(b, c), later)
        right = or_compose(and_compose(b, later), and_compose(c, later))
    except (NonConsecutiveError, NotCombinableError):
        return None
    return left, right


def distribute_earlier(earlier: Setup, b: Setup, c: Setup):
    """Both sides of earlier (b v c) = (earlier b) v (earlier c), or None when either side is not allowed"""
    try:
        left = and_compose(earlier, or_compose(b, c))
        right = or_compose(and_compose(earlier, b), and_compose(earlier, c))
    except (NonConsecutiveError, NotCombinableError):
        return None
    return left, right


def _random_filters(rng, num_sites, t_lo, t_hi, count):
    times = rng.choice(np.arange(t_lo + 1, t_hi), size=count, replace=False) if count else []
    filters = []
    for t in times:
        size = int(rng.integers(1, num_sites + 1))
        holes = rng.choice(num_sites, size=size, replace=False)
        filters.append(FilterSpec(int(t), holes))
    return tuple(filters)


def _random_between(rng, num_sites, source, detector, max_filters, min_filters=0):
    gap = detector.time - source.time
    if max_filters >= gap or min_filters > max_filters:
        raise InfeasibleSetupError(
            f"cannot place between {min_filters} and {max_filters} filters in {gap - 1} free time steps"
        )
    count = int(rng.integers(min_filters, max_filters + 1))
    return Setup(source, detector, _random_filters(rng, num_sites, source.time, detector.time, count))


def random_setup(config: LatticeConfig, rng_seed, max_filters: int, min_filters: int = 0) -> Setup:
    """Deterministic random setup from time 0 to time num_steps, for fuzzing

    Args:
        config (LatticeConfig): lattice to draw sites and times from.
        rng_seed (int): seed; equal seeds give equal setups.
        max_filters (int): largest number of filters, below num_steps.
        min_filters (int): smallest number of filters.

    Returns:
        Setup: valid setup with non-empty hole sets.

    Raises:
        InfeasibleSetupError: If max_filters >= num_steps.
    """
    rng = np.random.default_rng(rng_seed)
    source = Event(int(rng.integers(config.num_sites)), 0)
    detector = Event(int(rng.integers(config.num_sites)), config.num_steps)
    return _random_between(rng, config.num_sites, source, detector, max_filters, min_filters)


def random_or_pair(config: LatticeConfig, rng_seed):
    """Two setups that differ only by disjoint hole sets at one filter time"""
    if config.num_steps < 2:
        raise InfeasibleSetupError("or-pairs need at least one free time step")
    rng = np.random.default_rng(rng_seed)
    base = random_setup(config, rng.integers(2**32), config.num_steps - 1, min_filters=1)
    target = base.filters[int(rng.integers(len(base.filters)))]
    sites = rng.permutation(config.num_sites)[: int(rng.integers(2, config.num_sites + 1))]
    cut = int(rng.integers(1, len(sites)))
    pair = []
    for part in (sites[:cut], sites[cut:]):
        filters = tuple(FilterSpec(f.time, part) if f == target else f for f in base.filters)
        pair.append(attrs.evolve(base, filters=filters))
    return tuple(pair)


def random_and_pair(config: LatticeConfig, rng_seed):
    """Two consecutive setups (earlier, later) meeting at a random junction event"""
    if config.num_steps < 2:
        raise InfeasibleSetupError("and-pairs need at least one free time step")
    rng = np.random.default_rng(rng_seed)
    junction = Event(int(rng.integers(config.num_sites)), int(rng.integers(1, config.num_steps)))
    source = Event(int(rng.integers(config.num_sites)), 0)
    detector = Event(int(rng.integers(config.num_sites)), config.num_steps)
    earlier = _random_between(rng, config.num_sites, source, junction, junction.time - 1)
    later = _random_between(rng, config.num_sites, junction, detector, config.num_steps - junction.time - 1)
    return earlier, later
