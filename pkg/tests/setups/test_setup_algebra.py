import attrs
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeqm.errors import (
    DecompositionError,
    FilterPlacementError,
    InfeasibleSetupError,
    InvalidInputError,
    LatticeMismatchError,
    NonConsecutiveError,
    NotCombinableError,
)
from latticeqm.lattice.lattice_core import Event, LatticeConfig
from latticeqm.setups.setup_algebra import (
    FilterSpec,
    Setup,
    and_compose,
    decompose_at,
    distribute_earlier,
    distribute_later,
    equals,
    insert_sigma,
    insert_sigma_everywhere,
    or_compose,
    random_and_pair,
    random_or_pair,
    random_setup,
    validate,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture()
def two_slit():
    source = Event(0, 0)
    detector = Event(3, 4)
    a = Setup(source, detector, (FilterSpec(2, (1,)),))
    b = Setup(source, detector, (FilterSpec(2, (5,)),))
    yield a, b


def _split_filter(setup, rng, parts=2):
    """Split the holes of one multi-hole filter into `parts` disjoint pieces, or None"""
    wide = [f for f in setup.filters if len(f.holes) >= parts]
    if not wide:
        return None
    target = wide[int(rng.integers(len(wide)))]
    holes = rng.permutation(target.holes)
    cuts = sorted(rng.choice(np.arange(1, len(holes)), size=parts - 1, replace=False))
    pieces = np.split(holes, cuts)
    return tuple(
        attrs.evolve(setup, filters=tuple(FilterSpec(f.time, p) if f == target else f for f in setup.filters))
        for p in pieces
    )


class TestSetup:
    def test_normalized_form(self):
        a = Setup(Event(0, 0), Event(1, 5), (FilterSpec(3, (2, 0, 2)), FilterSpec(1, (4,))))
        assert a.filter_times == (1, 3)
        assert a.filter_at(3).holes == (0, 2)
        assert a.filter_at(2) is None
        assert a.free_times() == (2, 4)

    def test_hole_order_irrelevant(self):
        a = Setup(Event(0, 0), Event(0, 2), (FilterSpec(1, (1, 3)),))
        b = Setup(Event(0, 0), Event(0, 2), (FilterSpec(1, (3, 1)),))
        assert equals(a, a)
        assert equals(a, b)

    def test_one_hole_difference(self):
        a = Setup(Event(0, 0), Event(0, 2), (FilterSpec(1, (1,)),))
        b = Setup(Event(0, 0), Event(0, 2), (FilterSpec(1, (2,)),))
        assert not equals(a, b)

    @pytest.mark.parametrize(
        "filters",
        [
            (FilterSpec(0, (1,)),),
            (FilterSpec(4, (1,)),),
            (FilterSpec(2, (1,)), FilterSpec(2, (3,))),
        ],
    )
    def test_filter_times_checked(self, filters):
        with pytest.raises(InvalidInputError):
            Setup(Event(0, 0), Event(0, 4), filters)

    def test_source_before_detector(self):
        with pytest.raises(InvalidInputError):
            Setup(Event(0, 3), Event(0, 3))

    def test_empty_holes_need_blocking(self):
        with pytest.raises(InvalidInputError):
            FilterSpec(1, ())
        assert FilterSpec(1, (), blocking=True).holes == ()
        with pytest.raises(InvalidInputError):
            FilterSpec(1, (2,), blocking=True)

    def test_validate_against_lattice(self):
        a = Setup(Event(0, 0), Event(0, 3), (FilterSpec(1, (7,)),))
        assert validate(a, 8) is a
        with pytest.raises(LatticeMismatchError):
            validate(a, 7)


class TestAndCompose:
    def test_three_event_setup(self):
        earlier = Setup(Event(0, 0), Event(2, 1))
        later = Setup(Event(2, 1), Event(1, 3))
        joined = and_compose(earlier, later)
        assert joined == Setup(Event(0, 0), Event(1, 3), (FilterSpec(1, (2,)),))

    def test_filters_kept_in_order(self):
        earlier = Setup(Event(0, 0), Event(2, 3), (FilterSpec(1, (0, 1)),))
        later = Setup(Event(2, 3), Event(1, 6), (FilterSpec(5, (4,)),))
        assert and_compose(earlier, later).filter_times == (1, 3, 5)

    def test_non_consecutive(self):
        earlier = Setup(Event(0, 0), Event(2, 1))
        with pytest.raises(NonConsecutiveError):
            and_compose(earlier, Setup(Event(3, 1), Event(1, 3)))
        with pytest.raises(NonConsecutiveError):
            and_compose(earlier, Setup(Event(2, 2), Event(1, 3)))

    @settings(max_examples=200, deadline=None)
    @given(seeds, st.integers(3, 6), st.integers(2, 8))
    def test_never_commutative(self, seed, num_sites, num_steps):
        earlier, later = random_and_pair(LatticeConfig(num_sites, num_steps), seed)
        and_compose(earlier, later)
        with pytest.raises(NonConsecutiveError):
            and_compose(later, earlier)

    @settings(max_examples=50, deadline=None)
    @given(seeds)
    def test_associative(self, seed):
        rng = np.random.default_rng(seed)
        t1, t2 = sorted(rng.choice(np.arange(1, 8), size=2, replace=False))
        j1, j2 = Event(int(rng.integers(5)), int(t1)), Event(int(rng.integers(5)), int(t2))
        a = Setup(Event(int(rng.integers(5)), 0), j1)
        b = Setup(j1, j2)
        c = Setup(j2, Event(int(rng.integers(5)), 8), (FilterSpec(8 - 1, (0, 2)),) if t2 < 7 else ())
        assert and_compose(and_compose(a, b), c) == and_compose(a, and_compose(b, c))


class TestOrCompose:
    def test_two_slit(self, two_slit):
        a, b = two_slit
        both = or_compose(a, b)
        assert both.filter_at(2).holes == (1, 5)
        assert both.source == a.source
        assert both.detector == a.detector

    def test_commutative(self, two_slit):
        a, b = two_slit
        assert or_compose(a, b) == or_compose(b, a)

    def test_two_differences_rejected(self):
        a = Setup(Event(0, 0), Event(0, 4), (FilterSpec(1, (1,)), FilterSpec(2, (1,))))
        b = Setup(Event(0, 0), Event(0, 4), (FilterSpec(1, (2,)), FilterSpec(2, (2,))))
        with pytest.raises(NotCombinableError):
            or_compose(a, b)

    def test_overlap_rejected(self):
        a = Setup(Event(0, 0), Event(0, 4), (FilterSpec(1, (1, 2)),))
        b = Setup(Event(0, 0), Event(0, 4), (FilterSpec(1, (2, 3)),))
        with pytest.raises(NotCombinableError):
            or_compose(a, b)

    def test_identical_rejected(self, two_slit):
        a, _ = two_slit
        with pytest.raises(NotCombinableError):
            or_compose(a, a)

    def test_different_endpoints_rejected(self, two_slit):
        a, b = two_slit
        with pytest.raises(NotCombinableError):
            or_compose(a, attrs.evolve(b, detector=Event(2, 4)))

    def test_different_filter_times_rejected(self):
        a = Setup(Event(0, 0), Event(0, 4), (FilterSpec(1, (1,)),))
        b = Setup(Event(0, 0), Event(0, 4), (FilterSpec(2, (2,)),))
        with pytest.raises(NotCombinableError):
            or_compose(a, b)

    @settings(max_examples=50, deadline=None)
    @given(seeds)
    def test_associative(self, seed):
        rng = np.random.default_rng(seed)
        base = random_setup(LatticeConfig(8, 6), seed, 5, min_filters=1)
        base = attrs.evolve(base, filters=(FilterSpec(base.filters[0].time, range(8)),) + base.filters[1:])
        a, b, c = _split_filter(base, rng, parts=3)
        assert or_compose(or_compose(a, b), c) == or_compose(a, or_compose(b, c))
        assert or_compose(or_compose(a, b), c) == base


class TestSigma:
    def test_insert_sigma(self):
        a = Setup(Event(0, 0), Event(1, 2))
        s = insert_sigma(a, 1, 4)
        assert s.filter_at(1).holes == (0, 1, 2, 3)

    def test_sigma_everywhere(self):
        a = Setup(Event(0, 0), Event(1, 6), (FilterSpec(3, (2,)),))
        s = insert_sigma_everywhere(a, 4)
        assert s.filter_times == (1, 2, 3, 4, 5)
        assert s.filter_at(3).holes == (2,)
        assert len(insert_sigma_everywhere(Setup(Event(0, 0), Event(1, 6)), 4).filters) == 5

    @pytest.mark.parametrize("t", [0, 2, 3])
    def test_placement_errors(self, t):
        a = Setup(Event(0, 0), Event(1, 3), (FilterSpec(2, (0,)),))
        with pytest.raises(FilterPlacementError):
            insert_sigma(a, t, 4)


class TestDecompose:
    def test_split(self):
        a = Setup(Event(0, 0), Event(3, 2), (FilterSpec(1, (1,)),))
        earlier, later = decompose_at(a, 1)
        assert earlier == Setup(Event(0, 0), Event(1, 1))
        assert later == Setup(Event(1, 1), Event(3, 2))

    def test_round_trip(self):
        a = Setup(Event(0, 0), Event(3, 6), (FilterSpec(1, (0, 2)), FilterSpec(3, (4,)), FilterSpec(5, (1,))))
        for t in (3, 5):
            assert equals(and_compose(*decompose_at(a, t)), a)

    def test_errors(self):
        a = Setup(Event(0, 0), Event(3, 4), (FilterSpec(1, (0, 2)),))
        with pytest.raises(DecompositionError):
            decompose_at(a, 1)
        with pytest.raises(DecompositionError):
            decompose_at(a, 2)


def _shift(setup, dt):
    return Setup(
        Event(setup.source.site, setup.source.time + dt),
        Event(setup.detector.site, setup.detector.time + dt),
        tuple(FilterSpec(f.time + dt, f.holes) for f in setup.filters),
    )


class TestDistributivity:
    config = LatticeConfig(6, 4)

    @settings(max_examples=50, deadline=None)
    @given(seeds, seeds)
    def test_earlier_side(self, seed, other):
        b, c = (_shift(s, 4) for s in random_or_pair(self.config, seed))
        earlier = attrs.evolve(random_setup(self.config, other, 3), detector=b.source)
        left, right = distribute_earlier(earlier, b, c)
        assert left == right
        assert distribute_later(b, c, earlier) is None

    @settings(max_examples=50, deadline=None)
    @given(seeds, seeds)
    def test_later_side(self, seed, other):
        b, c = random_or_pair(self.config, seed)
        later = attrs.evolve(_shift(random_setup(self.config, other, 3), 4), source=b.detector)
        left, right = distribute_later(b, c, later)
        assert left == right
        assert distribute_earlier(later, b, c) is None


class TestRandomSetups:
    def test_deterministic(self):
        config = LatticeConfig(8, 6)
        assert random_setup(config, 42, 5) == random_setup(config, 42, 5)

    def test_no_filters(self):
        a = random_setup(LatticeConfig(8, 6), 3, 0)
        assert a.filters == ()
        assert (a.source.time, a.detector.time) == (0, 6)

    def test_infeasible(self):
        with pytest.raises(InfeasibleSetupError):
            random_setup(LatticeConfig(8, 6), 0, 6)
        with pytest.raises(InfeasibleSetupError):
            random_or_pair(LatticeConfig(8, 1), 0)

    def test_thousand_samples_valid(self):
        config = LatticeConfig(8, 6)
        for seed in range(1000):
            a = validate(random_setup(config, seed, 5), 8)
            assert all(f.holes for f in a.filters)

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_or_pair_is_combinable(self, seed):
        a, b = random_or_pair(LatticeConfig(5, 4), seed)
        both = or_compose(a, b)
        assert validate(both, 5) == or_compose(b, a)

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_and_pair_is_consecutive(self, seed):
        earlier, later = random_and_pair(LatticeConfig(5, 4), seed)
        joined = and_compose(earlier, later)
        assert (joined.source.time, joined.detector.time) == (0, 4)
        assert joined.filter_at(earlier.detector.time).holes == (earlier.detector.site,)
