import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeqm.amplitudes.amplitude_engine import (
    Amplitude,
    BruteForcePaths,
    RecursiveDecompose,
    SigmaInsertion,
    TransferMatrix,
    amplitude,
    amplitude_bruteforce,
    amplitude_decomposed,
    consistency_check,
    evaluate,
    relative_deviation,
    strategy_label,
)
from latticeqm.errors import InvalidInputError, LatticeMismatchError, NonFiniteError, PathExplosionError
from latticeqm.lattice.lattice_core import (
    Event,
    Kernel,
    LatticeConfig,
    make_tight_binding_kernel,
    propagator,
    random_unitary_kernel,
)
from latticeqm.setups.setup_algebra import (
    FilterSpec,
    Setup,
    and_compose,
    decompose_at,
    insert_sigma,
    insert_sigma_everywhere,
    or_compose,
    random_and_pair,
    random_or_pair,
    random_setup,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture()
def ring3_kernel():
    yield make_tight_binding_kernel(LatticeConfig(3, 2, dt=0.3), hop=1.0, onsite=np.zeros(3))


class TestAmplitude:
    def test_value_type(self):
        z = Amplitude(1 + 2j) * Amplitude(2) + Amplitude(0.5)
        assert complex(z) == 2.5 + 4j
        assert abs(Amplitude(3 + 4j)) == 5.0
        with pytest.raises(NonFiniteError):
            Amplitude(complex(np.nan, 0))

    def test_single_site_lattice(self):
        k = Kernel([[1.0]])
        assert amplitude(Setup(Event(0, 0), Event(0, 9)), k).value == 1.0

    def test_path_enumeration_oracle(self, ring3_kernel):
        a = Setup(Event(0, 0), Event(0, 2), (FilterSpec(1, (1,)),))
        k = ring3_kernel.step
        assert amplitude(a, ring3_kernel).value == pytest.approx(k[0, 1] * k[1, 0], abs=1e-15)

    def test_bare_setup_is_propagator_element(self):
        k = random_unitary_kernel(4, seed=1)
        a = Setup(Event(2, 1), Event(3, 5))
        expected = propagator(k, 1, 5)[3, 2]
        assert amplitude(a, k).value == pytest.approx(expected, abs=1e-14)
        assert amplitude_bruteforce(a, k).value == pytest.approx(expected, abs=1e-14)

    def test_two_slit_sum_rule(self):
        k = random_unitary_kernel(6, seed=2)
        a = Setup(Event(0, 0), Event(3, 4), (FilterSpec(2, (1,)),))
        b = Setup(Event(0, 0), Event(3, 4), (FilterSpec(2, (4,)),))
        both = amplitude(or_compose(a, b), k).value
        assert relative_deviation(both, amplitude(a, k).value + amplitude(b, k).value) <= 1e-12

    def test_blocking_filter_gives_zero(self):
        k = random_unitary_kernel(4, seed=3)
        a = Setup(Event(0, 0), Event(1, 3), (FilterSpec(1, (), blocking=True),))
        assert amplitude(a, k).value == 0
        assert amplitude_bruteforce(a, k).value == 0

    def test_lattice_mismatch(self):
        with pytest.raises(LatticeMismatchError):
            amplitude(Setup(Event(0, 0), Event(5, 2)), random_unitary_kernel(4, seed=0))

    def test_path_explosion_guard(self):
        k = random_unitary_kernel(20, seed=0)
        with pytest.raises(PathExplosionError):
            amplitude_bruteforce(Setup(Event(0, 0), Event(0, 8)), k)

    def test_non_unitary_kernel_accepted(self):
        k = Kernel([[0.5, 2.0], [1.0j, 0.0]])
        a = Setup(Event(0, 0), Event(1, 3), (FilterSpec(1, (0, 1)),))
        assert relative_deviation(amplitude(a, k).value, amplitude_bruteforce(a, k).value) <= 1e-12


class TestStrategies:
    def test_decomposed_matches_product(self):
        k = random_unitary_kernel(5, seed=4)
        a = Setup(Event(0, 0), Event(2, 6), (FilterSpec(2, (3,)), FilterSpec(3, (0, 1)), FilterSpec(4, (4,))))
        earlier, later = decompose_at(a, 2)
        product = amplitude(earlier, k).value * amplitude(later, k).value
        assert relative_deviation(amplitude_decomposed(a, k, (2,)).value, product) <= 1e-12
        assert relative_deviation(amplitude_decomposed(a, k).value, amplitude(a, k).value) <= 1e-12

    def test_sigma_insertion_invariance(self):
        k = random_unitary_kernel(5, seed=5)
        a = Setup(Event(1, 0), Event(2, 4), (FilterSpec(2, (0, 3)),))
        assert relative_deviation(amplitude(insert_sigma(a, 1, 5), k).value, amplitude(a, k).value) <= 1e-12

    def test_evaluate_dispatch(self):
        k = random_unitary_kernel(4, seed=6)
        a = Setup(Event(1, 0), Event(2, 4), (FilterSpec(2, (3,)),))
        values = [evaluate(a, k, s).value for s in (TransferMatrix(), RecursiveDecompose(), SigmaInsertion())]
        values.append(evaluate(a, k, BruteForcePaths()).value)
        assert max(relative_deviation(values[0], z) for z in values) <= 1e-12
        with pytest.raises(InvalidInputError):
            evaluate(a, k, "transfer_matrix")

    def test_labels(self):
        assert strategy_label(TransferMatrix()) == "transfer_matrix"
        assert strategy_label(RecursiveDecompose((3, 1))) == "recursive_decompose@1,3"


class TestConsistencyCheck:
    def test_report(self):
        k = random_unitary_kernel(6, seed=8)
        a = random_setup(LatticeConfig(6, 5), 8, 4)
        report = consistency_check(a, k)
        assert set(report.values) == {"transfer_matrix", "recursive_decompose", "sigma_insertion", "bruteforce_paths"}
        assert len(report.deviations) == 6
        assert report.max_deviation == max(report.deviations.values())
        assert report.max_deviation <= 1e-10
        assert report.to_dict()["max_deviation"] == report.max_deviation

    def test_needs_two_strategies(self):
        with pytest.raises(InvalidInputError):
            consistency_check(Setup(Event(0, 0), Event(0, 2)), random_unitary_kernel(3), (TransferMatrix(),))

    def test_single_split_strategy(self):
        k = random_unitary_kernel(4, seed=9)
        a = Setup(Event(0, 0), Event(1, 3), (FilterSpec(1, (2,)),))
        report = consistency_check(a, k, (TransferMatrix(), RecursiveDecompose((1,))))
        assert report.max_deviation <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(seeds, st.integers(3, 5), st.integers(1, 5))
    def test_bruteforce_agrees(self, seed, num_sites, num_steps):
        config = LatticeConfig(num_sites, num_steps)
        k = random_unitary_kernel(num_sites, seed=seed)
        a = random_setup(config, seed, num_steps - 1)
        assert relative_deviation(amplitude(a, k).value, amplitude_bruteforce(a, k).value) <= 1e-10

    @settings(max_examples=200, deadline=None)
    @given(seeds)
    def test_sigma_everywhere(self, seed):
        k = random_unitary_kernel(6, seed=seed)
        a = random_setup(LatticeConfig(6, 6), seed, 5)
        assert relative_deviation(amplitude(insert_sigma_everywhere(a, 6), k).value, amplitude(a, k).value) <= 1e-12


class TestRules:
    @settings(max_examples=500, deadline=None)
    @given(seeds)
    def test_sum_rule(self, seed):
        k = random_unitary_kernel(8, seed=seed)
        a, b = random_or_pair(LatticeConfig(8, 6), seed)
        both = amplitude(or_compose(a, b), k).value
        assert relative_deviation(both, amplitude(a, k).value + amplitude(b, k).value) <= 1e-12

    @settings(max_examples=500, deadline=None)
    @given(seeds)
    def test_product_rule(self, seed):
        k = random_unitary_kernel(8, seed=seed)
        earlier, later = random_and_pair(LatticeConfig(8, 6), seed)
        joined = amplitude(and_compose(earlier, later), k).value
        assert relative_deviation(joined, amplitude(earlier, k).value * amplitude(later, k).value) <= 1e-12


class TestRelativeDeviation:
    def test_relative(self):
        assert relative_deviation(1.0, 1.0 + 1e-6) == pytest.approx(1e-6 / (1.0 + 1e-6))

    def test_absolute_near_zero(self):
        assert relative_deviation(1e-16, 3e-16) == pytest.approx(2e-16)

    def test_symmetric(self):
        assert relative_deviation(2 + 1j, 1j) == relative_deviation(1j, 2 + 1j)
