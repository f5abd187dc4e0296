import logging

import numpy as np
import polars as pl
from tqdm import tqdm

from latticeqm.amplitudes.amplitude_engine import (
    DEFAULT_STRATEGIES,
    amplitude,
    amplitude_decomposed,
    consistency_check,
    relative_deviation,
)
from latticeqm.decorators import record_time_usage
from latticeqm.io_utils import frame_output
from latticeqm.lattice.lattice_core import LatticeConfig, random_unitary_kernel
from latticeqm.setups.setup_algebra import (
    and_compose,
    or_compose,
    random_and_pair,
    random_or_pair,
    random_setup,
)

logger = logging.getLogger("lqm.amplitude_fuzz")
logger.addHandler(logging.NullHandler())


def sample_seeds(seed: int, count: int):
    """Deterministic per-sample seeds derived from one master seed"""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def sum_rule_deviation(config: LatticeConfig, kernel, rng_seed) -> float:
    a, b = random_or_pair(config, rng_seed)
    both = amplitude(or_compose(a, b), kernel).value
    return relative_deviation(both, amplitude(a, kernel).value + amplitude(b, kernel).value)


def product_rule_deviation(config: LatticeConfig, kernel, rng_seed) -> float:
    earlier, later = random_and_pair(config, rng_seed)
    joined = amplitude(and_compose(earlier, later), kernel).value
    return relative_deviation(joined, amplitude(earlier, kernel).value * amplitude(later, kernel).value)


def single_split_deviation(setup, kernel) -> float:
    """Largest deviation between the transfer matrix and a split at any one single-hole filter; 0 without one"""
    reference = amplitude(setup, kernel).value
    deviations = [
        relative_deviation(reference, amplitude_decomposed(setup, kernel, (f.time,)).value)
        for f in setup.filters
        if f.single_hole
    ]
    return max(deviations, default=0.0)


@record_time_usage
def fuzz_consistency(
    seed: int,
    count: int,
    num_sites: int,
    num_steps: int,
    strategies=DEFAULT_STRATEGIES,
    rules=True,
    single_splits=True,
    show_progress=False,
    return_as_pandas=False,
) -> pl.DataFrame:
    """fuzz_consistency - evaluate random setups under every strategy and record the deviations

    Each sample draws its own Haar-random kernel and setup from a seed derived from `seed`. With
    `rules=True` every sample also contributes a random legal or-pair (sum rule) and and-pair
    (product rule).

    Args:
        seed (int): master seed.
        count (int): number of samples.
        num_sites (int): lattice size L.
        num_steps (int): time steps T; setups run from time 0 to T.
        strategies (tuple): evaluation strategies compared pairwise.
        rules (bool): include `sum_rule` and `product_rule` rows.
        single_splits (bool): include a `single_splits` row comparing each single-hole split on its own.
        show_progress (bool): show a tqdm progress bar.
        return_as_pandas (bool): If True, returns a pandas dataframe. If False, returns a polars dataframe.

    Returns:
        pl.DataFrame: columns seed, strategy_pair, deviation; ordered by sample then pair.

    Example:
        `df = latticeqm.amplitudes.fuzz_consistency(seed=7, count=1000, num_sites=8, num_steps=6)`
    """
    config = LatticeConfig(num_sites, num_steps)
    rows = {"seed": [], "strategy_pair": [], "deviation": []}
    for sample_seed in tqdm(sample_seeds(seed, count), disable=not show_progress):
        kernel = random_unitary_kernel(num_sites, sample_seed)
        setup = random_setup(config, sample_seed, num_steps - 1)
        report = consistency_check(setup, kernel, strategies)
        results = list(report.deviations.items())
        if single_splits:
            results.append(("single_splits", single_split_deviation(setup, kernel)))
        if rules:
            results.append(("sum_rule", sum_rule_deviation(config, kernel, sample_seed)))
            results.append(("product_rule", product_rule_deviation(config, kernel, sample_seed)))
        for pair, deviation in results:
            rows["seed"].append(sample_seed)
            rows["strategy_pair"].append(pair)
            rows["deviation"].append(deviation)
    df = pl.DataFrame(rows, schema={"seed": pl.Int64, "strategy_pair": pl.Utf8, "deviation": pl.Float64})
    if df.height:
        logger.info(f"fuzz_consistency: {count} samples, max deviation {df['deviation'].max():.3e}")
    return frame_output(df, return_as_pandas)
