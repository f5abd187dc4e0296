import argparse
import datetime
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
import polars as pl
from attrs import asdict, field, frozen

from latticeqm.amplitudes.amplitude_engine import (
    DEFAULT_STRATEGIES,
    BruteForcePaths,
    RecursiveDecompose,
    SigmaInsertion,
    TransferMatrix,
    amplitude,
    consistency_check,
)
from latticeqm.amplitudes.amplitude_fuzz import fuzz_consistency
from latticeqm.born.born_theorem import ProjectorWindow, born_probability, convergence_scan, small_N_direct, window_mass
from latticeqm.composite.composite_systems import composite_amplitude, load_composite
from latticeqm.config import (
    ARTIFACT_VERSION,
    BORN_DIRECT_MAX_REPLICAS,
    BORN_DIRECT_TOLERANCE,
    CONSISTENCY_TOLERANCE,
    CSV_FORMAT,
    EXIT_CONSISTENCY,
    EXIT_INVALID,
    EXIT_OK,
    JSON_FORMAT,
    MANIFEST_SUFFIX,
    REGRADE_GRID_N,
    RULE_TOLERANCE,
)
from latticeqm.errors import (
    CommandLineError,
    ConsistencyViolationError,
    LatticeqmError,
    consistency_check_tolerance,
)
from latticeqm.evolution.evolution import evolution_table
from latticeqm.io_utils import array_to_complex_pairs, frame_to_text, write_json, write_text
from latticeqm.lattice.lattice_core import Event, LatticeConfig, make_tight_binding_kernel, normalize
from latticeqm.lattice.lattice_loaders import load_kernel, load_wave_function
from latticeqm.regrade.regrade_catalog import (
    catalog_operation,
    catalog_product_candidate,
    operation_domains,
    product_candidate_defaults,
)
from latticeqm.regrade.regrade_solver import product_rule_residual, recover_regrade, xi_table
from latticeqm.setups.setup_algebra import FilterSpec, Setup, or_compose, validate
from latticeqm.setups.setup_loaders import load_setup, setup_to_dict

logger = logging.getLogger("lqm.cli")
logger.addHandler(logging.NullHandler())

STRATEGY_CHOICES = {
    TransferMatrix.name: TransferMatrix(),
    RecursiveDecompose.name: RecursiveDecompose(),
    SigmaInsertion.name: SigmaInsertion(),
    BruteForcePaths.name: BruteForcePaths(),
}


@frozen
class RunManifest:
    """Provenance written next to every output: enough to re-run the command"""

    subcommand: str
    flags: dict
    seed: int
    version: str = ARTIFACT_VERSION
    outputs: list = field(factory=list)
    wall_clock: dict = field(factory=dict)

    def to_dict(self):
        return asdict(self)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises CommandLineError instead of exiting with status 2"""

    def error(self, message):
        raise CommandLineError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _strategy_list(text):
    names = [x.strip() for x in text.split(",") if x.strip()]
    unknown = [n for n in names if n not in STRATEGY_CHOICES]
    if unknown or len(names) < 2:
        raise argparse.ArgumentTypeError(f"expected two or more of {sorted(STRATEGY_CHOICES)}, got '{text}'")
    return names


def _output_path(args, suffix):
    return Path(f"{args.out}{suffix}")


def _write_table(args, df: pl.DataFrame, outputs, suffix=""):
    path = _output_path(args, f"{suffix}.{args.format}")
    outputs.append(str(write_text(path, frame_to_text(df, args.format))))
    return path


def _write_report(args, report, outputs, suffix=""):
    path = _output_path(args, f"{suffix}.json")
    outputs.append(str(write_json(path, report)))
    return path


def cmd_amplitude(args, outputs):
    setup = load_setup(args.setup)
    kernel = load_kernel(args.kernel)
    strategies = tuple(STRATEGY_CHOICES[n] for n in args.strategies) if args.strategies else DEFAULT_STRATEGIES
    report = consistency_check(setup, kernel, strategies)
    value = amplitude(setup, kernel).value
    out = {"amplitude": [value.real, value.imag], **report.to_dict()}
    _write_report(args, out, outputs)
    sys.stdout.write(f"{json.dumps(out, indent=2, sort_keys=True)}\n")
    consistency_check_tolerance(report.max_deviation, args.tolerance, "amplitude strategies")


def cmd_fuzz(args, outputs):
    df = fuzz_consistency(
        args.seed,
        args.count,
        args.L,
        args.T,
        rules=not args.no_rules,
        show_progress=args.progress,
    )
    _write_table(args, df, outputs)
    rule_rows = pl.col("strategy_pair").is_in(["sum_rule", "product_rule"])
    strategy_max = df.filter(~rule_rows)["deviation"].max() or 0.0
    rule_max = df.filter(rule_rows)["deviation"].max() or 0.0
    logger.info(f"fuzz: max strategy deviation {strategy_max:.3e}, max rule deviation {rule_max:.3e}")
    consistency_check_tolerance(strategy_max, args.tolerance, "fuzz strategies")
    consistency_check_tolerance(rule_max, RULE_TOLERANCE, "fuzz sum and product rules")


def cmd_evolve(args, outputs):
    kernel = load_kernel(args.kernel)
    psi = load_wave_function(args.psi)
    _write_table(args, evolution_table(psi, kernel, args.steps), outputs)


def cmd_born(args, outputs):
    df = convergence_scan(args.p, args.f, args.eps, args.N_list)
    df = df.rename({"overlap_gaussian": "overlap_gauss", "deviation_norm": "deviation"})
    _write_table(args, df, outputs)


def cmd_born_direct(args, outputs):
    psi = load_wave_function(args.psi)
    if not psi.normalized:
        psi = normalize(psi)
    p = born_probability(psi, args.site)
    rows = {"N": [], "n_min": [], "n_max": [], "direct": [], "exact": [], "deviation": []}
    for N in range(1, args.N_max + 1):
        for n_min in range(N + 1):
            for n_max in range(n_min, N + 1):
                window = ProjectorWindow(n_min, n_max)
                direct = small_N_direct(psi, args.site, window, N)
                exact = window_mass(p, N, window)
                rows["N"].append(N)
                rows["n_min"].append(n_min)
                rows["n_max"].append(n_max)
                rows["direct"].append(direct)
                rows["exact"].append(exact)
                rows["deviation"].append(abs(direct - exact))
    df = pl.DataFrame(rows)
    _write_table(args, df, outputs)
    consistency_check_tolerance(float(df["deviation"].max()), BORN_DIRECT_TOLERANCE, "born-direct")


def cmd_regrade(args, outputs):
    if args.product:
        P = catalog_product_candidate(args.product, args.coefficient)
        report = product_rule_residual(P)
        out = {
            "candidate": P.name,
            "left_distributivity": report.left_distributivity,
            "right_distributivity": report.right_distributivity,
            "associativity": report.associativity,
            "c_fit": report.c_fit,
            "fit_residual": report.fit_residual,
            "passes": report.passes,
        }
        _write_report(args, out, outputs)
        return
    S = catalog_operation(args.op, args.coefficient, args.grid_n)
    result = recover_regrade(S)
    table = xi_table(result)
    out = {
        "operation": S.name,
        "domain": list(S.domain),
        "assoc_residual": result.associativity,
        "additivity_residual": result.residual_stats.get("max"),
        "additivity_offset": result.residual_stats.get("offset"),
        "c_constant": result.c_constant,
        "c_measured": result.c_measured,
        "xi_table": table.to_dicts(),
    }
    _write_report(args, out, outputs)
    path = _output_path(args, f".xi.{CSV_FORMAT}")
    outputs.append(str(write_text(path, table.write_csv())))


def double_slit_table(num_sites, steps, holes, hop=1.0, dt=1.0, source=None, slit_time=None) -> pl.DataFrame:
    """double_slit_table - detector-site amplitudes behind a two-hole filter and its one-hole parts

    Args:
        num_sites (int): ring size L.
        steps (int): detector time.
        holes (list): the two slit sites.
        hop (complex): tight-binding coupling.
        dt (float): time step.
        source (int): source site, default L // 2.
        slit_time (int): filter time, default steps // 2.

    Returns:
        pl.DataFrame: one row per detector site with the A, B and both amplitudes, prob_both and
            sum_check = |psi_both - psi_A - psi_B|.
    """
    if len(holes) != 2 or holes[0] == holes[1]:
        raise CommandLineError(f"double-slit needs two distinct holes, got {holes}")
    config = LatticeConfig(num_sites, steps, dt=dt)
    kernel = make_tight_binding_kernel(config, hop, np.zeros(num_sites))
    source = Event(num_sites // 2 if source is None else source, 0)
    slit_time = steps // 2 if slit_time is None else slit_time
    rows = {k: [] for k in ("site", "a_re", "a_im", "b_re", "b_im", "both_re", "both_im", "prob_both", "sum_check")}
    for site in range(num_sites):
        detector = Event(site, steps)
        a = validate(Setup(source, detector, (FilterSpec(slit_time, (holes[0],)),)), num_sites)
        b = validate(Setup(source, detector, (FilterSpec(slit_time, (holes[1],)),)), num_sites)
        psi_a = amplitude(a, kernel).value
        psi_b = amplitude(b, kernel).value
        psi_both = amplitude(or_compose(a, b), kernel).value
        rows["site"].append(site)
        rows["a_re"].append(psi_a.real)
        rows["a_im"].append(psi_a.imag)
        rows["b_re"].append(psi_b.real)
        rows["b_im"].append(psi_b.imag)
        rows["both_re"].append(psi_both.real)
        rows["both_im"].append(psi_both.imag)
        rows["prob_both"].append(abs(psi_both) ** 2)
        rows["sum_check"].append(abs(psi_both - psi_a - psi_b))
    return pl.DataFrame(rows)


def cmd_double_slit(args, outputs):
    df = double_slit_table(args.L, args.steps, args.holes, args.hop, args.dt, args.source, args.slit_time)
    _write_table(args, df, outputs)
    consistency_check_tolerance(float(df["sum_check"].max()), RULE_TOLERANCE, "double-slit sum rule")


def cmd_setup(args, outputs):
    setup = load_setup(args.setup)
    if args.L is not None:
        validate(setup, args.L)
    normalized = setup_to_dict(setup)
    _write_report(args, normalized, outputs)
    sys.stdout.write(f"{json.dumps(normalized, indent=2, sort_keys=True)}\n")


def cmd_composite(args, outputs):
    c = load_composite(args.composite)
    parts = [amplitude(setup, kernel).value for setup, kernel in c.parts]
    total = composite_amplitude(c).value
    out = {"amplitude": [total.real, total.imag], "parts": array_to_complex_pairs(parts)}
    _write_report(args, out, outputs)
    sys.stdout.write(f"{json.dumps(out, indent=2, sort_keys=True)}\n")


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed recorded in the manifest")
    common.add_argument("--out", default=None, help="output path prefix (default: the subcommand name)")
    common.add_argument("--format", choices=(CSV_FORMAT, JSON_FORMAT), default=CSV_FORMAT, help="table format")
    common.add_argument("--verbose", action="store_true", help="debug logging on standard error")
    common.add_argument("--progress", action="store_true", help="show progress bars")

    parser = ArgumentParser(prog="latticeqm", description="Lattice amplitude simulator and verification suite")
    parser.add_argument("--version", action="version", version=f"%(prog)s {ARTIFACT_VERSION}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    sub.required = True

    p = sub.add_parser("amplitude", parents=[common], help="amplitude of a setup under several strategies")
    p.add_argument("--setup", required=True, help="setup JSON")
    p.add_argument("--kernel", required=True, help="kernel JSON")
    p.add_argument("--strategies", type=_strategy_list, default=None, help="comma-separated strategy names")
    p.add_argument("--tolerance", type=float, default=CONSISTENCY_TOLERANCE)
    p.set_defaults(handler=cmd_amplitude)

    p = sub.add_parser("fuzz", parents=[common], help="consistency fuzz over random setups and kernels")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--T", type=int, default=6)
    p.add_argument("--tolerance", type=float, default=CONSISTENCY_TOLERANCE)
    p.add_argument("--no-rules", action="store_true", help="skip the sum and product rule rows")
    p.set_defaults(handler=cmd_fuzz)

    p = sub.add_parser("evolve", parents=[common], help="time series of a wave function")
    p.add_argument("--kernel", required=True, help="kernel JSON")
    p.add_argument("--psi", required=True, help="wave function JSON")
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("born", parents=[common], help="fraction-window overlap as the replica count grows")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--f", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--N-list", dest="N_list", type=_int_list, required=True)
    p.set_defaults(handler=cmd_born)

    p = sub.add_parser("born-direct", parents=[common], help="configuration-space cross-check at small N")
    p.add_argument("--psi", required=True, help="wave function JSON")
    p.add_argument("--site", type=int, required=True)
    p.add_argument("--N-max", dest="N_max", type=int, default=8, choices=range(1, BORN_DIRECT_MAX_REPLICAS + 1))
    p.set_defaults(handler=cmd_born_direct)

    p = sub.add_parser("regrade", parents=[common], help="recover the additive regrade of a catalog operation")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--op", choices=sorted(operation_domains))
    target.add_argument("--product", choices=sorted(product_candidate_defaults), help="check a product-rule candidate")
    p.add_argument("--coefficient", type=float, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=REGRADE_GRID_N)
    p.set_defaults(handler=cmd_regrade)

    p = sub.add_parser("double-slit", parents=[common], help="two-hole interference and the sum rule")
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--holes", type=_int_list, default=[5, 10])
    p.add_argument("--hop", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--source", type=int, default=None)
    p.add_argument("--slit-time", dest="slit_time", type=int, default=None)
    p.set_defaults(handler=cmd_double_slit)

    p = sub.add_parser("setup", parents=[common], help="validate and echo a setup in normalized form")
    p.add_argument("--setup", required=True, help="setup JSON")
    p.add_argument("--L", type=int, default=None, help="lattice size to validate sites against")
    p.set_defaults(handler=cmd_setup)

    p = sub.add_parser("composite", parents=[common], help="amplitude of a composite setup")
    p.add_argument("--composite", required=True, help="composite setup JSON")
    p.set_defaults(handler=cmd_composite)
    return parser


def _flags(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "handler"}


def run(argv=None) -> int:
    """Run one subcommand; returns 0 on success, 1 on invalid input and 2 on a consistency violation"""
    try:
        args = build_parser().parse_args(argv)
    except CommandLineError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if args.out is None:
        args.out = args.subcommand
    started = datetime.datetime.now(datetime.timezone.utc)
    start_time = time.perf_counter()
    outputs = []
    exit_code = EXIT_OK
    try:
        args.handler(args, outputs)
    except ConsistencyViolationError as e:
        sys.stderr.write(f"latticeqm {args.subcommand}: consistency violation: {e}\n")
        exit_code = EXIT_CONSISTENCY
    except (LatticeqmError, OSError) as e:
        sys.stderr.write(f"latticeqm {args.subcommand}: {e}\n")
        exit_code = EXIT_INVALID
    if outputs:
        manifest = RunManifest(
            args.subcommand,
            _flags(args),
            args.seed,
            outputs=outputs,
            wall_clock={"started": started.isoformat(), "elapsed_seconds": time.perf_counter() - start_time},
        )
        write_json(_output_path(args, MANIFEST_SUFFIX), manifest.to_dict())
        logger.info(f"{args.subcommand}: wrote {outputs} with exit code {exit_code}")
    return exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
