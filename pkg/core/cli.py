"""
cli.py
------
Command-line entry point: generate preserver bundles, verify and recover
them, build completely entangled subspaces, check kernels for product
vectors and print the bipartite catalog.

Exit codes:
    0  success / verification passed
    1  usage, parse or file-format error, invalid partition
    2  no factors exist for the requested partition or form
    3  verification failed
    4  structure recovery failed

Author: infoyouth
Date: 2026-10-18
"""
import argparse
import json
import sys
from typing import List, Optional

from core.bundle_io import BundleStore, MapBundle, canonical_dumps, matrix_to_payload
from core.config_loader import SolverConfigLoader
from core.errors import (
    AmbiguousStructureError,
    NonexistentFactorsError,
    NotKroneckerError,
    PreserverError,
)
from core.preserver_forms import (
    Partition,
    assemble_phi,
    bipartite_catalog,
    synthesize_partition_factors,
)
from core.preserver_recover import recover
from core.preserver_verify import admits_nonsingular_image, is_rank_one_preserver
from core.subspaces import ces_construct, ces_max_dim, contains_decomposable, kernel_basis
from core.tensor_core import DimsProfile
from logger.logger_config import get_logger, setup_logger
from utils.helpers import parse_int_list

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONEXISTENT = 2
EXIT_VERIFY_FAILED = 3
EXIT_RECOVERY_FAILED = 4

RESIDUAL_TOL = 1e-8


class UsageError(Exception):
    """Raised instead of argparse's own exit so `main` can return code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _dims(text: str) -> DimsProfile:
    return DimsProfile(tuple(parse_int_list(text)))


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    """Add --seed, --config and --log-level; with ``suppress`` an unset flag leaves the namespace alone."""

    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=default(0), help="Root seed for all randomness")
    parser.add_argument("--config", default=default(None), help="Solver configuration JSON file")
    parser.add_argument("--log-level", default=default(None), help="Logging level (e.g. DEBUG, INFO)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rank1-preservers",
        description="Construct, verify and decompose rank-one preservers on tensor products.",
    )
    _add_global_flags(parser)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    gen = sub.add_parser("gen", parents=[common], help="Synthesize valid M, N and write a bundle")
    gen.add_argument("--dims", required=True, help="Factor sizes, e.g. 2,3")
    gen.add_argument("--partition", required=True, help='Blocks P1|P2|P3|P4, 1-based, e.g. "1|2||"')
    gen.add_argument("--out", default=None, help="Output file (stdout when omitted)")

    verify = sub.add_parser(
        "verify", parents=[common], help="Check the rank-one preserver property of a bundle"
    )
    verify.add_argument("bundle")
    verify.add_argument("--trials", type=int, default=None, help="Random products to test")
    verify.add_argument("--strict", action="store_true", help="Also recover and reassemble the map")

    rec = sub.add_parser(
        "recover", parents=[common], help="Recover partition, M and N from a bundle's phi"
    )
    rec.add_argument("bundle")
    rec.add_argument("--out", default=None, help="Output file (stdout when omitted)")

    ces = sub.add_parser("ces", parents=[common], help="Completely entangled subspace of C^P (x) C^Q")
    ces.add_argument("p", type=int)
    ces.add_argument("q", type=int)

    kernel = sub.add_parser(
        "kernel-check", parents=[common], help="Search the kernel of a matrix for product vectors"
    )
    kernel.add_argument("matrix")
    kernel.add_argument("--dims", required=True, help="Product shape of the column space, e.g. 3,3")

    catalog = sub.add_parser("catalog", parents=[common], help="List the 16 bipartite forms")
    catalog.add_argument("n1", type=int)
    catalog.add_argument("n2", type=int)
    catalog.add_argument("--json", action="store_true", help="Print JSON instead of a table")
    return parser


def cmd_gen(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    dims = _dims(args.dims)
    partition = Partition.from_cli(args.partition, k=dims.k)
    opts = config.search_options(args.seed)
    m, n = synthesize_partition_factors(dims, partition, args.seed, opts, config.synthesis_retries())
    phi_map = assemble_phi(dims, partition, m, n, strict=True, opts=opts)
    text = BundleStore.save_bundle(MapBundle.from_map(phi_map), args.out)
    if args.out is None:
        print(text, end="")
    else:
        print(f"Wrote partition {partition} on dims {list(dims.factors)} to {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    bundle = BundleStore.load_bundle(args.bundle)
    phi_map = bundle.to_map()
    settings = config.verify_settings()
    trials = args.trials if args.trials is not None else int(settings["trials"])
    report = is_rank_one_preserver(
        phi_map,
        trials=trials,
        seed=args.seed,
        tol=float(settings["ratio_tol"]),
        zero_tol=float(settings["zero_tol"]),
    )
    print(f"verdict: {report.verdict.value}")
    print(f"trials: {report.trials} (sampled {report.sampled}, swept {report.swept})")
    print(f"max_second_singular: {report.max_second_singular:.3e}")
    if not report.passed:
        print(
            canonical_dumps(
                {
                    "counterexample": report.counterexample.to_payload(),
                    "output": matrix_to_payload(report.counterexample_output),
                    "output_rank": report.counterexample_rank,
                }
            ),
            end="",
        )
        return EXIT_VERIFY_FAILED
    nonsingular = admits_nonsingular_image(phi_map, int(settings["nonsingular_trials"]), args.seed)
    print(f"nonsingular_image: {'yes' if nonsingular else 'no'}")
    if args.strict:
        rec = config.recover_settings()
        result = recover(
            phi_map,
            seed=args.seed,
            votes=int(rec["votes"]),
            rank_tol=float(rec["rank_tol"]),
            kron_tol=float(rec["kron_tol"]),
            check_factors=False,
        )
        print(f"partition: {result.partition}")
        print(f"residual: {result.residual:.3e}")
        if result.residual >= RESIDUAL_TOL:
            return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_recover(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    bundle = BundleStore.load_bundle(args.bundle)
    phi_map = bundle.to_map()
    rec = config.recover_settings()
    result = recover(
        phi_map,
        seed=args.seed,
        votes=int(rec["votes"]),
        rank_tol=float(rec["rank_tol"]),
        kron_tol=float(rec["kron_tol"]),
        check_factors=False,
    )
    if result.residual >= RESIDUAL_TOL:
        logger.error(f"Reassembled map deviates from the input by {result.residual:.3e}")
        return EXIT_RECOVERY_FAILED
    out = MapBundle(bundle.dims, result.partition, result.M, result.N, phi_map.phi)
    text = BundleStore.save_bundle(out, args.out)
    if args.out is None:
        print(text, end="")
    else:
        print(f"partition: {result.partition}")
        print(f"residual: {result.residual:.3e}")
    return EXIT_OK


def cmd_ces(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    space = ces_construct(args.p, args.q)
    report = contains_decomposable(space, (args.p, args.q), config.search_options(args.seed))
    print(
        canonical_dumps(
            {
                "basis": matrix_to_payload(space.basis),
                "dim": space.dim,
                "max_dim": ces_max_dim((args.p, args.q)),
                "min_value": report.min_value,
                "verdict": report.verdict.value,
            }
        ),
        end="",
    )
    return EXIT_OK


def cmd_kernel_check(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    matrix = BundleStore.load_matrix(args.matrix)
    dims = parse_int_list(args.dims)
    space = kernel_basis(matrix)
    report = contains_decomposable(space, dims, config.search_options(args.seed))
    print(f"kernel_dim: {space.dim}")
    print(f"verdict: {report.verdict.value}")
    print(f"min_value: {report.min_value:.6e}")
    if report.witness is not None:
        print(canonical_dumps({"witness": [matrix_to_payload(v.reshape(-1, 1)) for v in report.witness]}), end="")
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace, config: SolverConfigLoader) -> int:
    entries = bipartite_catalog(args.n1, args.n2)
    if args.json:
        payload = {"dims": [args.n1, args.n2], "forms": [e.to_payload() for e in entries]}
        print(canonical_dumps(payload), end="")
        return EXIT_OK
    header = f"{'form':<10} {'psi_P':<5} {'psi_R':<5} {'psi_T':<5} case {'M':>9} {'N':>9} exists partition"
    print(header)
    for e in entries:
        m_shape = f"{e.m_shape[0]}x{e.m_shape[1]}"
        n_shape = f"{e.n_shape[0]}x{e.n_shape[1]}"
        print(
            f"{e.name:<10} {e.psi_p:<5} {e.psi_r:<5} {e.psi_t:<5} {e.case:>4} "
            f"{m_shape:>9} {n_shape:>9} {'yes' if e.exists else 'no':<6} {e.partition}"
        )
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "recover": cmd_recover,
    "ces": cmd_ces,
    "kernel-check": cmd_kernel_check,
    "catalog": cmd_catalog,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv`` (default ``sys.argv[1:]``), run the command and return
    its exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE

    try:
        setup_logger(args.log_level)
        config = SolverConfigLoader(args.config)
        return COMMANDS[args.command](args, config)
    except NonexistentFactorsError as e:
        print(f"nonexistent: {e}", file=sys.stderr)
        return EXIT_NONEXISTENT
    except (AmbiguousStructureError, NotKroneckerError) as e:
        print(f"recovery failed: {e}", file=sys.stderr)
        return EXIT_RECOVERY_FAILED
    except (PreserverError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.critical(f"An unexpected error occurred: {e}")
        raise


if __name__ == "__main__":
    sys.exit(main())
