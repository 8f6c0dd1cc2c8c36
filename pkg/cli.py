"""
Command-line experiment runner

    python cli.py run --manifest data/manifest.json --passes 10 --out run.csv
    python cli.py sweep-alpha --manifest data/manifest.json --out sweep.csv
    python cli.py block-study --manifest data/manifest.json --out blocks.csv
    python cli.py generate --out-dir data --clusters 3 --dims 20 20 --n-instances 3000
    python cli.py show-config

Option values come from explicit flags, then from --config (a JSON object whose
keys are the long flag names), then from the environment defaults in config.py.

Exit codes: 0 success, 1 run failure, 2 usage error.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import backend
import config
from data import make_synthetic, save_dataset, simulate_missing
from data.loader import MultiViewDataset
from model.types import PresenceMask, SolverConfig

logger = logging.getLogger("cli")

RUN_DEFAULTS: Dict[str, Any] = {
    "manifest": None,
    "views": None,
    "mask": None,
    "labels": None,
    "clusters": None,
    "alpha": config.DEFAULT_ALPHA,
    "chunk_size": config.DEFAULT_CHUNK_SIZE,
    "passes": None,
    "max_inner_iters": config.DEFAULT_MAX_INNER_ITERS,
    "seed": config.DEFAULT_SEED,
    "missing_rate": 0.0,
    "fill_degenerate": "on",
    "no_shuffle": False,
    "stream_from_disk": False,
    "eval_every_chunk": False,
    "no_timing": False,
    "threads": None,
    "out": None,
    "assignments_out": None,
    "alphas": list(config.ALPHA_GRID),
    "chunk_sizes": list(config.BLOCK_SIZES),
}

GENERATE_DEFAULTS: Dict[str, Any] = {
    "out_dir": None,
    "clusters": 3,
    "dims": [20, 20],
    "n_instances": 3000,
    "separation": 1.0,
    "noise": 0.1,
    "seed": config.DEFAULT_SEED,
    "missing_rate": 0.0,
    "format": "csv",
}


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return number


def nonnegative_float(value: str) -> float:
    number = float(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return number


def missing_rate(value: str) -> float:
    number = float(value)
    if not 0.0 <= number < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {value}")
    return number


def _add_data_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--manifest", help="dataset manifest JSON")
    p.add_argument("--views", nargs="+", help="view files (CSV or MVC1), override the manifest")
    p.add_argument("--mask", help="presence mask CSV (n_views x N of 0/1)")
    p.add_argument("--labels", help="ground-truth labels, one integer per line")
    p.add_argument("--clusters", type=positive_int, help="number of clusters K")
    p.add_argument("--alpha", type=nonnegative_float)
    p.add_argument("--chunk-size", type=positive_int)
    p.add_argument("--passes", type=positive_int)
    p.add_argument("--max-inner-iters", type=positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--missing-rate", type=missing_rate,
                   help="simulate this per-view missing rate when no mask is given")
    p.add_argument("--fill-degenerate", choices=["on", "off"])
    p.add_argument("--no-shuffle", action="store_true", default=None)
    p.add_argument("--stream-from-disk", action="store_true", default=None,
                   help="memory-map MVC1 view files instead of loading them")
    p.add_argument("--eval-every-chunk", action="store_true", default=None)
    p.add_argument("--no-timing", action="store_true", default=None,
                   help="leave wall_ms empty so identical flags give identical files")
    p.add_argument("--threads", type=positive_int, help="parallel sweep members (default OPIMC_THREADS)")
    p.add_argument("--out", help="results CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opimc", description="One-pass incomplete multi-view clustering experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run, one record per pass")
    _add_data_options(p_run)
    p_run.add_argument("--assignments-out", help="write final labels, one per line")

    p_sweep = sub.add_parser("sweep-alpha", help="one run per alpha")
    _add_data_options(p_sweep)
    p_sweep.add_argument("--alphas", nargs="+", type=nonnegative_float)

    p_block = sub.add_parser("block-study", help="one run per chunk size")
    _add_data_options(p_block)
    p_block.add_argument("--chunk-sizes", nargs="+", type=positive_int)

    p_gen = sub.add_parser("generate", help="write a synthetic dataset")
    p_gen.add_argument("--config", help="JSON file with option values")
    p_gen.add_argument("--out-dir")
    p_gen.add_argument("--clusters", type=positive_int)
    p_gen.add_argument("--dims", nargs="+", type=positive_int, help="one dimension per view")
    p_gen.add_argument("--n-instances", type=positive_int)
    p_gen.add_argument("--separation", type=float)
    p_gen.add_argument("--noise", type=nonnegative_float)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--missing-rate", type=missing_rate)
    p_gen.add_argument("--format", choices=["csv", "mvc1"])

    sub.add_parser("show-config", help="print the effective configuration")
    return parser


def resolve_options(args: argparse.Namespace, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """Flags override the config file, which overrides defaults."""
    from_file = config.load_config_file(args.config) if getattr(args, "config", None) else {}
    options = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = from_file.get(key, default)
        options[key] = value
    return options


def solver_config(opts: Dict[str, Any]) -> SolverConfig:
    fill = opts["fill_degenerate"]
    return SolverConfig(
        alpha=float(opts["alpha"]),
        chunk_size=int(opts["chunk_size"]),
        max_inner_iters=int(opts["max_inner_iters"]),
        n_passes=int(opts["passes"]),
        rng_seed=int(opts["seed"]),
        fill_degenerate=fill if isinstance(fill, bool) else str(fill).lower() == "on",
    ).validate()


def cmd_run(opts: Dict[str, Any], command: str) -> int:
    data = backend.prepare_data(
        manifest_path=opts["manifest"],
        view_paths=opts["views"],
        mask_path=opts["mask"],
        labels_path=opts["labels"],
        n_clusters=opts["clusters"],
        missing_rate=float(opts["missing_rate"]),
        seed=int(opts["seed"]),
        shuffle=not opts["no_shuffle"],
        stream_from_disk=bool(opts["stream_from_disk"]),
    )
    cfg = solver_config(opts)
    common = dict(eval_every_chunk=bool(opts["eval_every_chunk"]), timing=not opts["no_timing"])

    if command == "run":
        results = [backend.run_experiment(data, cfg, command="run", **common)]
        backend.write_records_csv(opts["out"], results, with_config=False)
        if opts["assignments_out"]:
            backend.write_assignments(opts["assignments_out"], results[0].assignments)
    elif command == "sweep-alpha":
        results = backend.sweep_alpha(data, cfg, opts["alphas"], threads=opts["threads"], **common)
        backend.write_records_csv(opts["out"], results, with_config=True)
    else:
        results = backend.block_study(data, cfg, opts["chunk_sizes"], n_passes=cfg.n_passes,
                                      threads=opts["threads"], **common)
        backend.write_records_csv(opts["out"], results, with_config=True)

    for result in results:
        final = result.final
        print(f"{result.run_id}: alpha={result.config.alpha} chunk_size={result.config.chunk_size} "
              f"passes={result.config.n_passes} nmi={final.nmi} ac={final.ac} avg_loss={final.average_loss:.6f}")
    return 0


def cmd_generate(opts: Dict[str, Any]) -> int:
    dims: List[int] = [int(d) for d in opts["dims"]]
    views, labels = make_synthetic(
        n_clusters=int(opts["clusters"]),
        n_views=len(dims),
        dims=dims,
        n_instances=int(opts["n_instances"]),
        separation=float(opts["separation"]),
        noise=float(opts["noise"]),
        rng_seed=int(opts["seed"]),
    )
    dataset = MultiViewDataset(views, PresenceMask.full(len(dims), int(opts["n_instances"])),
                               int(opts["clusters"]), labels)
    if float(opts["missing_rate"]) > 0:
        dataset = dataset.with_mask(simulate_missing(dataset.meta, float(opts["missing_rate"]), int(opts["seed"])))

    manifest_path = save_dataset(dataset, opts["out_dir"], fmt=opts["format"])
    print(manifest_path)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.command == "show-config":
        config.print_config()
        return 0

    try:
        if args.command == "generate":
            opts = resolve_options(args, GENERATE_DEFAULTS)
            if not opts["out_dir"]:
                parser.error("generate requires --out-dir")
        else:
            opts = resolve_options(args, RUN_DEFAULTS)
            if opts["passes"] is None:
                opts["passes"] = (
                    config.BLOCK_STUDY_PASSES if args.command == "block-study" else config.DEFAULT_PASSES
                )
            if not opts["manifest"] and not opts["views"]:
                parser.error(f"{args.command} requires --manifest or --views")
            if not opts["out"]:
                parser.error(f"{args.command} requires --out")
    except SystemExit as e:
        return int(e.code or 0)
    except (OSError, ValueError) as e:
        print(f"opimc {args.command}: error: {e}", file=sys.stderr)
        return 2

    try:
        if args.command == "generate":
            return cmd_generate(opts)
        return cmd_run(opts, args.command)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"opimc {args.command}: failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
