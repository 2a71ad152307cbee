"""
HYB_SIM.PY - Command-line entry point

Usage:
    # Polariton spectrum with the default G/omega_m axis
    python hyb_sim.py spectrum --config profiles/polariton_spectrum.conf

    # iSWAP run, 4 sweep workers, metrics textfile
    python hyb_sim.py iswap --config profiles/iswap_gate.conf --threads 4 --metrics run.prom

    # Registered experiments
    python hyb_sim.py list

Exit codes: 0 success, 2 configuration error, 3 physics-domain or
numerical error. Output directory: --out, else HYBSIM_OUT_DIR, else results/.
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from hyb_config import ExperimentConfig, env_log_level, env_metrics_path, env_out_dir, env_threads, load
from hyb_errors import ConfigError, SimulationError
from hyb_experiments import REGISTRY
from hyb_sweep import run_sweep, write_outputs

logger = logging.getLogger("SIM")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Hybrid spin-electromechanical simulator")
    parser.add_argument("experiment", help=f"Experiment name or 'list' ({', '.join(REGISTRY)})")
    parser.add_argument("--config", default=None, help="Experiment config file")
    parser.add_argument("--out", default=None, help="Output directory (default: $HYBSIM_OUT_DIR or results)")
    parser.add_argument("--threads", type=int, default=None, help="Sweep workers (default: $HYBSIM_THREADS or 1)")
    parser.add_argument("--log-level", default=None, help="Logging level (default: $HYBSIM_LOG_LEVEL or INFO)")
    parser.add_argument("--metrics", default=None, help="Write Prometheus textfile here after the run")
    return parser


def _setup_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='[%(asctime)s] [%(name)s] %(levelname)s - %(message)s'
    )


def list_experiments() -> str:
    width = max(len(name) for name in REGISTRY)
    return "\n".join(f"{name.ljust(width)}  {exp.description}" for name, exp in REGISTRY.items())


def _resolve_config(args) -> ExperimentConfig:
    cfg = load(args.config) if args.config else ExperimentConfig(experiment=args.experiment)
    if cfg.experiment and cfg.experiment != args.experiment:
        raise ConfigError(
            f"[SIM] Config {cfg.source} is for experiment '{cfg.experiment}', not '{args.experiment}'"
        )
    cfg.experiment = args.experiment
    return cfg.validate()


def _write_metrics(path: Optional[str], status: str):
    try:
        from prometheus_exporter import get_exporter
        exporter = get_exporter()
        exporter.record_run(status)
        if path:
            exporter.write_textfile(path)
    except Exception as e:
        logger.warning(f"[METRICS] Not written: {e}")


def run(args) -> int:
    cfg = _resolve_config(args)
    threads = args.threads if args.threads is not None else (cfg.threads or env_threads())
    if threads < 1:
        raise ConfigError(f"[SIM] --threads must be >= 1, got {threads}")
    out_dir = Path(args.out or cfg.output or env_out_dir())

    logger.info("=" * 70)
    logger.info(f"RUN {cfg.experiment} ({cfg.source or 'defaults'})")
    logger.info("=" * 70)
    start = time.perf_counter()

    result = run_sweep(cfg, threads=threads)
    csv_path, json_path = write_outputs(result, out_dir, cfg.stem)

    logger.info("=" * 70)
    logger.info(f"DONE {cfg.experiment}: {len(result.outcomes)} point(s), {result.n_failed} failed, "
                f"{time.perf_counter() - start:.2f}s")
    logger.info(f"  CSV: {csv_path}")
    logger.info(f"  Summary: {json_path}")
    logger.info("=" * 70)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level or env_log_level())
    metrics_path = args.metrics or env_metrics_path()

    if args.experiment == "list":
        print(list_experiments())
        return EXIT_OK
    if args.experiment not in REGISTRY:
        print(f"[SIM] Unknown experiment '{args.experiment}'; choose from {sorted(REGISTRY)}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        code = run(args)
        status = "ok"
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        code, status = EXIT_CONFIG, e.status
    except SimulationError as e:
        print(str(e), file=sys.stderr)
        code, status = EXIT_PHYSICS, e.status
    _write_metrics(metrics_path, status)
    return code


if __name__ == "__main__":
    sys.exit(main())
