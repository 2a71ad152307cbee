"""
HYB - Sweep Runner

Evaluates an experiment kernel over the Cartesian product of the sweep
axes (first axis slowest) and writes one CSV plus a JSON summary.

CSV layout:
    # key = value           metadata lines (experiment, units, axes, base-point values)
    header                  axis columns, kernel columns, status
    rows                    floats as %.17g, empty cell for missing values

A point whose kernel raises a physics/numerical error becomes a row with
that error's status and empty value columns; configuration errors abort
the run. Output is deterministic: no timestamps, row order fixed by the grid.
"""
import csv
import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import orjson

from hyb_config import AxisSpec, ExperimentConfig, parse_axis
from hyb_errors import ConfigError, SimulationError
from hyb_experiments import Experiment, PointResult, RunContext, base_metadata, get_experiment, merge_point

logger = logging.getLogger("SWEEP")

STATUS_OK = "ok"


@dataclass
class PointOutcome:
    index: int
    coords: Dict[str, float]
    result: Optional[PointResult]
    status: str
    message: str = ""
    duration_s: float = 0.0
    error: Optional[SimulationError] = field(default=None, repr=False)


@dataclass
class SweepResult:
    experiment: str
    axes: List[AxisSpec]
    outcomes: List[PointOutcome]
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        return sum(1 for o in self.outcomes if o.status != STATUS_OK)

    def columns(self) -> List[str]:
        """Axis columns, then kernel columns in first-seen order"""
        axis_names = [a.name for a in self.axes]
        seen: List[str] = []
        for o in self.outcomes:
            if o.result is None:
                continue
            for row in o.result.rows:
                for key in row:
                    if key not in axis_names and key not in seen:
                        seen.append(key)
        return axis_names + seen + ['status']

    def rows(self) -> List[Dict[str, object]]:
        out = []
        for o in self.outcomes:
            if o.result is None or not o.result.rows:
                out.append({**o.coords, 'status': o.status})
                continue
            for row in o.result.rows:
                out.append({**row, **o.coords, 'status': o.status})
        return out


def grid(axes: Sequence[AxisSpec]) -> List[Dict[str, float]]:
    """Lexicographic product, first axis slowest"""
    if not axes:
        return [{}]
    names = [a.name for a in axes]
    return [dict(zip(names, values)) for values in itertools.product(*(a.values for a in axes))]


def _record(experiment: str, status: str, duration_s: float):
    try:
        from prometheus_exporter import get_exporter
        get_exporter().record_point(experiment, status, duration_s)
    except Exception:
        pass


def _evaluate(exp: Experiment, base: Dict[str, float], ctx: RunContext,
              index: int, coords: Dict[str, float], isolate: bool) -> PointOutcome:
    point = merge_point(base, coords)
    start = time.perf_counter()
    try:
        result = exp.kernel(point, ctx)
        status, message, error = STATUS_OK, "", None
    except ConfigError:
        raise
    except SimulationError as e:
        if not isolate:
            raise
        result, status, message, error = None, e.status, str(e), e
        logger.warning(f"[POINT {index}] {coords}: {e.status}: {e}")
    duration = time.perf_counter() - start
    _record(exp.name, status, duration)
    return PointOutcome(index, coords, result, status, message, duration, error)


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> SweepResult:
    """
    Evaluate cfg.experiment over its sweep grid

    Raises:
        ConfigError: unknown experiment, bad parameters
        SimulationError: the single point of an axis-free run failed, or every point failed
    """
    exp = get_experiment(cfg.experiment)
    axes = cfg.resolved_axes()
    if not axes and exp.default_axes and not cfg.sweep:
        axes = [AxisSpec(a.name, tuple(cfg.scale(a.name, v) for v in a.values), a.spacing)
                for a in (parse_axis(name, text) for name, text in exp.default_axes)]
        logger.info(f"[SWEEP] No [sweep] given; using default axes {[a.name for a in axes]}")

    base = cfg.resolved_params()
    ctx = RunContext(model=dict(cfg.model), numerics=dict(cfg.numerics))
    points = grid(axes)
    isolate = bool(axes)
    logger.info(f"[SWEEP] {exp.name}: {len(points)} point(s), {threads} thread(s)")

    start = time.perf_counter()
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda ic: _evaluate(exp, base, ctx, ic[0], ic[1], isolate),
                                     enumerate(points)))
    else:
        outcomes = [_evaluate(exp, base, ctx, i, c, isolate) for i, c in enumerate(points)]
    elapsed = time.perf_counter() - start
    if outcomes and all(o.error is not None for o in outcomes):
        logger.error(f"[SWEEP] Every point failed; first error: {outcomes[0].message}")
        raise outcomes[0].error

    meta: Dict[str, object] = {
        'experiment': exp.name,
        'units': cfg.units,
        'axes': ",".join(a.name for a in axes) or "-",
        'points': len(points),
    }
    for name, value in sorted(base.items()):
        meta[f"param.{name}"] = value
    for name, value in sorted(ctx.model.items()):
        meta[f"model.{name}"] = value
    for name, value in sorted(ctx.numerics.items()):
        meta[f"numerics.{name}"] = value
    for name, value in base_metadata(base, ctx, [a.name for a in axes]).items():
        meta[f"derived.{name}"] = value

    result = SweepResult(exp.name, axes, outcomes, meta)
    logger.info(f"[SWEEP] Done in {elapsed:.3f}s, {result.n_failed} failed point(s)")
    return result


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return ""
        return format(v, '.17g')
    return str(value)


def write_csv(result: SweepResult, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = result.columns()
    with path.open('w', newline='', encoding='utf-8') as f:
        for key, value in result.metadata.items():
            f.write(f"# {key} = {format_value(value)}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in result.rows():
            writer.writerow([format_value(row.get(c)) for c in columns])
    logger.info(f"[CSV] Written {path}")
    return path


def _summary_stats(result: SweepResult) -> Dict[str, Dict[str, float]]:
    """min / max / final of every numeric column over successful rows"""
    stats: Dict[str, Dict[str, float]] = {}
    ok_rows = [r for r in result.rows() if r.get('status') == STATUS_OK]
    for column in result.columns():
        if column == 'status':
            continue
        values = [float(r[column]) for r in ok_rows
                  if isinstance(r.get(column), (int, float, np.floating)) and not isinstance(r.get(column), bool)]
        if not values:
            continue
        arr = np.asarray(values)
        stats[column] = {'min': float(arr.min()), 'max': float(arr.max()), 'final': float(arr[-1])}
    return stats


def write_summary(result: SweepResult, path: Path) -> Path:
    path = Path(path)
    summary = {
        'experiment': result.experiment,
        'metadata': {k: v for k, v in result.metadata.items()},
        'points': [
            {'index': o.index, 'coords': o.coords, 'status': o.status, 'message': o.message,
             'summary': o.result.summary if o.result is not None else {}}
            for o in result.outcomes
        ],
        'columns': _summary_stats(result),
        'failed': result.n_failed,
    }
    path.write_bytes(orjson.dumps(
        summary, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    ))
    logger.info(f"[SUMMARY] Written {path}")
    return path


def write_outputs(result: SweepResult, out_dir: Path, stem: str) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    csv_path = write_csv(result, out_dir / f"{stem}.csv")
    json_path = write_summary(result, out_dir / f"{stem}.summary.json")
    return csv_path, json_path


__all__ = [
    'PointOutcome', 'SweepResult', 'grid', 'run_sweep', 'write_csv', 'write_summary', 'write_outputs',
    'format_value', 'STATUS_OK',
]
