"""
CSV outputs and the metadata sidecar of a command run.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import csv
import platform
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import scipy

from .. import __version__
from .config import RunConfig
from .diagnostics import DiagnosticsReport
from .evolve import Trajectory
from .serializer import write_canonical_yaml

FLOAT_FORMAT = '.16e'
META_FILENAME = 'meta.yaml'


def format_cell(value: Any) -> str:
    """One CSV cell: floats with 17 significant digits, empty for missing values."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def write_rows_csv(path: Union[str, Path], columns: Sequence[str],
                   rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
    return path


def write_trajectory_csv(path: Union[str, Path], traj: Trajectory) -> Path:
    """One row per recorded time: t, then rho[j] for every node."""
    n = traj.grid.n_points
    columns = ['t'] + [f'rho[{j}]' for j in range(n)]
    rows = (
        dict(zip(columns, [float(t)] + [float(v) for v in p.values]))
        for t, p in zip(traj.times, traj.profiles)
    )
    return write_rows_csv(path, columns, rows)


def write_report_csv(path: Union[str, Path], report: DiagnosticsReport) -> Path:
    return write_rows_csv(path, report.columns(), report.rows())


def read_rows_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def versions() -> Dict[str, str]:
    return {
        'nlflux': __version__,
        'numpy': np.__version__,
        'python': platform.python_version(),
        'scipy': scipy.__version__,
    }


def write_meta(out_dir: Union[str, Path], command: str, config_path: str, cfg: RunConfig,
               files: Sequence[str], stats: Optional[Mapping[str, Any]] = None) -> Path:
    """
    Write ``meta.yaml`` next to the command's outputs.

    Args:
        out_dir: Output directory of the run
        command: Name of the command that produced the outputs
        config_path: Configuration path as given on the command line
        cfg: Loaded configuration, fingerprinted through its canonical form
        files: Output files the sidecar describes
        stats: Run statistics (plain scalars, lists or mappings)

    Returns:
        Path of the written sidecar
    """
    meta = {
        'command': command,
        'config': config_path,
        'config_crc32': cfg.fingerprint,
        'seed': cfg.seed,
        'grid': {'n': cfg.grid.n_points, 'L': cfg.grid.half_length},
        'files': sorted(files),
        'versions': versions(),
        'stats': dict(stats or {}),
    }
    return write_canonical_yaml(meta, Path(out_dir) / META_FILENAME)
