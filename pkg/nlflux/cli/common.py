"""
Shared plumbing for nlflux commands: options, logging, exit codes.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass, field
import functools
import logging
from pathlib import Path
import sys
from typing import Any, Callable, Dict, List, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from ..core.burgers import BranchError, HorizonError, InversionError
from ..core.config import ConfigError, RunConfig, load_config
from ..core.diagnostics import FitError
from ..core.evolve import BlowUpError, UnsupportedConfinementError
from ..core.mild import DivergenceError
from ..core.particles import CollisionError
from ..core.report import write_meta

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_HORIZON = 4
EXIT_NUMERICAL = 5

# checked in order; HorizonError and FitError are ValueErrors
_EXIT_CODES = [
    (ConfigError, EXIT_CONFIG, "Configuration error"),
    (UnsupportedConfinementError, EXIT_CONFIG, "Configuration error"),
    (BlowUpError, EXIT_BLOWUP, "Blow-up"),
    (HorizonError, EXIT_HORIZON, "Horizon exceeded"),
    (InversionError, EXIT_NUMERICAL, "Numerical failure"),
    (DivergenceError, EXIT_NUMERICAL, "Numerical failure"),
    (CollisionError, EXIT_NUMERICAL, "Numerical failure"),
    (BranchError, EXIT_NUMERICAL, "Numerical failure"),
    (FitError, EXIT_NUMERICAL, "Numerical failure"),
    (FloatingPointError, EXIT_NUMERICAL, "Numerical failure"),
    (ValueError, EXIT_NUMERICAL, "Numerical failure"),
]


@dataclass
class CommandResult:
    """What a command body wrote, and the statistics recorded in meta.yaml."""

    files: List[str] = field(default_factory=list)
    stats: Dict[str, Any] = field(default_factory=dict)
    table: Optional[Table] = None


def run_options(func: Callable) -> Callable:
    """Options every run command accepts."""
    options = [
        click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
                     help='Run configuration (YAML)'),
        click.option('--out', type=click.Path(file_okay=False),
                     help='Output directory (overrides outputs.dir)'),
        click.option('--seed', type=click.IntRange(min=0), help='Random seed (overrides seed)'),
        click.option('--quiet', '-q', is_flag=True, help='Only warnings and errors'),
        click.option('--verbose', '-v', is_flag=True, help='Debug logging'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def setup_logging(quiet: bool = False, verbose: bool = False) -> logging.Logger:
    """Install one RichHandler on the package logger."""
    logger = logging.getLogger('nlflux')
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_time=False, show_path=False)
    logger.addHandler(handler)
    if verbose:
        logger.setLevel(logging.DEBUG)
    elif quiet:
        logger.setLevel(logging.WARNING)
    else:
        logger.setLevel(logging.INFO)
    logger.propagate = False
    return logger


def exit_code_for(error: BaseException) -> Optional[int]:
    for kind, code, _ in _EXIT_CODES:
        if isinstance(error, kind):
            return code
    return None


def _label_for(error: BaseException) -> str:
    for kind, _, label in _EXIT_CODES:
        if isinstance(error, kind):
            return label
    return "Error"


def summary_table(title: str, rows: Dict[str, Any]) -> Table:
    table = Table(title=title)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right")
    for name, value in rows.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        table.add_row(name, str(value))
    return table


def execute(command: str, body: Callable[[RunConfig, Path], CommandResult], config_path: str,
            out: Optional[str], seed: Optional[int], quiet: bool, verbose: bool):
    """
    Load the configuration, run ``body`` and exit with the mapped status.

    ``body`` writes its outputs under the run's output directory and returns
    the files and statistics; meta.yaml is written here.
    """
    console = Console(quiet=quiet)
    error_console = Console(stderr=True)
    setup_logging(quiet, verbose)
    try:
        cfg = load_config(config_path).with_overrides(out, seed)
        out_dir = cfg.outputs
        out_dir.mkdir(parents=True, exist_ok=True)
        result = body(cfg, out_dir)
        write_meta(out_dir, command, config_path, cfg, result.files, result.stats)
    except Exception as e:
        code = exit_code_for(e)
        if code is None:
            raise
        error_console.print(f"[red]✗[/red] {_label_for(e)}: {escape(str(e))}", soft_wrap=True)
        sys.exit(code)

    if result.table is not None:
        console.print(result.table)
    console.print(f"[green]✓[/green] {command}: wrote {len(result.files) + 1} files to "
                  f"{escape(str(out_dir))}", soft_wrap=True)
    sys.exit(EXIT_OK)
