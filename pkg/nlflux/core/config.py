"""
Run configuration: YAML loading with line tracking, JSON-schema validation
and conversion into solver parameter objects.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass, field, replace
from io import StringIO
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
from jsonschema.exceptions import ValidationError as JsonSchemaValidationError
from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap, CommentedSeq
from ruamel.yaml.error import MarkedYAMLError, YAMLError

from .checksum import fingerprint_config
from .evolve import DYSON_VARIANTS, SCHEMES, PhysicsParams, SolverConfig
from .grid import Grid, Profile
from .initial import build_initial

logger = logging.getLogger(__name__)

INITIAL_KINDS = [
    'semicircle', 'smoothed_semicircle', 'positive_semicircle', 'gaussian', 'cauchy',
    'indicator', 'shifted', 'critical_power', 'file',
]
COMPARE_METHODS = ['direct', 'splitting', 'strang', 'exact', 'picard']

_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}
_NONNEGATIVE = {'type': 'number', 'minimum': 0}
_EXPONENT = {
    'type': 'object',
    'required': ['q', 'theta'],
    'additionalProperties': False,
    'properties': {
        'q': {'anyOf': [{'type': 'number', 'minimum': 1}, {'enum': ['inf']}]},
        'theta': {'type': 'integer', 'minimum': 0, 'maximum': 2},
    },
}
_WINDOW = {'type': 'array', 'items': _POSITIVE, 'minItems': 2, 'maxItems': 2}

RUN_CONFIG_SCHEMA: Dict[str, Any] = {
    'type': 'object',
    'required': ['grid'],
    'additionalProperties': False,
    'properties': {
        'physics': {
            'type': 'object',
            'required': ['alpha', 'nu'],
            'additionalProperties': False,
            'properties': {
                'alpha': {'type': 'number', 'minimum': 0, 'maximum': 2},
                'nu': _POSITIVE,
                'gamma': _NONNEGATIVE,
            },
        },
        'grid': {
            'type': 'object',
            'required': ['n', 'L'],
            'additionalProperties': False,
            'properties': {
                'n': {'type': 'integer', 'minimum': 8, 'multipleOf': 2},
                'L': _POSITIVE,
            },
        },
        'initial_data': {
            'type': 'object',
            'required': ['kind'],
            'properties': {'kind': {'enum': INITIAL_KINDS}},
        },
        'solver': {
            'type': 'object',
            'required': ['dt', 't_end'],
            'additionalProperties': False,
            'properties': {
                'dt': _POSITIVE,
                't_end': _NONNEGATIVE,
                'scheme': {'enum': list(SCHEMES)},
                'dyson_substep': {'enum': list(DYSON_VARIANTS)},
                'dealias': {'type': 'boolean'},
                'record_every': {'type': 'integer', 'minimum': 1},
                'mollify_width': _POSITIVE,
                'check_stability': {'type': 'boolean'},
            },
        },
        'exact': {
            'type': 'object',
            'required': ['times'],
            'additionalProperties': False,
            'properties': {
                'times': {'type': 'array', 'items': _POSITIVE, 'minItems': 1},
                'mu': _NONNEGATIVE,
                'compare_window': _POSITIVE,
            },
        },
        'decay': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'exponents': {'type': 'array', 'items': _EXPONENT, 'minItems': 1},
                'window': _WINDOW,
            },
        },
        'mild': {
            'type': 'object',
            'required': ['T'],
            'additionalProperties': False,
            'properties': {
                'T': _POSITIVE,
                'm': {'type': 'integer', 'minimum': 1},
                'max_iter': {'type': 'integer', 'minimum': 1},
                'tol': _POSITIVE,
                'rule': {'enum': ['trapezoid', 'rectangle']},
                'enforce_smallness': {'type': 'boolean'},
            },
        },
        'particles': {
            'type': 'object',
            'required': ['n', 't_end', 'dt'],
            'additionalProperties': False,
            'properties': {
                'n': {'type': 'integer', 'minimum': 1},
                't_end': _NONNEGATIVE,
                'dt': _POSITIVE,
                'gamma': _NONNEGATIVE,
                'noise': {'type': 'boolean'},
                'ensemble': {'type': 'integer', 'minimum': 1},
                'spread': _POSITIVE,
                'positions': {'type': 'array', 'items': {'type': 'number'}, 'minItems': 1},
                'bandwidth': _POSITIVE,
                'burn_in': _NONNEGATIVE,
                'sample_every': {'type': 'integer', 'minimum': 1},
            },
        },
        'compare': {
            'type': 'object',
            'required': ['methods', 'times'],
            'additionalProperties': False,
            'properties': {
                'methods': {'type': 'array', 'items': {'enum': COMPARE_METHODS},
                            'minItems': 2, 'maxItems': 2},
                'times': {'type': 'array', 'items': _POSITIVE, 'minItems': 1},
                'mu': _NONNEGATIVE,
            },
        },
        'outputs': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {'dir': {'type': 'string', 'minLength': 1}},
        },
        'seed': {'type': 'integer', 'minimum': 0},
    },
}


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


def _to_plain(node: Any) -> Any:
    if isinstance(node, dict):
        return {str(k): _to_plain(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_to_plain(v) for v in node]
    if isinstance(node, bool) or node is None:
        return node
    if isinstance(node, int):
        return int(node)
    if isinstance(node, float):
        return float(node)
    if isinstance(node, str):
        return str(node)
    return node


def _line_of(doc: Any, path: Sequence[Any]) -> Optional[int]:
    """1-based source line of the node at ``path``, or of its nearest ancestor."""
    node = doc
    line = None
    for key in path:
        if isinstance(node, CommentedMap) and key in node:
            line = node.lc.key(key)[0] + 1
        elif isinstance(node, CommentedSeq) and isinstance(key, int) and key < len(node):
            line = node.lc.item(key)[0] + 1
        else:
            break
        node = node[key]
    if line is None and isinstance(doc, (CommentedMap, CommentedSeq)):
        line = doc.lc.line + 1
    return line


def _first_violation(plain: Dict[str, Any]) -> Optional[JsonSchemaValidationError]:
    validator = jsonschema.Draft7Validator(RUN_CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(plain), key=lambda e: list(map(str, e.absolute_path)))
    return errors[0] if errors else None


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    raw: Dict[str, Any]
    physics: Optional[PhysicsParams] = None
    solver: Optional[SolverConfig] = None
    initial_data: Dict[str, Any] = field(default_factory=lambda: {'kind': 'semicircle'})
    outputs: Path = Path('out')
    seed: int = 0
    source: Optional[Path] = None
    lines: Dict[str, int] = field(default_factory=dict)

    @property
    def fingerprint(self) -> str:
        return fingerprint_config(self.raw)

    def section(self, name: str) -> Dict[str, Any]:
        """A command section; ConfigError when absent."""
        if name not in self.raw:
            raise ConfigError(f"section '{name}' is required for this command", field=name)
        return dict(self.raw[name])

    def require_physics(self) -> PhysicsParams:
        if self.physics is None:
            raise ConfigError("section 'physics' is required for this command", field='physics')
        return self.physics

    def require_solver(self) -> SolverConfig:
        if self.solver is None:
            raise ConfigError("section 'solver' is required for this command", field='solver')
        return self.solver

    def line(self, dotted: str) -> Optional[int]:
        return self.lines.get(dotted)

    def initial_profile(self) -> Profile:
        alpha = self.physics.alpha if self.physics else 2.0
        entry = dict(self.initial_data)
        if entry.get('kind') == 'file':
            path = Path(entry.get('path', ''))
            if not path.is_absolute() and self.source is not None:
                path = self.source.parent / path
            if not path.exists():
                raise ConfigError(f"initial data file not found: {path}",
                                  self.line('initial_data.path'), 'initial_data.path')
            entry['path'] = str(path)
        try:
            return build_initial(self.grid, entry, alpha)
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(str(e), self.line('initial_data'), 'initial_data') from e

    def with_overrides(self, out: Optional[str] = None, seed: Optional[int] = None) -> 'RunConfig':
        cfg = self
        if out is not None:
            cfg = replace(cfg, outputs=Path(out))
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        return cfg


def _collect_lines(doc: Any, prefix: str = '') -> Dict[str, int]:
    lines: Dict[str, int] = {}
    if isinstance(doc, CommentedMap):
        for key in doc:
            dotted = f"{prefix}{key}"
            lines[dotted] = doc.lc.key(key)[0] + 1
            lines.update(_collect_lines(doc[key], dotted + '.'))
    return lines


def _build(doc: Any, plain: Dict[str, Any], source: Optional[Path]) -> RunConfig:
    lines = _collect_lines(doc)

    def construct(section, factory, **kwargs):
        try:
            return factory(**kwargs)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), lines.get(section), section) from e

    grid_cfg = plain['grid']
    grid = construct('grid', Grid, n_points=grid_cfg['n'], half_length=grid_cfg['L'])
    physics = None
    if 'physics' in plain:
        physics = construct('physics', PhysicsParams, **plain['physics'])
    solver = None
    if 'solver' in plain:
        solver = construct('solver', SolverConfig, **plain['solver'])
    outputs = Path(plain.get('outputs', {}).get('dir', 'out'))
    return RunConfig(
        grid=grid,
        raw=plain,
        physics=physics,
        solver=solver,
        initial_data=plain.get('initial_data', {'kind': 'semicircle'}),
        outputs=outputs,
        seed=plain.get('seed', 0),
        source=source,
        lines=lines,
    )


def parse_config_string(text: str, source: Optional[Path] = None) -> RunConfig:
    """Parse and validate configuration text; every failure is a ConfigError."""
    yaml_parser = YAML()
    try:
        doc = yaml_parser.load(StringIO(text))
    except MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {e.problem or e}", line) from e
    except YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}") from e
    if not isinstance(doc, CommentedMap):
        raise ConfigError("configuration must be a mapping", 1)
    plain = _to_plain(doc)
    violation = _first_violation(plain)
    if violation is not None:
        path: List[Any] = list(violation.absolute_path)
        dotted = '.'.join(str(p) for p in path) or '<root>'
        raise ConfigError(violation.message, _line_of(doc, path), dotted)
    return _build(doc, plain, source)


def load_config(path: str) -> RunConfig:
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    with open(file_path, 'r', encoding='utf-8') as f:
        text = f.read()
    cfg = parse_config_string(text, file_path)
    logger.debug("loaded %s (crc32 %s)", file_path, cfg.fingerprint)
    return cfg
