"""
Tests for run configuration loading and validation.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from pathlib import Path

import pytest

from nlflux.core.config import ConfigError, load_config, parse_config_string
from nlflux.core.grid import mass

FIXTURES = Path(__file__).parent / 'fixtures'


def _error_for(name: str) -> ConfigError:
    with pytest.raises(ConfigError) as info:
        load_config(str(FIXTURES / 'invalid' / name))
    return info.value


def test_load_valid_config():
    """Test that a complete configuration builds its parameter objects."""
    cfg = load_config(str(FIXTURES / 'valid' / 'simulate_small.yaml'))
    assert cfg.grid.n_points == 64
    assert cfg.grid.half_length == 8.0
    assert cfg.physics.alpha == 1.5
    assert cfg.physics.gamma == 0.0
    assert cfg.solver.dt == 0.05
    assert cfg.solver.record_every == 2
    assert cfg.solver.scheme == 'direct'
    assert cfg.outputs == Path('out/small')
    assert cfg.seed == 3
    assert cfg.line('grid.n') == 6


def test_fingerprint_ignores_formatting_and_comments():
    """Test that flow style, key order and comments leave the fingerprint unchanged."""
    block = load_config(str(FIXTURES / 'valid' / 'simulate_small.yaml'))
    flow = load_config(str(FIXTURES / 'valid' / 'simulate_small_reformatted.yaml'))
    assert block.fingerprint == flow.fingerprint
    changed = parse_config_string("grid:\n  n: 64\n  L: 8.5\n")
    assert changed.fingerprint != parse_config_string("grid:\n  n: 64\n  L: 8.0\n").fingerprint


def test_schema_violation_reports_line_and_field():
    """Test that an odd grid size names grid.n and its line."""
    error = _error_for('odd_grid.yaml')
    assert error.field == 'grid.n'
    assert error.line == 5
    assert "line 5" in str(error)


def test_unknown_key_is_rejected():
    """Test that misspelled options are not silently ignored."""
    error = _error_for('unknown_key.yaml')
    assert error.field == 'solver'
    assert error.line == 4
    assert 'stepsize' in error.message


def test_missing_grid_is_reported_at_root():
    """Test that the grid section is mandatory."""
    error = _error_for('no_grid.yaml')
    assert error.field == '<root>'
    assert 'grid' in error.message


def test_malformed_yaml_has_a_line():
    """Test that syntax errors carry a source line."""
    error = _error_for('broken.yaml')
    assert error.line is not None
    assert error.message.startswith('invalid YAML')


def test_inconsistent_solver_options_are_config_errors():
    """Test that parameter-object checks surface as ConfigError."""
    error = _error_for('dt_exceeds_end.yaml')
    assert error.field == 'solver'
    assert error.line == 4


def test_non_mapping_document():
    """Test that a bare list is not a configuration."""
    with pytest.raises(ConfigError) as info:
        parse_config_string("- 1\n- 2\n")
    assert info.value.line == 1


def test_missing_configuration_file():
    """Test the error for a path that does not exist."""
    with pytest.raises(ConfigError, match='not found'):
        load_config('/nonexistent/run.yaml')


def test_required_sections():
    """Test lookups of sections a command needs."""
    cfg = parse_config_string("grid:\n  n: 16\n  L: 2.0\n")
    assert cfg.physics is None
    with pytest.raises(ConfigError) as info:
        cfg.require_physics()
    assert info.value.field == 'physics'
    with pytest.raises(ConfigError):
        cfg.require_solver()
    with pytest.raises(ConfigError):
        cfg.section('exact')


def test_initial_data_defaults_and_errors():
    """Test the default semicircle and the reporting of bad builder arguments."""
    cfg = parse_config_string("grid:\n  n: 256\n  L: 4.0\n")
    assert mass(cfg.initial_profile()) == pytest.approx(1.0, abs=1e-3)
    bad = parse_config_string(
        "grid:\n  n: 64\n  L: 4.0\ninitial_data:\n  kind: gaussian\n  sigma: -1.0\n"
    )
    with pytest.raises(ConfigError) as info:
        bad.initial_profile()
    assert info.value.field == 'initial_data'
    assert info.value.line == 4


def test_unknown_initial_kind_fails_validation():
    """Test that the kind is checked by the schema."""
    with pytest.raises(ConfigError) as info:
        parse_config_string("grid:\n  n: 64\n  L: 4.0\ninitial_data:\n  kind: square\n")
    assert info.value.field == 'initial_data.kind'
    assert info.value.line == 5


def test_file_initial_data_is_relative_to_the_config():
    """Test that initial data files resolve next to the configuration."""
    cfg = load_config(str(FIXTURES / 'valid' / 'from_file.yaml'))
    p = cfg.initial_profile()
    assert p.values.max() == pytest.approx(1.0)
    assert mass(p) == pytest.approx(1.0, abs=1e-6)


def test_missing_initial_data_file(tmp_path):
    """Test that an absent data file is a configuration error."""
    path = tmp_path / 'run.yaml'
    path.write_text("grid:\n  n: 64\n  L: 4.0\ninitial_data:\n  kind: file\n  path: missing.csv\n")
    with pytest.raises(ConfigError) as info:
        load_config(str(path)).initial_profile()
    assert info.value.field == 'initial_data.path'
    assert info.value.line == 6


def test_overrides():
    """Test command-line overrides of the output directory and seed."""
    cfg = parse_config_string("grid:\n  n: 16\n  L: 2.0\nseed: 1\n")
    assert cfg.outputs == Path('out')
    changed = cfg.with_overrides(out='results/a', seed=9)
    assert changed.outputs == Path('results/a')
    assert changed.seed == 9
    assert cfg.with_overrides() is cfg


def test_shipped_configurations_load():
    """Test that every reference configuration validates and builds its data."""
    shipped = sorted((Path(__file__).parents[2] / 'configs').glob('*.yaml'))
    assert shipped
    for path in shipped:
        cfg = load_config(str(path))
        assert cfg.initial_profile().grid == cfg.grid
