"""
Canonical YAML for run metadata sidecars.

Sorted keys and block style through PyYAML's safe dumper, so identical
metadata always gives byte-identical files.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from pathlib import Path
from typing import Any, Union

import numpy as np
import yaml


def to_plain(data: Any) -> Any:
    """Replace numpy values, paths and tuples by the builtin types the safe dumper knows."""
    if isinstance(data, dict):
        return {str(k): to_plain(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_plain(v) for v in data]
    if isinstance(data, np.ndarray):
        return to_plain(data.tolist())
    if isinstance(data, np.generic):
        return data.item()
    if isinstance(data, Path):
        return str(data)
    return data


def to_canonical_yaml(data: Any) -> str:
    return yaml.safe_dump(to_plain(data), sort_keys=True, default_flow_style=False,
                          allow_unicode=True)


def write_canonical_yaml(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(to_canonical_yaml(data))
    return path


def read_metadata(path: Union[str, Path]) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return yaml.safe_load(f)
