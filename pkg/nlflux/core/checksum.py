"""
CRC32 fingerprints of run configurations.

The fingerprint is the big-endian CRC32 of the canonical YAML text, base64
encoded without padding, so formatting and comments do not change it.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import base64
from typing import Any
import zlib

from .serializer import to_canonical_yaml


def fingerprint_config(data: Any) -> str:
    crc = zlib.crc32(to_canonical_yaml(data).encode('utf-8'))
    return base64.b64encode(crc.to_bytes(4, byteorder='big')).decode('ascii').rstrip('=')
