"""
nlflux - simulation and verification toolkit for the 1-D nonlocal flux
equation with fractional diffusion.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

__version__ = "1.0.0"
