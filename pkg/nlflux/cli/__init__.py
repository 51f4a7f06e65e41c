"""
Command implementations for the nlflux CLI.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""
