"""
Test suite for nlflux.
"""
