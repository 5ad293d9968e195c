# this_file: fracsis/src/fracsis/common/__init__.py
"""Shared building blocks: errors, types, configuration and utilities."""
