"""Test suite for fracsis."""
