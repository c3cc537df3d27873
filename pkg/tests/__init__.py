"""Test suite for cavity-bragg."""
