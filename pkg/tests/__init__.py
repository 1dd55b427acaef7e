"""Tests for python_blochobs."""
