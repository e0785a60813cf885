"""Tests for logconvex_lab."""
