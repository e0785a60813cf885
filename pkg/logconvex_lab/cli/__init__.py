"""Command-line interface for Logconvex Lab."""

from logconvex_lab.cli.main import main

__all__ = ["main"]
