#!/usr/bin/env python3
"""Logconvex Lab - Main entry point.

Usage:
    python logconvex_lab.py check logconvexity --config run.json --out results/
    python logconvex_lab.py certify --out results/
"""

import sys

if __name__ == "__main__":
    from logconvex_lab.cli.main import main as cli_main
    sys.exit(cli_main())
