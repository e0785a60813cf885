"""Entry point for python -m logconvex_lab."""

import sys


def main():
    """Run the command-line interface."""
    from logconvex_lab.cli.main import main as cli_main
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
