"""
FermiBalance – Entry point
===========================
Run the command-line interface.
"""

import sys
import os

# Ensure project root is on the path so absolute imports work when running
# directly with `python main.py`.
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.app import cli


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
