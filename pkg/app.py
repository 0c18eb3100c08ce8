"""Command-line entry: python app.py <subcommand> [flags]."""

import sys

from parkernels.cli import main

if __name__ == "__main__":
    sys.exit(main())
