"""Allow ``python -m seqcp`` to run the command-line interface."""

import sys

from seqcp.cli import main

if __name__ == "__main__":
    sys.exit(main())
