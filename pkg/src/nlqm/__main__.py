"""Allow ``python -m nlqm`` as an alias for the ``nlqm`` console script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
