"""Allow ``python -m toral``."""
import sys

from toral.cli import main

sys.exit(main())
