import sys

from causal_horizon.cli import main

sys.exit(main())
