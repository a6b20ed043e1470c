import sys

from orthant_mc.cli import main

sys.exit(main())
