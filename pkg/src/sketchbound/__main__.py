import sys

from sketchbound.cli import main

sys.exit(main())
