import sys

from metrocross.cli import main

sys.exit(main())
