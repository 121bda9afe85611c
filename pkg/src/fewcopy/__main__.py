import sys

from fewcopy.cli import main

sys.exit(main())
