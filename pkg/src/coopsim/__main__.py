import sys

from coopsim.cli import main

sys.exit(main())
