import sys

from gowsn.cli import main

sys.exit(main())
