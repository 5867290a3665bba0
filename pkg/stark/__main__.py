import sys

from stark.acshift.cli import main

sys.exit(main())
