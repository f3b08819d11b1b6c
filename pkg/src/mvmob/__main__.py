import sys

from mvmob.cli import main

sys.exit(main())
