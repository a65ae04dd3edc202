import sys

from robocallguard.cli import main

sys.exit(main())
