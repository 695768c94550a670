import sys

from featprop.runner.cli import main

sys.exit(main())
