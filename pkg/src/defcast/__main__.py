import sys

from defcast.cli import main

sys.exit(main())
