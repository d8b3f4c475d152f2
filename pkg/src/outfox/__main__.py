import sys

from outfox.cli import main

sys.exit(main())
