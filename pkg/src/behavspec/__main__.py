import sys

from behavspec.cli import main

sys.exit(main())
