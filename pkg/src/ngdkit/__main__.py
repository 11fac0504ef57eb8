import sys

from ngdkit.cli import main

sys.exit(main())
