import sys

from hacknizer.cli import main

sys.exit(main())
