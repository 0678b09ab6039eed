import sys

from hypercross.cli import main

sys.exit(main())
