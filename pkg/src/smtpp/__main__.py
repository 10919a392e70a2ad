import sys

from smtpp.cli import main

sys.exit(main())
