import sys

from airyline.cli import main

sys.exit(main())
