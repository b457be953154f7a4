import sys

from .scripts.gfmreduce_cli import main

sys.exit(main())
