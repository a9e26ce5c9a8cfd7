import sys

from qdiv.cli import main

sys.exit(main())
