import sys

from icefront.cli import main

sys.exit(main())
