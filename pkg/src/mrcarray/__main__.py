import sys

from mrcarray.cli import main

sys.exit(main())
