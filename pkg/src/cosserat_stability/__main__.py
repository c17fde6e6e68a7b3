import sys

from cosserat_stability.cli import main

sys.exit(main())
