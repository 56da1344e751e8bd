import sys

from netfhn.cli import main

sys.exit(main())
