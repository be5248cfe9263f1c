import sys

from spicereg.main import main

sys.exit(main())
