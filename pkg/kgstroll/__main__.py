# Allows `python -m kgstroll ...`

import sys

from kgstroll.main import main

sys.exit(main())
