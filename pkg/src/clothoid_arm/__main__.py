import sys

from clothoid_arm.cli import main

sys.exit(main())
