import sys

from deepnorm_lab.experiments.cli import main

sys.exit(main())
