import sys

from attack_tagger.cli import main

sys.exit(main())
