#!/usr/bin/env python3
"""Evaluate tensed propositions from the command line.

Examples:
    python scripts/tau.py eval --model artifacts/models/rabi.model --prop "F[1.0471975512](A)"
    python scripts/tau.py sweep --model artifacts/models/rabi.model --template "F[t](A)" --grid 0.1:3.1:0.5
    python scripts/tau.py verify --family commuting --cases 200 --seed 7
"""

import sys
from pathlib import Path

# Add tense_logic package to path
package_path = Path(__file__).parent.parent
sys.path.insert(0, str(package_path))

from tense_logic.cli import main


if __name__ == "__main__":
    exit(main())
