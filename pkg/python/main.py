#!/usr/bin/env python3
"""
Middle Mile Planner - Main Entry Point

Run the planner from a source checkout without installing it.

Usage:
    python main.py gen --n-aps 10 --seed 42 --out scenario.json
    python main.py plan --scenario scenario.json --topology lp
    python main.py batch [--config run.json]
"""

import sys
from pathlib import Path

# Add the middle_mile package to path
sys.path.insert(0, str(Path(__file__).parent))

from middle_mile.cli import main

if __name__ == "__main__":
    sys.exit(main())
