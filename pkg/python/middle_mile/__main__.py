#!/usr/bin/env python3
"""
Middle Mile Planner Entry Point

This allows running the planner with: python -m middle_mile
"""

import sys

from .cli import main

sys.exit(main())
