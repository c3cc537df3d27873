#!/usr/bin/env python3
"""Main entry point for cavity-bragg."""

import sys
from pathlib import Path

# Add the cavity_bragg package to Python path
sys.path.insert(0, str(Path(__file__).parent))

from cavity_bragg.cli import main

if __name__ == "__main__":
    sys.exit(main())
