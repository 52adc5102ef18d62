#!/usr/bin/env python3
"""
Rough forms command-line interface.
Runs the CLI from a source checkout without installing the package.
"""
import sys
import os

# Add the current directory to the path
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from src.rough_forms.main import main

if __name__ == "__main__":
    sys.exit(main())
