#!/usr/bin/env python3
"""
Spectral zeta toolkit - perturbative spectral zeta functions, heat kernels
and Casimir energies of inhomogeneous strings and drums.

Command-line entry point.
"""

import sys
import os

# Add core modules to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'core'))

from cli import main


if __name__ == '__main__':
    sys.exit(main())
