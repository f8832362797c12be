#!/usr/bin/env python3
"""Randomized structural suite: drift nonnegativity, norm inequality,
adjacency connectivity, interpolation, transfer arithmetic (10^6 trials)."""

import sys

from batchelor_lab.cli import main

if __name__ == "__main__":
    sys.exit(main(["check", "--verbose", *sys.argv[1:]]))
