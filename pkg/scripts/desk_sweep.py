#!/usr/bin/env python3
"""Desk-scale kappa sweep: {0.04, 0.01, 0.0025} at N=64, 8 seeds each.

Produces per-seed series/summaries, the Batchelor fit, and figure-data CSVs
under the output directory (default sweep-desk/).
"""

import sys

from batchelor_lab.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--out", "sweep-desk"]
    sys.exit(main(["sweep", "--preset", "desk", *args]))
