#!/usr/bin/env python3
"""Long-running high-resolution case: kappa=0.0025 at N=256 (flagged 'full').

Needed to resolve the Batchelor shell radius 10/sqrt(0.0025) = 200; expect
tens of minutes on a laptop-class machine.
"""

import sys

from batchelor_lab.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--out", "sweep-full"]
    sys.exit(main(["sweep", "--preset", "full", *args]))
