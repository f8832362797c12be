#!/usr/bin/env python3
"""Particle statistics: Lyapunov exponent estimate, det(J)=1 check, one-point
Brownian displacement variance, and the Lambda*s mixing-rate cap table."""

import sys

from batchelor_lab.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--particles", "10000", "--horizon", "20",
                            "--out", "lagrangian-output"]
    sys.exit(main(["lagrangian", *args]))
