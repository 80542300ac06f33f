"""Shared test setup.

Monte Carlo results depend on (seed, samples, worker count); pinning the
worker count makes every stochastic assertion machine-independent.
"""

import os

os.environ["OPLIMITS_WORKERS"] = "4"
