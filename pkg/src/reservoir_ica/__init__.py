"""Reservoir-expanded online ICA.

A streaming blind-source-separation toolkit: echo-state reservoir expansion,
EMA whitening with subspace-injection diagnostics, natural-gradient ICA, and a
multi-seed benchmark harness that writes its results as CSV.
"""

__version__ = "0.1.0"
