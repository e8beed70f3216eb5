"""Exact Hopf-algebraic calculus for branched rough paths.

Layers:

- ``trees``: canonical labeled rooted trees/forests, parsing, enumeration,
  symmetry factors, grafting.
- ``hopf``: the coproduct by admissible cuts, the grafting product, their
  duality, free generators and word counts.
- ``chargroup``: the truncated character group, grouplike elements, norms,
  dilation, p-variation.
- ``signature``: exact tree-indexed iterated integrals of piecewise-linear
  paths, multiplicativity over interval splits, word functionals.
- ``poly`` / ``elemdiff``: exact polynomial vector fields, elementary
  differentials, word compositions, the tree-indexed Taylor step.
- ``harness``: reference solving, remainder-order experiments, sharpness
  probe, the fractional binomial inequality, the tail constant.
- ``cli`` / ``report``: batch surface and figure rendering.
"""

__version__ = "0.1.0"
