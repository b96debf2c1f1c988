"""Executable nonstandard-analysis toolkit.

Modules:

* :mod:`artifact.hyper` - exact truncated Levi-Civita numbers with infinitesimals.
* :mod:`artifact.expr` and :mod:`artifact.calculus` - expressions, derivatives,
  hyperfinite Riemann sums, Euler polygons, interval measures.
* :mod:`artifact.formulas` - st-in formulas, Delta-st classification and the
  quantifier rewriter.
* :mod:`artifact.forcing` - desk-scale forcing conditions over hereditarily
  finite sets and the thick/thin combinatorics.
* :mod:`artifact.cli` - the ``artifact`` command line.
"""

__version__ = "0.1.0"
