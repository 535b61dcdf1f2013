"""nonhyp: desk-scale construction of nonhyperbolic ergodic measures for
circle-fiber step skew products and elliptic SL(2,R) cocycles.

Submodules follow the pipeline: codes -> fiber -> blending -> cifs ->
skeleton -> cascade -> suspension -> measures, orchestrated by cli.
"""

from . import errors
from .circle import Arc, circ_dist, wrap

__all__ = ["Arc", "circ_dist", "wrap", "errors"]

__version__ = "0.1.0"
