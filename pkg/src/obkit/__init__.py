"""Exact finite verification of bounded-orbit and Bergman-type constructions.

Modules: ``metric`` (pre-metrics, d1, nets, geodesics, composition bounds),
``urysohn`` (Katetov extensions, amalgams, factorisations), ``trees`` (tree
isometries), ``tower`` and ``unitary`` (exact orthogonal operators),
``groups`` (finite group metrics and actions), ``circular`` (cyclic orders)
and ``cli``.
"""

__version__ = "0.1.0"
