"""Exact verification engine for Lie bialgebra structures on current algebras g[x]."""

__version__ = "0.1.0"
