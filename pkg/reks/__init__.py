"""
reks: equivariant connectivity calculus and Real algebraic K-theory
checks on finite combinatorial models.
"""

from .core.version import get_app_version


__version__ = get_app_version()

__all__ = ["__version__"]
