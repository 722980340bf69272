"""Pointwise multilinear algebra of G2-structures with torsion."""
from .exterior import (Form, BackendError, GradeError, contract, e, hodge, inner,
                       interior, norm2, volume, wedge)

__all__ = ["Form", "BackendError", "GradeError", "contract", "e", "hodge", "inner",
           "interior", "norm2", "volume", "wedge"]
__version__ = "0.1.0"
