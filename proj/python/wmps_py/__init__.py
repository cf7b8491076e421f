"""Weak-measurement MPS trajectory simulator (Python bindings)."""

from ._wmps import *  # noqa: F401,F403
from ._wmps import __doc__  # noqa: F401

__version__ = "0.1.0"
