"""Reconfigurable surface-wave pathway model (C++ core)."""

from ._surfwave import *  # noqa: F401,F403
from ._surfwave import LayoutError, __doc__  # noqa: F401

__version__ = "0.3.0"
