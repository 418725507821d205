"""Low-rank mixed multinomial logit estimation from assortment choices."""

from ._mmnl import *  # noqa: F401,F403
from ._mmnl import RESULTS_HEADER, __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
