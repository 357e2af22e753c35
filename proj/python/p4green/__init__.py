"""Python front end to the p4green simulator."""

from ._p4green import *  # noqa: F401,F403
from ._p4green import __doc__  # noqa: F401

__version__ = "0.1.0"
