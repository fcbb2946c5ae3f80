"""Python bindings for the energy-transport solver."""

from ._etm import *  # noqa: F401,F403
from ._etm import __doc__  # noqa: F401
