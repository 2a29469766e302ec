"""Over-the-air electromagnetic signal processing toolkit."""

from esp._core import *  # noqa: F401,F403
from esp._core import __version__  # noqa: F401
