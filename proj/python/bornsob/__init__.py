"""Python bindings for the bornsob C++ library."""

from ._bornsob import *  # noqa: F401,F403
from ._bornsob import __version__  # noqa: F401
