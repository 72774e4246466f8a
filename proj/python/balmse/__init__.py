"""Balanced MSE autoencoders for mixed tabular data."""

from ._balmse import *  # noqa: F401,F403
from ._balmse import __version__  # noqa: F401
