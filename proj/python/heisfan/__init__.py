"""Spectra, eigenfunctions and quantum-limit diagnostics on Heisenberg nilmanifold products."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
