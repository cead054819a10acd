"""Solver and certification suite for the rendezvous game on the infinite
line with unequal player speeds and an optional droppable marker.

Everything numeric runs on exact rationals; results come with duality
certificates and simulator replays rather than tolerances.
"""

from .rational import Rational, rational

__version__ = "0.1.0"

__all__ = ["Rational", "rational", "__version__"]
