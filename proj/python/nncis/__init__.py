"""Control invariant set synthesis and safe MPC for ReLU network dynamics."""

from ._nncis import *  # noqa: F401,F403
from ._nncis import NncisError

__all__ = [name for name in dir() if not name.startswith("_")]
