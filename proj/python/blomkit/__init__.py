"""Python access to the blomkit C++ core."""

from ._blomkit import *  # noqa: F401,F403
from ._blomkit import __doc__  # noqa: F401
