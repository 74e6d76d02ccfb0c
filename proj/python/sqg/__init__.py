"""Similar-question generation toolkit: prompts, metrics, knowledge bases."""

from ._sqg import *  # noqa: F401,F403
from ._sqg import __version__  # noqa: F401
