"""Factor model backtesting with a from-scratch LSTM."""

from ._core import *  # noqa: F401,F403
from ._core import FactorbtError, __doc__  # noqa: F401
