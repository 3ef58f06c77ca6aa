"""Born-Infeld soliton surfaces: Barbashov-Chernikov evaluation, Bjorling solvers and checks."""

from .errors import BisolitonError
from .expr import differentiate, evaluate, parse
from .surface import BCSurface, ExprFunction, ParamPoint

__all__ = ["BisolitonError", "parse", "evaluate", "differentiate", "BCSurface", "ExprFunction", "ParamPoint"]
__version__ = "0.1.0"
