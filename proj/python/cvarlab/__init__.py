"""CVaR-sensitive stochastic shortest paths.

Two approximate CVaR value-iteration solvers (linear interpolation and
quantile representation), exact forward policy evaluation with CVaR and VaR
outputs, the gridworld/river benchmark generators, and a Monte-Carlo
baseline. The heavy lifting lives in the _cvarlab extension module.
"""

try:
    from ._cvarlab import *  # noqa: F401,F403
    from . import _cvarlab as _native
except ImportError:  # running against a build tree on PYTHONPATH
    from _cvarlab import *  # noqa: F401,F403
    import _cvarlab as _native

__all__ = [name for name in dir(_native) if not name.startswith("_")]
__version__ = "0.1.0"
