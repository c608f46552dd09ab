"""Weekly mean-reversion FX strategy toolkit.

Thin re-export of the compiled extension. Installed wheels carry the
extension inside this package; the development tree puts it on PYTHONPATH
next to the build directory instead.
"""

try:
    from ._meanrev import *  # noqa: F401,F403
    from ._meanrev import __doc__  # noqa: F401
except ImportError:  # dev tree: extension lives in the cmake build dir
    from _meanrev import *  # noqa: F401,F403
    from _meanrev import __doc__  # noqa: F401

__version__ = "0.1.0"
