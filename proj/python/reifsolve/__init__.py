"""reifsolve: numerical laboratory for nonlocal elliptic boundary regularity."""

try:
    from ._reifsolve import *  # noqa: F401,F403
    from ._reifsolve import __version__  # noqa: F401
except ImportError:  # in-build layout: the extension sits on sys.path directly
    from _reifsolve import *  # noqa: F401,F403
    from _reifsolve import __version__  # noqa: F401
