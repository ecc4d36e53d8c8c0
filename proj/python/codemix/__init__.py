"""Dependency parsing toolkit for Hindi-English code-mixed text.

Thin re-export of the C++ extension module. Installed builds ship the
extension inside this package; in-tree test runs find it on sys.path
(the CMake build directory).
"""

try:
    from ._codemix import *  # noqa: F401,F403
    from ._codemix import __doc__  # noqa: F401
except ImportError:
    from _codemix import *  # noqa: F401,F403
    from _codemix import __doc__  # noqa: F401
