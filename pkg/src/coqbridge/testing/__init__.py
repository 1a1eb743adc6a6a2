"""Simulated Coq language server used by the test suite.

The simulator speaks the genuine LSP wire protocol as a stdio child
process and checks a documented micro-subset of Coq, so the whole suite
runs without a Coq installation. Spawn it with::

    [sys.executable, "-m", "coqbridge.testing.server"]
"""

from .server import default_stdlib  # noqa: F401


def server_command() -> list:
    import sys

    return [sys.executable, "-m", "coqbridge.testing.server"]
