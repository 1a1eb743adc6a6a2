from pathlib import Path

import pytest

from coqbridge import CoqConfig
from coqbridge.testing import server_command
from coqbridge.testing.server import default_stdlib

CORE_CORPUS = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "corpus"


@pytest.fixture
def config():
    return CoqConfig(server_command=server_command(),
                     installed_roots=[default_stdlib()])


@pytest.fixture
def test_v(tmp_path):
    target = tmp_path / "test.v"
    target.write_text((CORE_CORPUS / "test.v").read_text(encoding="utf-8"),
                      encoding="utf-8")
    return target
