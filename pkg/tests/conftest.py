import shutil
import sys
from pathlib import Path

import pytest

from coqbridge import CoqConfig
from coqbridge.testing import server_command
from coqbridge.testing.server import default_stdlib

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
RECORDED = FIXTURES / "recorded" / "simcoq-1"
GOLDENS = FIXTURES / "goldens"

SIM_COMMAND = server_command()


def sim_config(**overrides) -> CoqConfig:
    base = dict(server_command=SIM_COMMAND, installed_roots=[default_stdlib()])
    base.update(overrides)
    return CoqConfig(**base)


@pytest.fixture
def config():
    return sim_config()


@pytest.fixture
def workspace(tmp_path):
    """Fresh copy of the committed corpus in a stable-named directory."""
    target = tmp_path / "ws"
    shutil.copytree(CORPUS, target)
    return target


@pytest.fixture
def coq_file(workspace):
    """Path of the admitted list-reversal example (fresh copy)."""
    return workspace / "test.v"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def make_workspace(tmp_path: Path, files: dict) -> Path:
    root = tmp_path / "ws"
    root.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        path = root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


def python_command(*args) -> list:
    return [sys.executable, *args]
