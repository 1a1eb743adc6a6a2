"""Configuration: server command, extension method names, load paths.

The coq-lsp extension method names are configuration, not code, so a
server that renames them is a config change. The server binary comes
from (in order) an explicit ``server_command``, the COQBRIDGE_SERVER
environment variable (shell-quoted), or ``coq-lsp`` on PATH.
"""

from __future__ import annotations

import json
import os
import shlex
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

SERVER_ENV_VAR = "COQBRIDGE_SERVER"


@dataclass(frozen=True)
class MethodNames:
    goals: str = "proof/goals"
    document: str = "coq/getDocument"
    save_vo: str = "coq/saveVo"
    file_progress: str = "$/coq/fileProgress"


@dataclass
class CoqConfig:
    server_command: Optional[list] = None
    methods: MethodNames = field(default_factory=MethodNames)
    language_id: str = "coq"
    request_timeout: float = 60.0
    init_options: dict = field(default_factory=dict)
    #: logical prefix -> directory, searched in order ("" matches any name)
    workspace_mappings: list = field(default_factory=list)
    #: roots of installed (precompiled) libraries, searched after the workspace
    installed_roots: list = field(default_factory=list)
    #: directory for harvested-library context caches; None disables caching
    cache_dir: Optional[Path] = None
    #: write the .v file on successful edits; False keeps edits in memory only
    write_through: bool = True
    harvest_imports: bool = True
    #: libraries harvested concurrently per wave (1 = sequential, replay-safe)
    harvest_jobs: int = 1

    def resolved_server_command(self) -> list:
        if self.server_command:
            return list(self.server_command)
        env = os.environ.get(SERVER_ENV_VAR)
        if env:
            return shlex.split(env)
        return ["coq-lsp"]

    def with_workspace(self, root: Path) -> "CoqConfig":
        """Fold a workspace's _CoqProject mappings into this config."""
        mappings = parse_coqproject(root) + list(self.workspace_mappings)
        return replace(self, workspace_mappings=mappings)


def parse_coqproject(root: Path) -> list:
    """-Q/-R bindings from a _CoqProject file, as (prefix, directory)."""
    project = Path(root) / "_CoqProject"
    if not project.is_file():
        return []
    tokens = project.read_text(encoding="utf-8").split()
    mappings = []
    i = 0
    while i < len(tokens):
        if tokens[i] in ("-Q", "-R") and i + 2 <= len(tokens):
            directory = (Path(root) / tokens[i + 1]).resolve()
            prefix = tokens[i + 2] if i + 2 < len(tokens) else ""
            if prefix == '""':
                prefix = ""
            mappings.append((prefix, directory))
            i += 3
        else:
            i += 1
    return mappings


def load_config(path: Path) -> CoqConfig:
    """Config from a JSON file; unknown keys are rejected."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    methods = MethodNames(**data.pop("methods", {}))
    mappings = [(p, Path(d)) for p, d in data.pop("workspace_mappings", [])]
    roots = [Path(d) for d in data.pop("installed_roots", [])]
    cache = data.pop("cache_dir", None)
    config = CoqConfig(methods=methods, workspace_mappings=mappings,
                       installed_roots=roots,
                       cache_dir=Path(cache) if cache else None)
    for key, value in data.items():
        if not hasattr(config, key):
            raise ValueError(f"unknown config key {key!r}")
        setattr(config, key, value)
    return config


def resolve_library(logical: str, config: CoqConfig,
                    root: Optional[Path] = None) -> Optional[Path]:
    """Map a logical library name to a source file, workspace first."""
    rel = Path(*logical.split(".")).with_suffix(".v")
    candidates = []
    for prefix, directory in config.workspace_mappings:
        if prefix == "":
            candidates.append(Path(directory) / rel)
        elif logical == prefix or logical.startswith(prefix + "."):
            rest = logical[len(prefix):].lstrip(".")
            if rest:
                candidates.append(Path(directory) / Path(*rest.split(".")).with_suffix(".v"))
    if root is not None:
        candidates.append(Path(root) / rel)
    for installed in config.installed_roots:
        candidates.append(Path(installed) / rel)
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return None
