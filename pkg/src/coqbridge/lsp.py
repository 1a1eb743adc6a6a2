"""LSP lifecycle and the Coq extension requests against a language server.

A Session owns one server child process and may host several open
documents. Document synchronization is full-text: every edit sends the
whole buffer with a strictly increasing version, and readiness is
established by waiting for the diagnostics publication that the server
emits for that exact version (diagnostics for different versions never
mix). Server stderr is drained to the ``coqbridge.server`` logger and
never touches protocol parsing.
"""

from __future__ import annotations

import logging
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.parse import unquote, urlparse
from urllib.request import pathname2url

from .config import CoqConfig
from .errors import (
    CompilationIOError,
    CompilationRefusedError,
    HandshakeError,
    RpcServerError,
    RpcTimeoutError,
    SessionError,
    SpawnError,
    StaleVersionError,
    TransportClosedError,
)
from .jsonrpc import RpcTransport
from .model import Diagnostic, GoalAnswer, RawSpan
from .positions import Position, Range, slice_range

log = logging.getLogger(__name__)
server_log = logging.getLogger("coqbridge.server")

ERR_COMPILATION_IO = -32011


def path_to_uri(path: Path) -> str:
    return "file://" + pathname2url(str(Path(path).resolve()))


def uri_to_path(uri: str) -> Path:
    return Path(unquote(urlparse(uri).path))


@dataclass
class DocumentHandle:
    uri: str
    path: Path
    version: int
    text: str


@dataclass
class _DiagRecord:
    version: Optional[int] = None
    serial: int = 0
    diagnostics: list = field(default_factory=list)


class Session:
    """One live language-server process plus its open documents."""

    def __init__(self, root: Path, config: Optional[CoqConfig] = None,
                 server_command: Optional[list] = None):
        self.config = config or CoqConfig()
        self.root = Path(root)
        command = server_command or self.config.resolved_server_command()
        try:
            self._proc = subprocess.Popen(
                command, cwd=str(self.root),
                stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.PIPE)
        except OSError as exc:
            raise SpawnError(f"cannot start {command[0]!r}: {exc}") from exc
        self._stderr_thread = threading.Thread(
            target=self._drain_stderr, daemon=True)
        self._stderr_thread.start()
        self._lock = threading.RLock()
        self._diag_cond = threading.Condition(self._lock)
        self._diags: dict[str, _DiagRecord] = {}
        self._progress_done: dict[str, int] = {}
        self._closed = False
        self.transport = RpcTransport.for_process(
            self._proc, handler=self._on_server_message,
            default_timeout=self.config.request_timeout)
        try:
            result = self.transport.call("initialize", {
                "processId": None,
                "rootUri": path_to_uri(self.root),
                "capabilities": {},
                "initializationOptions": self.config.init_options,
            })
            self.capabilities = (result or {}).get("capabilities", {})
            self.server_info = (result or {}).get("serverInfo", {})
            self.transport.notify("initialized", {})
        except (RpcServerError, RpcTimeoutError, TransportClosedError) as exc:
            self.kill()
            raise HandshakeError(f"initialize failed: {exc}") from exc

    # -- server-initiated traffic ------------------------------------------

    def _drain_stderr(self) -> None:
        stream = self._proc.stderr
        if stream is None:
            return
        for raw in iter(stream.readline, b""):
            server_log.debug("%s", raw.decode("utf-8", "replace").rstrip())

    def _on_server_message(self, msg: dict) -> None:
        method = msg.get("method")
        if method == "textDocument/publishDiagnostics":
            params = msg.get("params") or {}
            record = _DiagRecord(
                version=params.get("version"),
                diagnostics=[Diagnostic.from_lsp(d)
                             for d in params.get("diagnostics", [])])
            with self._diag_cond:
                previous = self._diags.get(params.get("uri"))
                record.serial = (previous.serial + 1) if previous else 1
                self._diags[params.get("uri")] = record
                self._diag_cond.notify_all()
        elif method == self.config.methods.file_progress:
            params = msg.get("params") or {}
            if not params.get("processing"):
                uri = (params.get("textDocument") or {}).get("uri")
                with self._diag_cond:
                    self._progress_done[uri] = self._progress_done.get(uri, 0) + 1
                    self._diag_cond.notify_all()
        elif "id" in msg:
            # server-initiated request we do not implement; answer politely
            self.transport.respond(msg["id"], None)

    # -- documents -----------------------------------------------------------

    def open_document(self, path: Path, text: Optional[str] = None) -> DocumentHandle:
        self._ensure_open()
        path = Path(path)
        if text is None:
            text = path.read_text(encoding="utf-8")
        handle = DocumentHandle(uri=path_to_uri(path), path=path, version=1, text=text)
        self.transport.notify("textDocument/didOpen", {"textDocument": {
            "uri": handle.uri,
            "languageId": self.config.language_id,
            "version": handle.version,
            "text": text,
        }})
        self.wait_checked(handle)
        return handle

    def update_document(self, handle: DocumentHandle, new_text: str,
                        version: int) -> None:
        self._ensure_open()
        if version <= handle.version:
            raise StaleVersionError(
                f"version {version} is not greater than {handle.version}")
        with self._diag_cond:
            record = self._diags.get(handle.uri)
            prev_serial = record.serial if record else 0
        handle.version = version
        handle.text = new_text
        self.transport.notify("textDocument/didChange", {
            "textDocument": {"uri": handle.uri, "version": version},
            "contentChanges": [{"text": new_text}],
        })
        self.wait_checked(handle, min_serial=prev_serial + 1)

    def close_document(self, handle: DocumentHandle) -> None:
        if self._closed:
            return
        self.transport.notify("textDocument/didClose",
                              {"textDocument": {"uri": handle.uri}})
        with self._diag_cond:
            self._diags.pop(handle.uri, None)
            self._progress_done.pop(handle.uri, None)

    def wait_checked(self, handle: DocumentHandle,
                     timeout: Optional[float] = None,
                     min_serial: int = 1) -> None:
        """Block until diagnostics for the handle's current version arrived.

        Servers that tag publications with a version are matched exactly;
        otherwise the publication counter is the best-effort signal.
        """
        budget = timeout if timeout is not None else self.config.request_timeout
        deadline = time.monotonic() + budget
        with self._diag_cond:
            def arrived():
                record = self._diags.get(handle.uri)
                if record is None:
                    return False
                if record.version is not None:
                    return record.version >= handle.version
                return record.serial >= min_serial
            # poll in slices so a dying transport is noticed promptly
            while not arrived():
                if self.transport.closed:
                    raise TransportClosedError("server exited while checking")
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise RpcTimeoutError(
                        f"no diagnostics for {handle.uri} v{handle.version} "
                        f"within {budget}s")
                self._diag_cond.wait(min(remaining, 0.1))

    def diagnostics(self, handle: DocumentHandle) -> list:
        """Diagnostics for the handle's current version (snapshot)."""
        self.wait_checked(handle)
        with self._diag_cond:
            record = self._diags.get(handle.uri)
            return list(record.diagnostics) if record else []

    # -- Coq extension requests ------------------------------------------------

    def request_goals(self, handle: DocumentHandle, position: Position) -> GoalAnswer:
        self._ensure_open()
        self.wait_checked(handle)
        params = {
            "textDocument": {"uri": handle.uri, "version": handle.version},
            "position": position.as_dict(),
        }
        # some servers check asynchronously and answer "not ready" for a
        # moment even after publishing diagnostics; poll a few times
        for attempt in range(5):
            try:
                response = self.transport.call(self.config.methods.goals, params)
                break
            except RpcServerError as exc:
                message = (exc.message or "").lower()
                if attempt < 4 and ("not checked" in message or "not ready" in message):
                    time.sleep(0.2 * (attempt + 1))
                    continue
                raise
        return GoalAnswer.from_response(response)

    def request_spans(self, handle: DocumentHandle) -> list:
        self._ensure_open()
        self.wait_checked(handle)
        response = self.transport.call(self.config.methods.document, {
            "textDocument": {"uri": handle.uri, "version": handle.version},
        }) or {}
        spans = []
        for entry in response.get("spans", []):
            rng = Range.from_dict(entry["range"])
            spans.append(RawSpan(range=rng,
                                 text=slice_range(handle.text, rng),
                                 ast=entry.get("span")))
        return spans

    def save_compiled(self, handle: DocumentHandle) -> None:
        self._ensure_open()
        self.wait_checked(handle)
        try:
            self.transport.call(self.config.methods.save_vo, {
                "textDocument": {"uri": handle.uri, "version": handle.version},
            })
        except RpcServerError as exc:
            if exc.code == ERR_COMPILATION_IO:
                raise CompilationIOError(exc.message) from exc
            raise CompilationRefusedError(exc.message) from exc

    # -- lifecycle ---------------------------------------------------------------

    def _ensure_open(self) -> None:
        if self._closed:
            raise SessionError("session is closed")

    def shutdown(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self.transport.call("shutdown", timeout=5.0)
            self.transport.notify("exit")
        except (RpcServerError, RpcTimeoutError, TransportClosedError):
            pass
        # close our end first so proxies between us and the server see EOF
        self.transport.close()
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def kill(self) -> None:
        self._closed = True
        self._proc.kill()
        self._proc.wait()
        self.transport.close()

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()
