"""JSON-RPC 2.0 over child-process stdio with LSP base-protocol framing.

Wire format: ``Content-Length: <n>\\r\\n\\r\\n<body>`` where n is the UTF-8
byte length of the body. A dedicated reader thread consumes the server's
stdout and routes responses to the callers that are blocked in
:meth:`RpcTransport.call`; server-initiated requests and notifications go
to a handler callback. Writes are serialized so each frame hits the pipe
atomically.
"""

from __future__ import annotations

import io
import json
import logging
import subprocess
import threading
from typing import Any, Callable, Iterator, Optional

from .errors import (
    MalformedHeaderError,
    PrematureEOFError,
    RpcServerError,
    RpcTimeoutError,
    TransportClosedError,
)

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0

_HEADER_SEP = b"\r\n\r\n"


def frame_message(body: str | bytes) -> bytes:
    """Wrap one JSON body in a Content-Length header."""
    data = body.encode("utf-8") if isinstance(body, str) else body
    return b"Content-Length: " + str(len(data)).encode("ascii") + _HEADER_SEP + data


def read_some(stream, limit: int = 65536) -> bytes:
    """One blocking read that returns as soon as any bytes arrive.

    BufferedReader.read(n) waits for the full n bytes, which deadlocks on
    pipes; read1 returns whatever is available (b"" only at EOF).
    """
    read1 = getattr(stream, "read1", None)
    if read1 is not None:
        return read1(limit)
    return stream.read(limit)


class FrameParser:
    """Incremental parser for a stream of Content-Length frames.

    Feed arbitrary byte chunks; complete bodies come out in order and a
    partial trailing frame stays buffered. Chunk boundaries never change
    the parsed sequence.
    """

    def __init__(self):
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> Iterator[str]:
        self._buf.extend(chunk)
        while True:
            sep = self._buf.find(_HEADER_SEP)
            if sep < 0:
                return
            length = self._parse_header(bytes(self._buf[:sep]))
            body_start = sep + len(_HEADER_SEP)
            if len(self._buf) < body_start + length:
                return
            body = bytes(self._buf[body_start:body_start + length])
            del self._buf[:body_start + length]
            yield body.decode("utf-8")

    def close(self) -> None:
        """Signal end of stream; leftover bytes mean a truncated frame."""
        if self._buf:
            raise PrematureEOFError(
                f"stream ended with {len(self._buf)} unconsumed bytes mid-frame"
            )

    @staticmethod
    def _parse_header(header: bytes) -> int:
        length: Optional[int] = None
        for line in header.split(b"\r\n"):
            if not line:
                continue
            name, _, value = line.partition(b":")
            if name.strip().lower() == b"content-length":
                try:
                    length = int(value.strip())
                except ValueError:
                    raise MalformedHeaderError(f"bad Content-Length: {value!r}") from None
            # Content-Type is accepted and ignored.
        if length is None:
            raise MalformedHeaderError(f"no Content-Length in header {header!r}")
        return length


def parse_frames(data: bytes) -> list[str]:
    """Parse a complete byte string into its frame bodies."""
    parser = FrameParser()
    bodies = list(parser.feed(data))
    parser.close()
    return bodies


class _Pending:
    __slots__ = ("event", "result", "error")

    def __init__(self):
        self.event = threading.Event()
        self.result: Any = None
        self.error: Optional[BaseException] = None


class RpcTransport:
    """Request/response correlation over a pair of byte streams.

    ``handler`` receives every server-initiated message (dict) on the
    reader thread; it must not block. ``call`` may be used concurrently
    from multiple threads.
    """

    def __init__(
        self,
        stdin: io.RawIOBase,
        stdout: io.RawIOBase,
        handler: Optional[Callable[[dict], None]] = None,
        default_timeout: float = DEFAULT_TIMEOUT,
    ):
        self._stdin = stdin
        self._stdout = stdout
        self._handler = handler or (lambda msg: None)
        self._default_timeout = default_timeout
        self._write_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._pending: dict[int, _Pending] = {}
        self._next_id = 1
        self._closed = False
        self._close_reason: Optional[BaseException] = None
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    @classmethod
    def for_process(cls, proc: subprocess.Popen, **kw) -> "RpcTransport":
        transport = cls(proc.stdin, proc.stdout, **kw)
        transport._proc = proc
        return transport

    # -- outbound --------------------------------------------------------

    def call(self, method: str, params: Any = None, timeout: Optional[float] = None) -> Any:
        """Send a request and block until its response arrives.

        Returns the result member; raises RpcServerError for an error
        member, RpcTimeoutError after ``timeout`` seconds (default 60),
        TransportClosedError if the server goes away first.
        """
        pending = _Pending()
        with self._state_lock:
            if self._closed:
                raise TransportClosedError(str(self._close_reason or "transport closed"))
            msg_id = self._next_id
            self._next_id += 1
            self._pending[msg_id] = pending
        try:
            self._write({"jsonrpc": "2.0", "id": msg_id, "method": method,
                         "params": params if params is not None else {}})
            budget = self._default_timeout if timeout is None else timeout
            if not pending.event.wait(budget):
                raise RpcTimeoutError(f"no response to {method} (id {msg_id}) within {budget}s")
        finally:
            with self._state_lock:
                self._pending.pop(msg_id, None)
        if pending.error is not None:
            raise pending.error
        return pending.result

    def notify(self, method: str, params: Any = None) -> None:
        self._write({"jsonrpc": "2.0", "method": method,
                     "params": params if params is not None else {}})

    def respond(self, msg_id: Any, result: Any = None) -> None:
        """Answer a server-initiated request."""
        self._write({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def _write(self, msg: dict) -> None:
        data = frame_message(json.dumps(msg, ensure_ascii=False))
        with self._write_lock:
            if self._closed:
                raise TransportClosedError(str(self._close_reason or "transport closed"))
            try:
                self._stdin.write(data)
                self._stdin.flush()
            except (BrokenPipeError, ValueError, OSError) as exc:
                self._shutdown(TransportClosedError(f"write failed: {exc}"))
                raise TransportClosedError(f"write failed: {exc}") from exc

    # -- inbound ---------------------------------------------------------

    def _read_loop(self) -> None:
        parser = FrameParser()
        try:
            while True:
                chunk = read_some(self._stdout)
                if not chunk:
                    parser.close()  # raises if a frame was cut short
                    self._shutdown(TransportClosedError("server closed its stdout"))
                    return
                for body in parser.feed(chunk):
                    self._dispatch(json.loads(body))
        except Exception as exc:  # malformed header / premature EOF / bad JSON
            self._shutdown(exc)

    def _dispatch(self, msg: dict) -> None:
        if "id" in msg and "method" not in msg:
            with self._state_lock:
                pending = self._pending.get(msg["id"])
            if pending is None:
                log.warning("response to unknown id %r dropped", msg.get("id"))
                return
            if "error" in msg:
                err = msg["error"] or {}
                pending.error = RpcServerError(
                    err.get("code", 0), err.get("message", ""), err.get("data"))
            else:
                pending.result = msg.get("result")
            pending.event.set()
        else:
            try:
                self._handler(msg)
            except Exception:
                log.exception("handler failed for %s", msg.get("method"))

    # -- lifecycle --------------------------------------------------------

    def _shutdown(self, reason: BaseException) -> None:
        with self._state_lock:
            if self._closed:
                return
            self._closed = True
            self._close_reason = reason
            pending = list(self._pending.values())
            self._pending.clear()
        for p in pending:
            if isinstance(reason, TransportClosedError):
                p.error = TransportClosedError(str(reason))
            else:
                p.error = reason
            p.event.set()

    def close(self) -> None:
        self._shutdown(TransportClosedError("transport closed locally"))
        for stream in (self._stdin, self._stdout):
            try:
                stream.close()
            except Exception:
                pass

    @property
    def closed(self) -> bool:
        return self._closed
