"""Scripted stand-in language server (fixture replay) and recording proxy.

``replay`` behaves as a stdio LSP server emitting recorded traffic:
every client message must match the next fixture turn (method plus a
digest of its normalized params); unmatched requests fail the run
loudly with exit code 3. ``record`` sits transparently between a client
and a real server and serializes all traffic into a fixture file.

Params are matched by digest of a normalized JSON form: keys sorted,
file URIs reduced to their basename, version numbers and process ids
masked — those differ run to run without changing meaning.

Run as ``python -m coqbridge.mock replay FIXTURE [--trace PATH]`` or
``python -m coqbridge.mock record --out FIXTURE -- SERVER ARGS...``.
"""

from __future__ import annotations

import argparse
import base64
import hashlib
import json
import shutil
import subprocess
import sys
import threading
from pathlib import Path
from typing import Optional

from .jsonrpc import FrameParser, frame_message, read_some

SCHEMA_FIXTURE = "coqbridge/fixture/1"
EXIT_UNMATCHED = 3

_MASKED_INT_KEYS = {"version", "processId"}
_URI_KEYS = {"uri", "rootUri", "rootPath"}


def _mask_uri(value):
    if isinstance(value, str):
        return value.rstrip("/").rsplit("/", 1)[-1]
    return value


def normalize_params(value, key: Optional[str] = None):
    if isinstance(value, dict):
        return {k: normalize_params(v, k) for k, v in sorted(value.items())}
    if isinstance(value, list):
        return [normalize_params(v) for v in value]
    if key in _URI_KEYS:
        return _mask_uri(value)
    if key in _MASKED_INT_KEYS and isinstance(value, int):
        return 0
    return value


def params_digest(params) -> str:
    canonical = json.dumps(normalize_params(params), sort_keys=True,
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def message_kind(msg: dict) -> str:
    if "method" in msg:
        return "request" if "id" in msg else "notification"
    return "response"


def fixtures_equivalent(a: dict, b: dict) -> bool:
    """Same traffic shape, ignoring metadata (timestamps, commands)."""
    def shape(fixture):
        turns = []
        for turn in fixture.get("turns", []):
            recv = turn["recv"]
            sends = []
            for entry in turn.get("send", []):
                sends.append((entry.get("kind"), entry.get("method"),
                              params_digest(entry.get("body", entry.get("params")))))
            turns.append((recv["kind"], recv["method"], recv["digest"], tuple(sends)))
        return turns
    return shape(a) == shape(b)


# --- replay ----------------------------------------------------------------


class ReplayServer:
    def __init__(self, fixture: dict, reader, writer, trace: Optional[Path] = None):
        if fixture.get("schema") != SCHEMA_FIXTURE:
            raise ValueError(f"unexpected fixture schema {fixture.get('schema')!r}")
        self.turns = fixture.get("turns", [])
        self.prelude = fixture.get("prelude", [])
        self.reader = reader
        self.writer = writer
        self.trace = trace
        self.turn_ids: dict[int, object] = {}
        self.cursor = 0
        # recorded URIs differ from the replaying client's (temp dirs move);
        # learn the client's URIs from inbound traffic and rewrite outbound
        self.uri_map: dict[str, str] = {}

    def _learn_uris(self, value) -> None:
        if isinstance(value, dict):
            for key, item in value.items():
                if key in _URI_KEYS and isinstance(item, str):
                    self.uri_map[_mask_uri(item)] = item
                else:
                    self._learn_uris(item)
        elif isinstance(value, list):
            for item in value:
                self._learn_uris(item)

    def _rewrite_uris(self, value, key: Optional[str] = None):
        if isinstance(value, dict):
            return {k: self._rewrite_uris(v, k) for k, v in value.items()}
        if isinstance(value, list):
            return [self._rewrite_uris(v) for v in value]
        if key in _URI_KEYS and isinstance(value, str):
            return self.uri_map.get(_mask_uri(value), value)
        return value

    def _trace(self, entry: dict) -> None:
        if self.trace is not None:
            with open(self.trace, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def _send(self, payload: dict) -> None:
        self.writer.write(frame_message(json.dumps(payload, ensure_ascii=False)))
        self.writer.flush()

    def _fail(self, msg: dict, reason: str) -> int:
        print(f"mock replay: {reason}", file=sys.stderr, flush=True)
        if "id" in msg:
            self._send({"jsonrpc": "2.0", "id": msg["id"],
                        "error": {"code": -32099, "message": f"mock replay: {reason}"}})
        return EXIT_UNMATCHED

    def handle(self, msg: dict) -> Optional[int]:
        """Returns an exit code when the session should end."""
        kind = message_kind(msg)
        self._trace({"kind": kind, "method": msg.get("method"), "id": msg.get("id")})
        self._learn_uris(msg.get("params"))
        if kind == "response":
            return None  # replies to server-initiated requests; ignored
        if self.cursor >= len(self.turns):
            if msg.get("method") == "exit":
                return 0
            return self._fail(msg, f"fixture exhausted at {msg.get('method')}")
        turn = self.turns[self.cursor]
        recv = turn["recv"]
        digest = params_digest(msg.get("params"))
        if (recv["kind"], recv["method"]) != (kind, msg.get("method")):
            return self._fail(
                msg, f"expected {recv['kind']} {recv['method']}, "
                     f"got {kind} {msg.get('method')}")
        if digest != recv["digest"]:
            return self._fail(
                msg, f"params digest mismatch for {msg.get('method')}: "
                     f"got {digest}, fixture has {recv['digest']} "
                     f"(recorded params: {json.dumps(normalize_params(recv.get('params')))[:400]})")
        if kind == "request":
            self.turn_ids[self.cursor] = msg["id"]
        self.cursor += 1
        for entry in turn.get("send", []):
            code = self._emit(entry)
            if code is not None:
                return code
        if msg.get("method") == "exit":
            return 0
        return None

    def _emit(self, entry: dict) -> Optional[int]:
        if entry["kind"] == "response":
            self._send({"jsonrpc": "2.0", "id": self.turn_ids[entry["reply_to"]],
                        "result": self._rewrite_uris(entry.get("body"))})
        elif entry["kind"] == "error":
            self._send({"jsonrpc": "2.0", "id": self.turn_ids[entry["reply_to"]],
                        "error": {"code": entry["code"], "message": entry["message"]}})
        elif entry["kind"] == "notification":
            self._send({"jsonrpc": "2.0", "method": entry["method"],
                        "params": self._rewrite_uris(entry.get("params"))})
        elif entry["kind"] == "raw":
            self.writer.write(base64.b64decode(entry["bytes_b64"]))
            self.writer.flush()
            return 0
        return None

    def serve(self) -> int:
        for entry in self.prelude:
            self._emit(entry)
        parser = FrameParser()
        while True:
            chunk = read_some(self.reader)
            if not chunk:
                return 0
            for body in parser.feed(chunk):
                code = self.handle(json.loads(body))
                if code is not None:
                    return code


def replay(fixture_path: Path, reader=None, writer=None,
           trace: Optional[Path] = None) -> int:
    fixture = json.loads(Path(fixture_path).read_text(encoding="utf-8"))
    server = ReplayServer(fixture,
                          reader or sys.stdin.buffer,
                          writer or sys.stdout.buffer,
                          trace)
    return server.serve()


# --- record ------------------------------------------------------------------


class RecordingProxy:
    """Transparent stdio proxy that logs every message into fixture turns."""

    def __init__(self, server_command: list, reader, writer, out: Path):
        self.server_command = server_command
        self.reader = reader
        self.writer = writer
        self.out = Path(out)
        self.lock = threading.Lock()
        self.turns: list = []
        self.prelude: list = []
        self.id_to_turn: dict = {}

    def _client_message(self, msg: dict) -> None:
        kind = message_kind(msg)
        if kind == "response":
            return
        with self.lock:
            if kind == "request":
                self.id_to_turn[msg.get("id")] = len(self.turns)
            self.turns.append({
                "recv": {"kind": kind, "method": msg.get("method"),
                         "digest": params_digest(msg.get("params")),
                         "params": msg.get("params")},
                "send": [],
            })

    def _server_message(self, msg: dict) -> None:
        with self.lock:
            target = self.turns[-1]["send"] if self.turns else self.prelude
            if "method" in msg:
                target.append({"kind": "notification", "method": msg["method"],
                               "params": msg.get("params")})
            elif "error" in msg:
                err = msg["error"] or {}
                target.append({"kind": "error",
                               "reply_to": self.id_to_turn.get(msg.get("id")),
                               "code": err.get("code", 0),
                               "message": err.get("message", "")})
            else:
                target.append({"kind": "response",
                               "reply_to": self.id_to_turn.get(msg.get("id")),
                               "body": msg.get("result")})

    def _pump(self, source, sink, on_message) -> None:
        parser = FrameParser()
        while True:
            chunk = read_some(source)
            if not chunk:
                break
            for body in parser.feed(chunk):
                on_message(json.loads(body))
                sink.write(frame_message(body))
                sink.flush()
        try:
            sink.close()
        except OSError:
            pass

    def run(self) -> int:
        proc = subprocess.Popen(self.server_command,
                                stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=sys.stderr.buffer)
        downstream = threading.Thread(
            target=self._pump,
            args=(proc.stdout, self.writer, self._server_message), daemon=True)
        downstream.start()
        self._pump(self.reader, proc.stdin, self._client_message)
        code = proc.wait()
        downstream.join(timeout=10)
        server_info = {}
        for turn in self.turns:  # the initialize response identifies the server
            for entry in turn["send"]:
                if entry.get("kind") == "response" and isinstance(entry.get("body"), dict):
                    server_info = entry["body"].get("serverInfo") or {}
                    break
            if turn["recv"]["method"] == "initialize":
                break
        fixture = {
            "schema": SCHEMA_FIXTURE,
            "metadata": {"server": self.server_command, "server_info": server_info},
            "turns": self.turns,
        }
        if self.prelude:
            fixture["prelude"] = self.prelude
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.out.write_text(json.dumps(fixture, ensure_ascii=False, indent=1) + "\n",
                            encoding="utf-8")
        return code


def record(server_command: list, out: Path, reader=None, writer=None) -> int:
    proxy = RecordingProxy(server_command,
                           reader or sys.stdin.buffer,
                           writer or sys.stdout.buffer, out)
    return proxy.run()


# --- CLI -------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coqbridge-mock",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_replay = sub.add_parser("replay", help="serve a recorded fixture over stdio")
    p_replay.add_argument("fixture", type=Path)
    p_replay.add_argument("--trace", type=Path, default=None,
                          help="append received-message summaries to this file")
    p_record = sub.add_parser("record", help="proxy a real server, recording traffic")
    p_record.add_argument("--out", type=Path, required=True)
    p_record.add_argument("server", nargs=argparse.REMAINDER,
                          help="server command (prefix with --)")
    args = parser.parse_args(argv)
    if args.command == "replay":
        return replay(args.fixture, trace=args.trace)
    command = [a for a in args.server if a != "--"]
    if not command:
        parser.error("record needs a server command after --")
    if shutil.which(command[0]) is None and not Path(command[0]).exists():
        parser.error(f"server binary {command[0]!r} not found")
    return record(command, args.out)


if __name__ == "__main__":
    sys.exit(main())
