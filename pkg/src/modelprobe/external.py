"""Subprocess client for models the engine does not own.

Protocol: one UTF-8 JSON line {"values": [...]} per request on the child's
stdin; the child answers one line {"score": r} or {"probabilities": [...]} on
stdout. stderr is logged verbatim. Requests are serialized per process
instance; callers needing parallelism spawn multiple instances.
"""

from __future__ import annotations

import json
import logging
import math
import queue
import shlex
import subprocess
import threading

import numpy as np

from .errors import ProtocolError
from .models import Model

log = logging.getLogger(__name__)


class ExternalModel(Model):
    kind = "external"

    def __init__(self, schema, command: str, timeout: float = 10.0,
                 output_kind="score", classes=None):
        super().__init__(schema, output_kind, classes)
        self.command = command
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._lock = threading.Lock()

    # -- process management --------------------------------------------------

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        argv = shlex.split(self.command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot launch external model: {exc}") from None
        self._lines = queue.Queue()
        threading.Thread(
            target=_pump, args=(self._proc.stdout, self._lines), daemon=True
        ).start()
        threading.Thread(
            target=_drain_stderr, args=(self._proc.stderr, self.command), daemon=True
        ).start()

    def close(self):
        with self._lock:
            self._close_locked()

    def _close_locked(self):
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    # -- scoring --------------------------------------------------------------

    def score_value(self, x):
        with self._lock:
            self._ensure_started()
            request = json.dumps({"values": [float(v) for v in np.asarray(x)]})
            try:
                self._proc.stdin.write(request + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                code = self._proc.poll()
                self._close_locked()
                if code is not None:
                    raise ProtocolError(
                        f"external model exited (code {code}) before answering",
                        payload=request,
                    ) from None
                raise ProtocolError(
                    f"external model pipe closed: {exc}", payload=request
                ) from None
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                self._close_locked()
                raise ProtocolError(
                    f"external model timed out after {self.timeout}s", payload=request
                ) from None
            if line is _EOF:
                code = self._proc.poll()
                self._close_locked()
                raise ProtocolError(
                    f"external model exited (code {code}) before answering",
                    payload=request,
                )
        return _parse_response(line)


_EOF = object()


def _pump(stream, lines: queue.Queue):
    for line in stream:
        lines.put(line)
    lines.put(_EOF)


def _drain_stderr(stream, command: str):
    for line in stream:
        log.warning("external model [%s] stderr: %s", command, line.rstrip("\n"))


def _parse_response(line: str):
    try:
        doc = json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError("external model answered non-JSON", payload=line) from None
    if not isinstance(doc, dict):
        raise ProtocolError("external model response must be an object", payload=line)
    if "score" in doc:
        value = doc["score"]
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ProtocolError(
                f"external model score {value!r} is not a finite number", payload=line
            )
        return float(value)
    if "probabilities" in doc:
        probs = doc["probabilities"]
        if not isinstance(probs, list) or not probs:
            raise ProtocolError("probabilities must be a non-empty list", payload=line)
        arr = np.asarray(probs, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ProtocolError("probabilities contain non-finite values", payload=line)
        return arr
    raise ProtocolError(
        "external model response needs 'score' or 'probabilities'", payload=line
    )
