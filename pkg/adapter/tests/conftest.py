import json
import queue
import subprocess
import sys
import threading

import numpy as np
import pytest

READ_TIMEOUT_S = 20.0


class RawAdapter:
    """Drive the adapter process over raw pipes, one line at a time."""

    def __init__(self, *extra_args: str):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "fire_adapter.cli", *extra_args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def send_line(self, text: str) -> None:
        assert self.proc.stdin is not None
        self.proc.stdin.write(text)
        self.proc.stdin.flush()

    def send(self, payload: dict) -> None:
        self.send_line(json.dumps(payload) + "\n")

    def recv(self) -> dict:
        line = self._lines.get(timeout=READ_TIMEOUT_S)
        if line is None:
            raise AssertionError(f"adapter closed stdout (exit {self.proc.poll()})")
        return json.loads(line)

    def handshake(self) -> dict:
        self.send({"hello": 1})
        return self.recv()

    def close(self) -> int:
        if self.proc.stdin is not None:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)
        self._reader.join(timeout=10)
        return self.proc.returncode

    def stderr_text(self) -> str:
        assert self.proc.stderr is not None
        return self.proc.stderr.read()

    def __enter__(self) -> "RawAdapter":
        return self

    def __exit__(self, *exc_info) -> None:
        try:
            self.close()
        except Exception:
            self.proc.kill()


@pytest.fixture
def adapter():
    with RawAdapter() as raw:
        yield raw


def random_bands(rng: np.random.Generator, height: int = 48, width: int = 48) -> np.ndarray:
    return (rng.random((3, height, width)) * 2.0).astype(np.float32)
