"""Message-passing transports for the distributed simulators.

A transport gives one rank point-to-point ``send``/``recv`` plus the
collectives built on them (``exchange``, ``barrier``, ``gather``, ``bcast``,
``allreduce``).  Collectives run in a fixed rank order, so reductions are
bitwise reproducible.  Every ``send`` is counted in :attr:`Transport.stats`,
which is how the "local gates send nothing" guarantee is checked.

Two implementations:

:class:`InProcessTransport`
    ranks are threads of one process connected by queues (used by tests).
:class:`SocketTransport`
    ranks are processes connected by a full mesh of
    :mod:`multiprocessing.connection` sockets, set up from environment
    variables (see :func:`SocketTransport.from_env`).
"""

from __future__ import annotations

import json
import os
import pickle
import queue
import threading
import time
from multiprocessing.connection import Client, Listener
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import TransportError

ENV_WORLD_SIZE = "QUMULUS_WORLD_SIZE"
ENV_RANK = "QUMULUS_RANK"
ENV_ADDR = "QUMULUS_MASTER_ADDR"
ENV_AUTHKEY = "QUMULUS_AUTHKEY"
DEFAULT_TIMEOUT = 120.0


def _nbytes(obj: Any) -> int:
    if isinstance(obj, np.ndarray):
        return int(obj.nbytes)
    try:
        return len(pickle.dumps(obj, protocol=pickle.HIGHEST_PROTOCOL))
    except Exception:  # pragma: no cover - unpicklable objects are sent in-process only
        return 0


class Transport:
    """Base class: collectives on top of point-to-point messaging."""

    rank: int
    world_size: int

    def __init__(self, rank: int, world_size: int):
        if world_size < 1 or not 0 <= rank < world_size:
            raise TransportError(f"invalid rank {rank} for world size {world_size}")
        self.rank = int(rank)
        self.world_size = int(world_size)
        self.stats = {"messages": 0, "bytes": 0}

    # -- to implement
    def _send(self, dest: int, obj: Any) -> None:
        raise NotImplementedError

    def _recv(self, src: int) -> Any:
        raise NotImplementedError

    def close(self) -> None:
        """Release resources (no-op by default)."""

    # -- point to point
    def send(self, dest: int, obj: Any) -> None:
        if dest == self.rank or not 0 <= dest < self.world_size:
            raise TransportError(f"rank {self.rank}: invalid destination {dest}")
        self.stats["messages"] += 1
        self.stats["bytes"] += _nbytes(obj)
        self._send(dest, obj)

    def recv(self, src: int) -> Any:
        if src == self.rank or not 0 <= src < self.world_size:
            raise TransportError(f"rank {self.rank}: invalid source {src}")
        return self._recv(src)

    def exchange(self, partner: int, obj: Any) -> Any:
        """Swap ``obj`` with ``partner``; the lower rank sends first."""
        if self.rank < partner:
            self.send(partner, obj)
            return self.recv(partner)
        got = self.recv(partner)
        self.send(partner, obj)
        return got

    # -- collectives (root 0 unless stated)
    def gather(self, obj: Any, root: int = 0) -> list | None:
        if self.rank == root:
            out = [None] * self.world_size
            out[root] = obj
            for r in range(self.world_size):
                if r != root:
                    out[r] = self.recv(r)
            return out
        self.send(root, obj)
        return None

    def bcast(self, obj: Any, root: int = 0) -> Any:
        if self.rank == root:
            for r in range(self.world_size):
                if r != root:
                    self.send(r, obj)
            return obj
        return self.recv(root)

    def allreduce(self, value, op: Callable | None = None):
        """Reduce in rank order at rank 0, then broadcast the result."""
        parts = self.gather(value)
        if self.rank == 0:
            acc = parts[0]
            for p in parts[1:]:
                acc = op(acc, p) if op is not None else acc + p
        else:
            acc = None
        return self.bcast(acc)

    def barrier(self) -> None:
        self.allreduce(0)


class _World:
    def __init__(self, world_size: int, timeout: float):
        self.world_size = world_size
        self.timeout = timeout
        self.queues = {(s, d): queue.Queue() for s in range(world_size) for d in range(world_size) if s != d}
        self.failed = threading.Event()


class InProcessTransport(Transport):
    """Ranks as threads sharing a set of queues."""

    def __init__(self, world: _World, rank: int):
        super().__init__(rank, world.world_size)
        self._world = world

    @staticmethod
    def create(world_size: int, timeout: float = DEFAULT_TIMEOUT) -> list["InProcessTransport"]:
        world = _World(int(world_size), timeout)
        return [InProcessTransport(world, r) for r in range(world_size)]

    def _send(self, dest, obj):
        if isinstance(obj, np.ndarray):
            obj = obj.copy()  # no shared memory between ranks
        self._world.queues[(self.rank, dest)].put(obj)

    def _recv(self, src):
        q = self._world.queues[(src, self.rank)]
        deadline = time.monotonic() + self._world.timeout
        while True:
            try:
                return q.get(timeout=0.05)
            except queue.Empty:
                if self._world.failed.is_set():
                    raise TransportError(f"rank {self.rank}: peer failure while waiting for rank {src}") from None
                if time.monotonic() > deadline:
                    raise TransportError(f"rank {self.rank}: timed out waiting for rank {src}") from None


class SocketTransport(Transport):
    """Full mesh of socket connections between processes.

    Rendezvous: rank 0 listens on ``address``; every other rank opens its own
    listener, reports it to rank 0, receives the address table, and then
    connects to every lower rank (rank 0's link is the rendezvous link).
    """

    def __init__(self, rank: int, world_size: int, address: tuple[str, int], authkey: bytes = b"qumulus",
                 timeout: float = DEFAULT_TIMEOUT):
        super().__init__(rank, world_size)
        self._conns: dict[int, Any] = {}
        self._listener = None
        self._timeout = timeout
        try:
            self._connect(tuple(address), authkey)
        except TransportError:
            self.close()
            raise
        except Exception as exc:
            self.close()
            raise TransportError(f"rank {rank}: transport initialisation failed: {exc}") from exc

    @classmethod
    def from_env(cls, timeout: float = DEFAULT_TIMEOUT) -> "SocketTransport":
        """Build from ``QUMULUS_WORLD_SIZE``, ``QUMULUS_RANK`` and ``QUMULUS_MASTER_ADDR`` (``host:port``)."""
        try:
            world = int(os.environ[ENV_WORLD_SIZE])
            rank = int(os.environ[ENV_RANK])
            host, port = os.environ[ENV_ADDR].rsplit(":", 1)
        except (KeyError, ValueError) as exc:
            raise TransportError(f"missing or malformed distributed environment variable: {exc}") from exc
        key = os.environ.get(ENV_AUTHKEY, "qumulus").encode()
        return cls(rank, world, (host, int(port)), key, timeout)

    def _client(self, address, authkey):
        deadline = time.monotonic() + self._timeout
        while True:
            try:
                return Client(address, authkey=authkey)
            except (ConnectionRefusedError, FileNotFoundError, OSError):
                if time.monotonic() > deadline:
                    raise TransportError(f"rank {self.rank}: could not reach {address}") from None
                time.sleep(0.05)

    def _connect(self, address, authkey):
        r, n = self.rank, self.world_size
        if n == 1:
            return
        if r == 0:
            self._listener = Listener(address, authkey=authkey, backlog=max(n, 8))
            table = {0: list(address)}
            for _ in range(n - 1):
                conn = self._listener.accept()
                peer, addr = conn.recv()
                self._conns[int(peer)] = conn
                table[int(peer)] = addr
            blob = json.dumps(table)
            for peer in range(1, n):
                self._conns[peer].send(blob)
            return
        self._listener = Listener((address[0], 0), authkey=authkey, backlog=max(n, 8))
        mine = list(self._listener.address)
        root = self._client(address, authkey)
        root.send((r, mine))
        self._conns[0] = root
        table = {int(k): tuple(v) for k, v in json.loads(root.recv()).items()}
        for peer in range(1, r):
            c = self._client(table[peer], authkey)
            c.send(r)
            self._conns[peer] = c
        for _ in range(r + 1, n):
            conn = self._listener.accept()
            self._conns[int(conn.recv())] = conn

    def _send(self, dest, obj):
        try:
            self._conns[dest].send(obj)
        except Exception as exc:
            raise TransportError(f"rank {self.rank}: send to rank {dest} failed: {exc}") from exc

    def _recv(self, src):
        conn = self._conns[src]
        try:
            if not conn.poll(self._timeout):
                raise TransportError(f"rank {self.rank}: timed out waiting for rank {src}")
            return conn.recv()
        except TransportError:
            raise
        except Exception as exc:
            raise TransportError(f"rank {self.rank}: receive from rank {src} failed: {exc}") from exc

    def close(self) -> None:
        for c in self._conns.values():
            try:
                c.close()
            except Exception:  # pragma: no cover
                pass
        self._conns = {}
        if self._listener is not None:
            try:
                self._listener.close()
            except Exception:  # pragma: no cover
                pass
            self._listener = None


# ------------------------------------------------------------------ launchers
def run_threads(world_size: int, fn: Callable, *args, timeout: float = DEFAULT_TIMEOUT) -> list:
    """Run ``fn(transport, *args)`` on ``world_size`` in-process ranks and return their results."""
    transports = InProcessTransport.create(world_size, timeout)
    results: list = [None] * world_size
    errors: list = [None] * world_size

    def body(r):
        try:
            results[r] = fn(transports[r], *args)
        except BaseException as exc:  # noqa: BLE001 - re-raised below with the rank id
            errors[r] = exc
            transports[r]._world.failed.set()

    if world_size == 1:
        body(0)
    else:
        threads = [threading.Thread(target=body, args=(r,), name=f"qumulus-rank-{r}") for r in range(world_size)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    for r, exc in enumerate(errors):
        if exc is not None and not isinstance(exc, TransportError):
            raise exc
    for r, exc in enumerate(errors):
        if exc is not None:
            raise exc
    return results


def _free_port() -> int:
    import socket

    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _process_entry(rank, world_size, addr, fn, args, out_q):
    os.environ[ENV_WORLD_SIZE] = str(world_size)
    os.environ[ENV_RANK] = str(rank)
    os.environ[ENV_ADDR] = addr
    tr = None
    try:
        tr = SocketTransport.from_env()
        out_q.put((rank, True, fn(tr, *args)))
    except BaseException as exc:  # noqa: BLE001
        out_q.put((rank, False, f"{type(exc).__name__}: {exc}"))
    finally:
        if tr is not None:
            tr.close()


def run_processes(world_size: int, fn: Callable, *args, timeout: float = DEFAULT_TIMEOUT) -> list:
    """Run ``fn(transport, *args)`` in ``world_size`` spawned processes over sockets.

    ``fn`` and ``args`` must be picklable (module-level function).
    """
    import multiprocessing as mp

    ctx = mp.get_context("spawn")
    out_q = ctx.Queue()
    addr = f"127.0.0.1:{_free_port()}"
    procs = [
        ctx.Process(target=_process_entry, args=(r, world_size, addr, fn, args, out_q), daemon=True)
        for r in range(world_size)
    ]
    for p in procs:
        p.start()
    results: list = [None] * world_size
    failures = []
    try:
        for _ in range(world_size):
            rank, ok, val = out_q.get(timeout=timeout)
            if ok:
                results[rank] = val
            else:
                failures.append(f"rank {rank}: {val}")
    except queue.Empty:
        failures.append("timed out waiting for worker processes")
    finally:
        for p in procs:
            p.join(timeout=5)
            if p.is_alive():
                p.terminate()
    if failures:
        raise TransportError("; ".join(sorted(failures)))
    return results


def launch(world_size: int, fn: Callable, *args, transport: str = "thread", timeout: float = DEFAULT_TIMEOUT) -> list:
    """Dispatch to :func:`run_threads` (``"thread"``) or :func:`run_processes` (``"process"``)."""
    if transport == "thread":
        return run_threads(world_size, fn, *args, timeout=timeout)
    if transport == "process":
        return run_processes(world_size, fn, *args, timeout=timeout)
    raise ValueError(f"unknown transport {transport!r}")


def ordered_partners(rank: int, group: Sequence[int]) -> list[int]:
    """Group members other than ``rank`` in ascending order (the exchange schedule)."""
    return sorted(int(g) for g in group if g != rank)
