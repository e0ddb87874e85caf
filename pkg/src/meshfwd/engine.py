"""Deterministic discrete-event engine: virtual clock, event heap, seeded streams."""

from __future__ import annotations

import heapq
import itertools
import random
import zlib
from typing import Any, Callable


class SchedulingError(ValueError):
    """Raised when an event is scheduled before the current virtual time."""


class EventHandle:
    __slots__ = ("time", "seq", "fn", "args", "cancelled")

    def __init__(self, time: float, seq: int, fn: Callable[..., Any], args: tuple):
        self.time = time
        self.seq = seq
        self.fn = fn
        self.args = args
        self.cancelled = False

    def __repr__(self) -> str:
        name = getattr(self.fn, "__qualname__", repr(self.fn))
        return f"<Event t={self.time!r} seq={self.seq} {name}>"


class RandomStreams:
    """One seeded root per run, forked into independent named sub-streams.

    Sub-stream seeds are derived from ``(seed, crc32(name))`` so adding a new
    stream never shifts the draws of existing ones.  ``random.Random``
    (Mersenne Twister) is used because its output is identical across
    platforms for a given integer seed.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            rng = random.Random((self.seed << 32) | zlib.crc32(name.encode()))
            self._streams[name] = rng
        return rng


class Simulator:
    """Single-threaded event loop.

    Events fire in ``(time, insertion sequence)`` order.  With ``trace=True``
    every processed event is appended to :attr:`trace` as
    ``(time, seq, action name)``.
    """

    def __init__(self, seed: int = 0, trace: bool = False):
        self._now = 0.0
        self._heap: list[tuple[float, int, EventHandle]] = []
        self._seq = itertools.count()
        self.random = RandomStreams(seed)
        self.processed = 0
        self.trace: list[tuple[float, int, str]] | None = [] if trace else None

    def now(self) -> float:
        return self._now

    def schedule(self, t: float, fn: Callable[..., Any], *args: Any) -> EventHandle:
        if t < self._now:
            raise SchedulingError(f"cannot schedule at t={t} before now={self._now}")
        seq = next(self._seq)
        ev = EventHandle(t, seq, fn, args)
        heapq.heappush(self._heap, (t, seq, ev))
        return ev

    def schedule_in(self, delay: float, fn: Callable[..., Any], *args: Any) -> EventHandle:
        return self.schedule(self._now + delay, fn, *args)

    @staticmethod
    def cancel(handle: EventHandle) -> None:
        handle.cancelled = True

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)

    def run_until(self, t_end: float) -> int:
        """Process every event with ``time <= t_end``; leave the clock at ``t_end``."""
        if t_end < self._now:
            raise SchedulingError(f"run_until({t_end}) is before now={self._now}")
        heap = self._heap
        trace = self.trace
        count = 0
        while heap and heap[0][0] <= t_end:
            ev = heapq.heappop(heap)[2]
            if ev.cancelled:
                continue
            self._now = ev.time
            if trace is not None:
                trace.append((ev.time, ev.seq, getattr(ev.fn, "__qualname__", "?")))
            ev.fn(*ev.args)
            count += 1
        self._now = t_end
        self.processed += count
        return count
