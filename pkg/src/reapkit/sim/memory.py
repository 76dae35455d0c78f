"""Bandwidth-capped DRAM model.

Transfers queue in issue order and drain at a fixed number of bytes per
cycle; no cycle ever serves more than that budget.  Arithmetic is exact
(``Fraction``) so the cap holds without rounding slack.
"""

from __future__ import annotations

import math
from fractions import Fraction


class BandwidthExceeded(AssertionError):
    pass


class MemoryModel:
    def __init__(self, budget: Fraction, name: str = "mem"):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.budget = Fraction(budget)
        self.name = name
        self._cycle = 0  # cycle currently being filled
        self._used = Fraction(0)  # bytes already served in _cycle
        self.bytes_total = 0
        self.requests = 0
        self.peak_bytes_per_cycle = Fraction(0)
        self.last_ready = 0

    def _note(self, served: Fraction) -> None:
        if served > self.budget:
            raise BandwidthExceeded(f"{self.name}: {served} bytes in one cycle exceeds budget {self.budget}")
        if served > self.peak_bytes_per_cycle:
            self.peak_bytes_per_cycle = served

    def request(self, nbytes: int, earliest: int = 0) -> int:
        """Queue a transfer; returns the first cycle at which all of it is available."""
        self.requests += 1
        if nbytes <= 0:
            return earliest
        self.bytes_total += nbytes
        if earliest > self._cycle:
            self._cycle, self._used = earliest, Fraction(0)
        room = self.budget - self._used
        if nbytes <= room:
            self._used += nbytes
            self._note(self._used)
            ready = self._cycle + 1
            if self._used == self.budget:
                self._cycle, self._used = self._cycle + 1, Fraction(0)
        else:
            self._note(self.budget)
            rest = nbytes - room
            full = math.floor(rest / self.budget)
            tail = rest - full * self.budget
            if tail == 0:
                last = self._cycle + full
                self._cycle, self._used = last + 1, Fraction(0)
            else:
                last = self._cycle + full + 1
                self._cycle, self._used = last, tail
                self._note(tail)
            ready = last + 1
        self.last_ready = max(self.last_ready, ready)
        return ready
