"""Result record shared by every test procedure."""

from __future__ import annotations

import time
from dataclasses import dataclass, field


@dataclass
class TestOutcome:
    """Outcome of one independence test on one sample."""

    method: str
    statistic: float
    p_value: float
    reject: bool
    alpha: float
    m: int
    params: dict = field(default_factory=dict)
    seed: int | None = None
    seconds: dict = field(default_factory=dict)
    null_model: object = None  # kept out of serialisation

    def to_dict(self, zero_timings: bool = False) -> dict:
        secs = {k: 0.0 for k in self.seconds} if zero_timings else dict(self.seconds)
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "m": self.m,
            "params": self.params,
            "seed": self.seed,
            "seconds": secs,
        }


class StageTimer:
    """Accumulates named wall-clock stages into a seconds dict."""

    def __init__(self):
        self.seconds = {}
        self._start = time.perf_counter()

    def stage(self, name):
        return _Stage(self, name)

    def finish(self) -> dict:
        self.seconds["total"] = time.perf_counter() - self._start
        return self.seconds


class _Stage:
    def __init__(self, timer, name):
        self.timer = timer
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        elapsed = time.perf_counter() - self.t0
        self.timer.seconds[self.name] = self.timer.seconds.get(self.name, 0.0) + elapsed
        return False
