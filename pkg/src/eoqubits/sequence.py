"""Exchange pulse sequences: container, exact unitary, compaction and JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .spin import SpinArgumentError, exchange_unitary

TWO_PI = 2 * math.pi
_GRID = math.pi / 2


def fold_angle(theta: float) -> float:
    """Reduce to [0, 2pi); values within 1e-12 of a multiple of pi/2 are snapped."""
    theta = math.fmod(float(theta), TWO_PI)
    if theta < 0:
        theta += TWO_PI
    k = round(theta / _GRID)
    if abs(theta - k * _GRID) < 1e-12:
        theta = (k % 4) * _GRID
    if theta >= TWO_PI:
        theta -= TWO_PI
    return theta


def is_zero_angle(theta: float, atol: float = 1e-12) -> bool:
    t = fold_angle(theta)
    return t < atol or TWO_PI - t < atol


@dataclass(frozen=True)
class Pulse:
    pair: tuple[int, int]
    angle: float

    def __post_init__(self):
        i, j = sorted(int(p) for p in self.pair)
        if i < 1 or i == j:
            raise SpinArgumentError(f"invalid pulse pair {self.pair!r}")
        object.__setattr__(self, "pair", (i, j))
        object.__setattr__(self, "angle", fold_angle(self.angle))

    @property
    def nearest_neighbor(self) -> bool:
        return self.pair[1] == self.pair[0] + 1


@dataclass(frozen=True)
class Timing:
    """Pulse width and inter-pulse gap, in ns."""

    t_pulse: float = 10.0
    t_idle: float = 5.0

    def __post_init__(self):
        if self.t_pulse <= 0 or self.t_idle < 0:
            raise ValueError("t_pulse must be > 0 and t_idle >= 0")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered exchange pulses; the first pulse is applied first."""

    pulses: tuple[Pulse, ...] = ()
    n_spins: int = 6
    name: str = ""
    timing: Timing = field(default_factory=Timing)

    def __post_init__(self):
        pulses = tuple(p if isinstance(p, Pulse) else Pulse(*p) for p in self.pulses)
        for p in pulses:
            if p.pair[1] > self.n_spins:
                raise SpinArgumentError(f"pulse {p} outside {self.n_spins} spins")
        object.__setattr__(self, "pulses", pulses)

    @classmethod
    def from_pairs(cls, items: Iterable, n_spins: int = 6, name: str = "", **kw) -> "PulseSequence":
        return cls(tuple(Pulse(tuple(p), a) for p, a in items), n_spins, name, **kw)

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        if other.n_spins != self.n_spins:
            raise SpinArgumentError("cannot concatenate sequences on different spin counts")
        return replace(self, pulses=self.pulses + other.pulses)

    def renamed(self, name: str) -> "PulseSequence":
        return replace(self, name=name)

    def with_timing(self, timing: Timing) -> "PulseSequence":
        return replace(self, timing=timing)

    def embedded(self, n_spins: int, offset: int = 0) -> "PulseSequence":
        """Same pulses on a larger register, spin k mapped to k + offset."""
        pulses = tuple(Pulse((p.pair[0] + offset, p.pair[1] + offset), p.angle) for p in self.pulses)
        return PulseSequence(pulses, n_spins, self.name, self.timing)

    def relabeled(self, mapping: dict) -> "PulseSequence":
        pulses = tuple(Pulse((mapping.get(p.pair[0], p.pair[0]), mapping.get(p.pair[1], p.pair[1])), p.angle)
                       for p in self.pulses)
        return replace(self, pulses=pulses)

    def inverse(self) -> "PulseSequence":
        return replace(self, pulses=tuple(Pulse(p.pair, -p.angle) for p in reversed(self.pulses)),
                       name=f"{self.name}^-1" if self.name else "")

    @property
    def nearest_neighbor(self) -> bool:
        return all(p.nearest_neighbor for p in self.pulses)

    @property
    def total_duration(self) -> float:
        n = len(self.pulses)
        if n == 0:
            return 0.0
        return n * self.timing.t_pulse + (n - 1) * self.timing.t_idle

    def unitary(self) -> np.ndarray:
        dim = 2**self.n_spins
        u = np.eye(dim, dtype=complex)
        for p in self.pulses:
            u = exchange_unitary(p.pair, p.angle, self.n_spins).matrix @ u
        return u

    def spin_permutation(self) -> tuple[int, ...] | None:
        """Destination of each spin if every pulse is a pi pulse, else None."""
        pos = list(range(1, self.n_spins + 1))  # pos[k-1]: where spin k currently is
        for p in self.pulses:
            if abs(p.angle - math.pi) > 1e-12:
                return None
            a, b = p.pair
            pos = [b if x == a else a if x == b else x for x in pos]
        return tuple(pos)

    # --- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_spins": self.n_spins,
            "pulses": [{"pair": list(p.pair), "angle_rad": p.angle} for p in self.pulses],
            "timing": {"t_pulse_ns": self.timing.t_pulse, "t_idle_ns": self.timing.t_idle},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseSequence":
        timing = data.get("timing", {})
        return cls(
            tuple(Pulse(tuple(p["pair"]), float(p["angle_rad"])) for p in data["pulses"]),
            int(data["n_spins"]),
            data.get("name", ""),
            Timing(float(timing.get("t_pulse_ns", 10.0)), float(timing.get("t_idle_ns", 5.0))),
        )

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "PulseSequence":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text()
        return cls.from_dict(json.loads(text))


def compact(seq: PulseSequence, commute: bool = True) -> PulseSequence:
    """Merge same-pair pulses mod 2pi and drop zero-angle pulses.

    With `commute`, a pulse is moved earlier past pulses on disjoint pairs
    (which commute with it) until it meets a pulse on its own pair.
    """
    out: list[list] = []
    for p in seq.pulses:
        k = len(out) - 1
        merged = False
        while k >= 0:
            q = out[k]
            if q[0] == p.pair:
                q[1] = fold_angle(q[1] + p.angle)
                if is_zero_angle(q[1]):
                    out.pop(k)
                merged = True
                break
            if not commute or set(q[0]) & set(p.pair):
                break
            k -= 1
        if not merged and not is_zero_angle(p.angle):
            out.append([p.pair, p.angle])
    return replace(seq, pulses=tuple(Pulse(tuple(pr), a) for pr, a in out))


def concat(parts: Sequence[PulseSequence], name: str = "", n_spins: int | None = None,
           do_compact: bool = True) -> PulseSequence:
    n = n_spins if n_spins is not None else max(p.n_spins for p in parts)
    pulses: tuple = ()
    for part in parts:
        pulses += part.pulses
    seq = PulseSequence(pulses, n, name, parts[0].timing if parts else Timing())
    return compact(seq) if do_compact else seq
