"""Pulse angles to barrier-gate voltages and timed multi-channel schedules.

Exchange on barrier X_k (spins k, k+1) follows a saturating exponential

    J(V) = j_max * j0 * exp(V / v0) / (j_max + j0 * exp(V / v0))

in Hz, and a rectangular pulse of width t_pulse gives the angle
theta = 2 pi J t_pulse.  Each X pulse carries compensation amplitudes on
the two plungers P_k and P_{k+1}.  The default constants are representative
rather than measured.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .sequence import PulseSequence, Timing

NS = 1e-9
DEFAULT_V0 = 100.0 / math.log(1e6)  # mV; a 100 mV throw spans 10 kHz -> 10 GHz


class SaturationError(ValueError):
    """Requested angle needs an exchange at or above the saturation asymptote."""

    def __init__(self, message: str, pulse_index: int | None = None):
        super().__init__(message if pulse_index is None else f"pulse {pulse_index}: {message}")
        self.pulse_index = pulse_index


@dataclass(frozen=True)
class AxisCalibration:
    j0: float = 10e3  # Hz at zero throw
    v0: float = DEFAULT_V0  # mV
    j_max: float = 17e9  # Hz
    compensation: tuple = (-0.5, -0.5)  # (left, right) plunger coefficients

    def __post_init__(self):
        if not (self.j0 > 0 and self.v0 > 0):
            raise ValueError("j0 and v0 must be positive")
        if not self.j_max > self.j0:
            raise ValueError("j_max must exceed j0")
        if len(self.compensation) != 2:
            raise ValueError("compensation needs (left, right) coefficients")
        object.__setattr__(self, "compensation", tuple(float(c) for c in self.compensation))


@dataclass(frozen=True)
class PulseCalibration:
    """Per-axis calibration; axis k is the barrier between spins k and k+1."""

    axes: dict = field(default_factory=lambda: {k: AxisCalibration() for k in range(1, 6)})

    def axis(self, k: int) -> AxisCalibration:
        if k not in self.axes:
            raise KeyError(f"no calibration for exchange axis X{k}")
        return self.axes[k]

    @classmethod
    def uniform(cls, n_axes: int = 5, **kwargs) -> "PulseCalibration":
        return cls({k: AxisCalibration(**kwargs) for k in range(1, n_axes + 1)})

    def to_dict(self) -> dict:
        return {f"X{k}": asdict(a) for k, a in sorted(self.axes.items())}

    @classmethod
    def from_dict(cls, data: dict) -> "PulseCalibration":
        axes = {}
        for name, params in data.items():
            k = int(str(name).lstrip("X"))
            axes[k] = AxisCalibration(**params)
        return cls(axes)


def exchange_of_voltage(v, cal: AxisCalibration):
    """J(V) in Hz."""
    # written with the exponent folded into a logistic to stay finite at large V
    x = np.asarray(v, dtype=float) / cal.v0 + math.log(cal.j0 / cal.j_max)
    out = cal.j_max * expit(x)
    return float(out) if out.ndim == 0 else out


def voltage_of_exchange(j: float, cal: AxisCalibration) -> float:
    """Inverse of exchange_of_voltage for 0 < J < j_max."""
    if not j > 0:
        raise ValueError("exchange must be positive")
    if j >= cal.j_max:
        raise SaturationError(f"J = {j:.4g} Hz is at or above j_max = {cal.j_max:.4g} Hz")
    return cal.v0 * (math.log(j / cal.j0) - math.log1p(-j / cal.j_max))


def angle_to_voltage(axis: int, theta: float, t_pulse: float, cal: PulseCalibration) -> float:
    """Barrier amplitude (mV) for a rectangular pulse of angle theta and width t_pulse (ns)."""
    if not 0 < theta < 2 * math.pi:
        raise ValueError("theta must lie in (0, 2pi)")
    if not t_pulse > 0:
        raise ValueError("t_pulse must be positive")
    j = theta / (2 * math.pi * t_pulse * NS)
    return voltage_of_exchange(j, cal.axis(axis))


def voltage_to_angle(axis: int, volts: float, t_pulse: float, cal: PulseCalibration) -> float:
    return 2 * math.pi * exchange_of_voltage(volts, cal.axis(axis)) * t_pulse * NS


def _channels(n_spins: int) -> list[str]:
    return [f"X{k}" for k in range(1, n_spins)] + [f"P{k}" for k in range(1, n_spins + 1)]


@dataclass
class WaveformSchedule:
    """Rectangular segments (t_start ns, t_end ns, mV) per named gate electrode."""

    channels: dict
    meta: dict = field(default_factory=dict)

    @property
    def duration(self) -> float:
        ends = [seg[1] for segs in self.channels.values() for seg in segs]
        return max(ends) if ends else 0.0

    def segments(self, prefix: str = "") -> list:
        """All (channel, t0, t1, mV) whose channel name starts with `prefix`, by start time."""
        out = [(name, *seg) for name, segs in self.channels.items() if name.startswith(prefix)
               for seg in segs]
        return sorted(out, key=lambda s: (s[1], s[0]))

    def validate(self) -> None:
        for name, segs in self.channels.items():
            last = -math.inf
            for t0, t1, amp in sorted(segs):
                if not (t1 > t0 and math.isfinite(amp)):
                    raise ValueError(f"bad segment on {name}: {(t0, t1, amp)}")
                if t0 < last:
                    raise ValueError(f"overlapping segments on {name}")
                last = t1
        windows = sorted((s[1], s[2]) for s in self.segments("X"))
        for (a0, a1), (b0, _) in zip(windows, windows[1:]):
            if b0 < a1:
                raise ValueError("X-channel pulses overlap in time")

    def to_dict(self) -> dict:
        return {"channels": {k: [list(map(float, s)) for s in v] for k, v in self.channels.items()},
                "meta": self.meta}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "WaveformSchedule":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text_or_path).read_text()
        data = json.loads(text)
        channels = {k: [tuple(s) for s in v] for k, v in data["channels"].items()}
        return cls(channels, data.get("meta", {}))

    def sample(self, period: float = 0.5) -> tuple[np.ndarray, dict]:
        """Time grid (ns) and per-channel amplitudes; a segment holds on [t0, t1)."""
        if not period > 0:
            raise ValueError("sample period must be positive")
        n = int(math.floor(self.duration / period + 1e-9)) + 1
        t = np.arange(n) * period
        traces = {}
        for name, segs in self.channels.items():
            y = np.zeros(n)
            for t0, t1, amp in segs:
                y[(t >= t0 - 1e-9) & (t < t1 - 1e-9)] = amp
            traces[name] = y
        return t, traces

    def to_csv(self, path, period: float = 0.5) -> None:
        t, traces = self.sample(period)
        names = list(self.channels)
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_ns"] + names)
            for i, ti in enumerate(t):
                w.writerow([f"{ti:.6g}"] + [f"{traces[n][i]:.9g}" for n in names])


def emit_schedule(seq: PulseSequence, cal: PulseCalibration | None = None,
                  timing: Timing = Timing()) -> WaveformSchedule:
    """One rectangular barrier pulse per exchange pulse, strictly sequential.

    Pulse k starts at k (t_pulse + t_idle), so n pulses last
    n t_pulse + (n - 1) t_idle.  Only nearest-neighbour pulses map to a barrier.
    """
    cal = cal or PulseCalibration.uniform(max(seq.n_spins - 1, 1))
    channels = {name: [] for name in _channels(seq.n_spins)}
    step = timing.t_pulse + timing.t_idle
    for k, p in enumerate(seq.pulses):
        i, j = p.pair
        if j != i + 1:
            raise ValueError(f"pulse {k} on {p.pair} is not nearest-neighbour; route the sequence first")
        try:
            v = angle_to_voltage(i, p.angle, timing.t_pulse, cal)
        except SaturationError as exc:
            raise SaturationError(str(exc), k) from None
        except ValueError as exc:
            raise ValueError(f"pulse {k}: {exc}") from None
        t0, t1 = k * step, k * step + timing.t_pulse
        channels[f"X{i}"].append((t0, t1, v))
        left, right = cal.axis(i).compensation
        channels[f"P{i}"].append((t0, t1, left * v))
        channels[f"P{j}"].append((t0, t1, right * v))
    meta = {"name": seq.name, "n_pulses": len(seq), "n_spins": seq.n_spins,
            "t_pulse_ns": timing.t_pulse, "t_idle_ns": timing.t_idle,
            "calibration": cal.to_dict()}
    out = WaveformSchedule(channels, meta)
    out.validate()
    return out


def schedule_to_angles(schedule: WaveformSchedule, cal: PulseCalibration | None = None,
                       t_pulse: float | None = None) -> list[tuple[tuple[int, int], float]]:
    """Read the X segments back through J(V) t_pulse: [(pair, angle)] in time order."""
    if cal is None:
        cal = PulseCalibration.from_dict(schedule.meta["calibration"])
    out = []
    for name, t0, t1, v in schedule.segments("X"):
        k = int(name[1:])
        width = (t1 - t0) if t_pulse is None else t_pulse
        out.append(((k, k + 1), voltage_to_angle(k, v, width, cal)))
    return out
