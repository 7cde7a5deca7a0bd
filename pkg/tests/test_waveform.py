import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoqubits.compiler.gates import build_fw_cnot, build_swap
from eoqubits.sequence import PulseSequence, Timing
from eoqubits.waveform import (AxisCalibration, PulseCalibration, SaturationError, WaveformSchedule,
                               angle_to_voltage, emit_schedule, exchange_of_voltage, schedule_to_angles,
                               voltage_of_exchange, voltage_to_angle)

CAL = PulseCalibration()
AX = CAL.axis(1)


def _theta_for(j_hz, t_ns):
    return 2 * math.pi * j_hz * t_ns * 1e-9


def test_calibration_invariants():
    for bad in ({"j0": 0}, {"v0": -1}, {"j0": 2e10}, {"compensation": (1,)}):
        with pytest.raises(ValueError):
            AxisCalibration(**bad)
    with pytest.raises(KeyError):
        CAL.axis(6)
    assert PulseCalibration.from_dict(CAL.to_dict()) == CAL


def test_anchor_at_zero_throw():
    # J(0) sits a relative j0/j_max below j0, so the anchor holds to ~v0 j0/j_max
    v = angle_to_voltage(1, _theta_for(AX.j0, 10.0), 10.0, CAL)
    assert abs(v) < 2 * AX.v0 * AX.j0 / AX.j_max


def test_doubling_angle_adds_v0_ln2():
    v1 = angle_to_voltage(2, 0.4, 10.0, CAL)
    v2 = angle_to_voltage(2, 0.8, 10.0, CAL)
    assert v2 - v1 == pytest.approx(AX.v0 * math.log(2), rel=0.01)


def test_saturation_boundary():
    t_ns = math.pi / (2 * math.pi * 0.99 * AX.j_max) * 1e9
    v = angle_to_voltage(1, math.pi, t_ns, CAL)
    assert math.isfinite(v) and v > 90
    with pytest.raises(SaturationError):
        angle_to_voltage(1, math.pi * 1.01 / 0.99, t_ns, CAL)


def test_bad_angles():
    for theta in (0.0, -1.0, 2 * math.pi):
        with pytest.raises(ValueError):
            angle_to_voltage(1, theta, 10.0, CAL)
    with pytest.raises(ValueError):
        voltage_of_exchange(0.0, AX)


@given(st.floats(1e-3, 2 * math.pi - 1e-3), st.floats(1e-3, 2 * math.pi - 1e-3))
def test_monotone_and_invertible(a, b):
    va, vb = (angle_to_voltage(3, x, 10.0, CAL) for x in (a, b))
    if a < b:
        assert va < vb
    assert voltage_to_angle(3, va, 10.0, CAL) == pytest.approx(a, rel=1e-12)


def test_exchange_stays_finite_far_out():
    assert exchange_of_voltage(1e4, AX) == pytest.approx(AX.j_max)
    assert exchange_of_voltage(-1e4, AX) == 0.0


def test_empty_sequence():
    sched = emit_schedule(PulseSequence((), 6))
    assert sched.duration == 0.0
    assert sched.segments() == []


def test_fw_cnot_schedule():
    seq = build_fw_cnot()
    timing = Timing(10.0, 5.0)
    sched = emit_schedule(seq, CAL, timing)
    xs = sched.segments("X")
    assert len(xs) == 28
    assert sched.duration == 28 * 10 + 27 * 5
    for (_, a0, a1, _), (_, b0, _, _) in zip(xs, xs[1:]):
        assert b0 >= a1
    for name, t0, t1, v in xs:
        k = int(name[1:])
        assert (f"P{k}", t0, t1, -0.5 * v) in sched.segments("P")
    back = schedule_to_angles(sched)
    assert [p for p, _ in back] == [p.pair for p in seq.pulses]
    assert np.allclose([a for _, a in back], [p.angle for p in seq.pulses], atol=1e-9, rtol=0)


def test_json_and_csv(tmp_path):
    sched = emit_schedule(build_swap())
    again = WaveformSchedule.from_json(sched.to_json(tmp_path / "w.json"))
    assert again.to_json() == sched.to_json()
    assert WaveformSchedule.from_json(tmp_path / "w.json").duration == sched.duration
    sched.to_csv(tmp_path / "w.csv", 0.5)
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0].split(",")[:2] == ["t_ns", "X1"]
    assert len(lines) == 1 + int(sched.duration / 0.5) + 1
    t, traces = sched.sample(0.5)
    assert np.count_nonzero(sum(np.abs(traces[f"X{k}"]) > 0 for k in range(1, 6)) > 1) == 0


def test_overlap_rejected():
    with pytest.raises(ValueError):
        WaveformSchedule({"X1": [(0, 10, 1.0), (5, 15, 1.0)]}).validate()
    with pytest.raises(ValueError):
        WaveformSchedule({"X1": [(0, 10, 1.0)], "X2": [(5, 15, 1.0)]}).validate()


def test_non_neighbour_and_saturating_pulses():
    with pytest.raises(ValueError):
        emit_schedule(PulseSequence.from_pairs([((1, 3), 1.0)], 3))
    seq = PulseSequence.from_pairs([((1, 2), 0.1), ((2, 3), 3.0)], 3)
    tight = PulseCalibration.uniform(2, j_max=3e7)
    with pytest.raises(SaturationError) as info:
        emit_schedule(seq, tight)
    assert info.value.pulse_index == 1
