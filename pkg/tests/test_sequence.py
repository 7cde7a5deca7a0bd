import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoqubits.sequence import Pulse, PulseSequence, Timing, compact, concat, fold_angle
from eoqubits.spin import SpinArgumentError

nn_pairs = st.sampled_from([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])
grid_angles = st.integers(0, 7).map(lambda k: k * math.pi / 4)
free_angles = st.floats(0.0, 2 * math.pi, allow_nan=False)
pulses = st.lists(st.tuples(nn_pairs, st.one_of(grid_angles, free_angles)), max_size=12)


def test_fold_angle_snaps_grid():
    assert fold_angle(2 * math.pi) == 0.0
    assert fold_angle(-math.pi / 2) == 3 * math.pi / 2
    assert fold_angle(math.pi + 1e-14) == math.pi


def test_invalid_pulses():
    with pytest.raises(SpinArgumentError):
        Pulse((3, 3), 1.0)
    with pytest.raises(SpinArgumentError):
        PulseSequence((Pulse((4, 5), 1.0),), 4)


def test_duration():
    seq = PulseSequence.from_pairs([((1, 2), 1.0)] * 4, 3)
    assert seq.total_duration == 4 * 10 + 3 * 5
    assert PulseSequence((), 3).total_duration == 0.0
    assert seq.with_timing(Timing(10, 20)).total_duration == 4 * 10 + 3 * 20


@given(pulses)
def test_compaction_preserves_unitary(items):
    seq = PulseSequence.from_pairs(items, 6)
    c = compact(seq)
    assert len(c) <= len(seq)
    assert np.allclose(c.unitary(), seq.unitary(), atol=1e-12)
    assert all(0 <= p.angle < 2 * math.pi for p in c.pulses)


@given(pulses)
def test_inverse(items):
    seq = PulseSequence.from_pairs(items, 6)
    assert np.allclose((seq + seq.inverse()).unitary(), np.eye(64), atol=1e-10)


@given(pulses)
def test_json_round_trip(items):
    seq = PulseSequence.from_pairs(items, 6, name="x", timing=Timing(12.5, 7.5))
    back = PulseSequence.from_json(seq.to_json())
    assert back.name == "x" and back.timing == seq.timing
    for a, b in zip(seq.pulses, back.pulses):
        assert a.pair == b.pair
        assert a.angle == b.angle


def test_compaction_merges_through_disjoint_pairs():
    seq = PulseSequence.from_pairs([((1, 2), math.pi / 2), ((4, 5), 1.0), ((1, 2), 3 * math.pi / 2)], 6)
    c = compact(seq)
    assert [p.pair for p in c.pulses] == [(4, 5)]
    assert len(compact(seq, commute=False)) == 3


def test_concat_compacts():
    a = PulseSequence.from_pairs([((2, 3), math.pi)], 3)
    assert len(concat([a, a])) == 0
    assert len(concat([a, a], do_compact=False)) == 2


def test_spin_permutation():
    seq = PulseSequence.from_pairs([((1, 2), math.pi), ((2, 3), math.pi)], 3)
    assert seq.spin_permutation() == (3, 1, 2)
    assert PulseSequence.from_pairs([((1, 2), 1.0)], 3).spin_permutation() is None
