import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eoqubits.compiler.clifford import single_qubit_cliffords, two_qubit_cliffords, unitary_key
from eoqubits.compiler.gates import (build_fw_cnot, build_fwcz_linear, build_lccz, build_swap,
                                     fully_connected_cores, fw_core)
from eoqubits.compiler.routing import route
from eoqubits.compiler.search import (PAIRS_4, is_quasi_fredkin, leaked_phase_flip,
                                      quasi_fredkin_solutions, search_quasi_fredkin)
from eoqubits.compiler.synthesis import (SynthesisError, encoded_pulse, sequence_action,
                                         synthesize_single_qubit)
from eoqubits.compiler.verify import (CNOT, CZ, HADAMARD, IDENTITY4, SWAP, EncodedGateSpec,
                                      encoded_action, leaked_a_action, leaked_rotation_tilt,
                                      phase_fidelity, verify_encoded)
from eoqubits.encoding import measure_psb, prepare_two_qubit_ensemble
from eoqubits.sequence import PulseSequence

HALF_PI = math.pi / 2


def _su2(a, b, c):
    return (encoded_pulse("inner", a) @ encoded_pulse("outer", b) @ encoded_pulse("inner", c))


# --- quasi-Fredkin search --------------------------------------------------


def test_search_finds_six_pulse_primitive_quickly():
    t = time.perf_counter()
    sols = search_quasi_fredkin()
    assert time.perf_counter() - t < 10
    assert len(sols[0]) <= 6
    assert all(is_quasi_fredkin(s) for s in sols)
    assert sols == sorted(sols, key=lambda s: [PAIRS_4.index(p.pair) for p in s.pulses])


def test_empty_and_single_pair_candidates_fail():
    assert not is_quasi_fredkin(PulseSequence((), 4))
    assert not is_quasi_fredkin(PulseSequence.from_pairs([((1, 2), HALF_PI)] * 4, 4))


def test_canonical_primitive_flips_leaked_phase():
    flip = leaked_phase_flip(quasi_fredkin_solutions()[0])
    assert abs(abs(flip) - math.pi) < 1e-10


# --- two-qubit gates -------------------------------------------------------


def _check(seq, target, n):
    rep = verify_encoded(seq, EncodedGateSpec(target))
    assert rep.gauge_consistent
    assert rep.min_fidelity > 1 - 1e-10
    assert {s for s, _ in rep.encoded_fidelity_per_sector} == {0.0, 1.0}
    assert len(seq) == n
    assert seq.nearest_neighbor
    assert all(0 <= p.angle < 2 * math.pi for p in seq.pulses)


def test_fwcz():
    _check(build_fwcz_linear(), CZ, 26)


def test_fw_cnot():
    _check(build_fw_cnot(), CNOT, 28)


def test_swap():
    seq = build_swap()
    _check(seq, SWAP, 15)
    assert seq.spin_permutation() == (6, 5, 4, 3, 2, 1)
    rep = verify_encoded(seq + seq, EncodedGateSpec(IDENTITY4))
    assert rep.min_fidelity > 1 - 1e-10


def test_lccz_contract():
    seq = build_lccz()
    rep = verify_encoded(seq, EncodedGateSpec(CZ, "contain_b"))
    assert rep.passed(1e-10)
    assert rep.leaked_a_action["b_leakage"] < 1e-10
    assert rep.leaked_a_action["sqrt_z_fidelity"] > 1 - 1e-10
    assert seq.nearest_neighbor


def test_fw_cnot_spreads_leakage():
    leak = leaked_a_action(build_fw_cnot().unitary())
    assert leak["b_leakage"] > 1e-3
    rep = verify_encoded(build_fw_cnot(), EncodedGateSpec(CNOT, "contain_b"))
    assert not rep.passed()


def test_fwcz_leaked_axis_tilt():
    tilt = leaked_rotation_tilt(build_fwcz_linear().unitary())
    assert abs(tilt - math.atan(3 * math.sqrt(15) / 11)) < 1e-6


def test_cores_share_action():
    ref = encoded_action(fw_core().unitary(), 6)[0]
    for core in fully_connected_cores():
        assert len(core) == 14
        blocks = encoded_action(core.unitary(), 6)[0]
        for k in ref:
            assert phase_fidelity(ref[k], blocks[k]) > 1 - 1e-10


def test_cnot_keeps_00():
    u = build_fw_cnot().unitary()
    for s, _ in prepare_two_qubit_ensemble():
        v = u @ s.amplitudes
        assert measure_psb(v, "M1") == pytest.approx(1, abs=1e-10)
        assert measure_psb(v, "M2") == pytest.approx(1, abs=1e-10)


def test_identity_verification():
    rep = verify_encoded(PulseSequence((), 6), EncodedGateSpec(IDENTITY4))
    assert all(f == pytest.approx(1) for f in rep.encoded_fidelity_per_sector.values())


# --- routing ---------------------------------------------------------------

any_pair = st.sampled_from(list(itertools.combinations(range(1, 7), 2)))


@settings(max_examples=10)
@given(st.lists(st.tuples(any_pair, st.sampled_from([HALF_PI, math.pi, 1.0])), min_size=1, max_size=5))
def test_routing_preserves_unitary(items):
    seq = PulseSequence.from_pairs(items, 6)
    routed = route(seq)
    assert routed.nearest_neighbor
    assert np.allclose(routed.unitary(), seq.unitary(), atol=1e-10)


# --- single-qubit synthesis ------------------------------------------------

angle = st.floats(0, 2 * math.pi, allow_nan=False)


@given(angle, angle, angle)
def test_synthesis_reaches_any_su2(a, b, c):
    target = _su2(a, b, c)
    seq = synthesize_single_qubit(target, "A")
    assert len(seq) <= 4
    acts = [("inner" if p.pair == (1, 2) else "outer", p.angle) for p in seq.pulses]
    assert phase_fidelity(target, sequence_action(acts)) > 1 - 1e-10
    rep = verify_encoded(seq, EncodedGateSpec(target))
    assert rep.min_fidelity > 1 - 1e-10


def test_synthesis_examples():
    assert len(synthesize_single_qubit(np.eye(2), "A")) == 0
    z = synthesize_single_qubit(np.diag([1, np.exp(1j * 0.4)]), "A")
    assert [p.pair for p in z.pulses] == [(1, 2)]
    h = synthesize_single_qubit(HADAMARD, "A")
    assert len(h) == 3
    with pytest.raises(SynthesisError):
        synthesize_single_qubit(np.ones((2, 2)), "A")


def test_qubit_b_synthesis_on_six_spins():
    seq = synthesize_single_qubit(HADAMARD, "B")
    rep = verify_encoded(seq, EncodedGateSpec(np.kron(np.eye(2), HADAMARD)))
    assert rep.min_fidelity > 1 - 1e-10


# --- Clifford groups -------------------------------------------------------


def test_single_qubit_group():
    c1 = single_qubit_cliffords()
    assert len(c1) == 24
    for k, (u, seq) in enumerate(zip(c1.unitaries, c1.sequences_a3)):
        assert verify_encoded(seq, EncodedGateSpec(u)).min_fidelity > 1 - 1e-10


def test_two_qubit_statistics():
    stats = two_qubit_cliffords().statistics()
    assert stats["n_elements"] == 11520
    assert stats["class_sizes"] == {"single": 576, "cnot": 5184, "iswap": 5184, "swap": 576}
    assert stats["fraction_with_cnot"] == 0.9
    assert stats["fraction_with_swap"] == 0.5
    assert abs(stats["mean_single_qubit_cliffords"] - 3.1) <= 0.1
    assert abs(stats["mean_pulses"] - 41.1) <= 1.5


def test_two_qubit_closure(rng):
    c2 = two_qubit_cliffords()
    idx = rng.integers(0, len(c2), size=(10_000, 2))
    for i, j in idx:
        c2.product(int(i), int(j))  # raises if the product is missing


def test_compiled_cliffords_verify(rng):
    c2 = two_qubit_cliffords()
    for k in rng.integers(0, len(c2), 12):
        rep = verify_encoded(c2.sequence(int(k)), EncodedGateSpec(c2.unitaries[k]))
        assert rep.min_fidelity > 1 - 1e-10


def test_unitary_key_ignores_phase():
    u = _su2(0.3, 1.2, 2.0)
    assert unitary_key(u) == unitary_key(np.exp(0.7j) * u)
