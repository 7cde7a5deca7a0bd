import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoqubits.encoding import (apply_spam_model, classify_leakage, encoded_label, measure_psb,
                               prepare_single_qubit_ensemble, prepare_two_qubit_ensemble)
from eoqubits.spin import build_subspace_basis, exchange_unitary, total_s2, total_spin_ops

probs = st.floats(min_value=0, max_value=1)


def _product(bits: str) -> np.ndarray:
    v = np.array([1.0 + 0j])
    for b in bits:
        v = np.kron(v, [1, 0] if b == "u" else [0, 1])
    return v


def test_two_qubit_ensemble_members():
    ens = prepare_two_qubit_ensemble()
    assert len(ens) == 4
    assert all(p == 0.25 for _, p in ens)
    s12 = total_s2(6, (1, 2))
    s56 = total_s2(6, (5, 6))
    for s, _ in ens:
        v = s.amplitudes
        assert abs(np.vdot(v, s12 @ v)) < 1e-12
        assert abs(np.vdot(v, s56 @ v)) < 1e-12


def test_two_qubit_ensemble_m_distribution():
    sz = total_spin_ops(6)[2]
    dist = {}
    for s, p in prepare_two_qubit_ensemble():
        m = round(float(np.vdot(s.amplitudes, sz @ s.amplitudes).real), 9)
        dist[m] = dist.get(m, 0) + p
    assert dist == {1.0: 0.25, 0.0: 0.5, -1.0: 0.25}


def test_psb_on_prepared_and_product_states():
    s, _ = prepare_two_qubit_ensemble().members[0]
    assert measure_psb(s, "M1") == pytest.approx(1.0)
    assert measure_psb(s, "M2") == pytest.approx(1.0)
    assert measure_psb(_product("uuuddu"), "M1") == pytest.approx(0.0)
    assert measure_psb(_product("udduud"), "M1") == pytest.approx(0.5)
    assert measure_psb(_product("udduud"), "M2") == pytest.approx(0.5)


def test_psb_is_gauge_blind(rng):
    # rotate freely inside each fixed (S12, S123, S56, S456) block: only the gauge changes
    b = build_subspace_basis(6)
    keys = sorted({(l["S12"], l["S123"], l["S56"], l["S456"]) for l in b.labels})
    coeffs = rng.normal(size=64) + 1j * rng.normal(size=64)
    coeffs /= np.linalg.norm(coeffs)
    rotated = coeffs.copy()
    for key in keys:
        idx = b.indices(lambda l, k=key: (l["S12"], l["S123"], l["S56"], l["S456"]) == k)
        q, _ = np.linalg.qr(rng.normal(size=(len(idx), len(idx))) + 1j * rng.normal(size=(len(idx), len(idx))))
        rotated[idx] = q @ coeffs[idx]
    v1, v2 = b.matrix @ coeffs, b.matrix @ rotated
    for side in ("M1", "M2"):
        assert abs(measure_psb(v1, side) - measure_psb(v2, side)) < 1e-12


def test_spam_examples():
    assert apply_spam_model(0.3, "M1", (1.0, 1.0)) == pytest.approx(0.3)
    assert apply_spam_model(0.9, "M1", (0.5, 0.5)) == pytest.approx(0.5)
    assert apply_spam_model(1.0, "M2", (0.95, 0.8)) == pytest.approx(0.95)
    with pytest.raises(ValueError):
        apply_spam_model(1.2, "M1", (1.0, 1.0))
    with pytest.raises(ValueError):
        apply_spam_model(0.5, "M1", (1.1, 1.0))


@given(probs, probs, st.floats(0.5, 1), st.floats(0.5, 1))
def test_spam_affine_monotone(p, q, f0, f1):
    lo, hi = sorted((p, q))
    a = apply_spam_model(lo, "M1", (f0, f1))
    b = apply_spam_model(hi, "M1", (f0, f1))
    assert b >= a - 1e-15
    mid = apply_spam_model((lo + hi) / 2, "M1", (f0, f1))
    assert mid == pytest.approx((a + b) / 2, abs=1e-12)


def test_classify_prepared_member():
    s, _ = prepare_two_qubit_ensemble().members[1]
    assert classify_leakage(s) == pytest.approx((1, 0, 0, 0), abs=1e-12)


def test_classify_symmetric_a():
    v = np.kron(_product("uuu"), prepare_single_qubit_ensemble().members[0][0].amplitudes[::-1])
    enc, la, lb, both = classify_leakage(v)
    assert la + both == pytest.approx(1.0)


def test_middle_exchange_alone_cannot_leak_a_fresh_singlet():
    # a singlet on (1,2) forces S123 = 1/2 whatever spin 3 does
    for s, _ in prepare_two_qubit_ensemble():
        v = exchange_unitary((3, 4), math.pi / 2, 6).matrix @ s.amplitudes
        assert classify_leakage(v) == pytest.approx((1, 0, 0, 0), abs=1e-12)


def test_classify_after_symmetric_inter_qubit_pulses():
    u = (exchange_unitary((3, 4), math.pi / 2, 6).matrix @ exchange_unitary((2, 3), math.pi / 2, 6).matrix
         @ exchange_unitary((4, 5), math.pi / 2, 6).matrix)
    s, _ = prepare_two_qubit_ensemble().members[0]
    enc, la, lb, both = classify_leakage(u @ s.amplitudes)
    assert enc + la + lb + both == pytest.approx(1.0, abs=1e-10)
    assert la == pytest.approx(lb, abs=1e-12)
    assert la == pytest.approx(1 / 9, abs=1e-12)
    assert both == pytest.approx(5 / 144, abs=1e-12)


def test_classification_invariant_under_intra_qubit_pulse(rng):
    s, _ = prepare_two_qubit_ensemble().members[2]
    v = exchange_unitary((3, 4), 1.1, 6).matrix @ s.amplitudes
    before = classify_leakage(v)
    for pair in ((1, 2), (2, 3), (4, 5), (5, 6)):
        w = exchange_unitary(pair, rng.uniform(0, 2 * math.pi), 6).matrix @ v
        assert classify_leakage(w) == pytest.approx(before, abs=1e-12)


def test_encoded_label_rules():
    assert encoded_label({"S12": 0, "S123": 0.5, "S56": 1, "S456": 0.5}).qubit_b == 1
    assert encoded_label({"S12": 1, "S123": 1.5, "S56": 0, "S456": 0.5}).qubit_a == "leaked"
