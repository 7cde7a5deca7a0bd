import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoqubits.spin import (SpinArgumentError, SpinState, build_subspace_basis, clebsch_gordan,
                           exchange_generator, exchange_unitary, project_onto, spin_op,
                           swap_matrix, total_s2, total_spin_ops)

angles = st.floats(min_value=-4 * math.pi, max_value=4 * math.pi, allow_nan=False)
pairs6 = st.sampled_from(list(itertools.combinations(range(1, 7), 2)))


def test_zero_angle_is_identity():
    assert np.allclose(exchange_unitary((2, 3), 0.0, 4).matrix, np.eye(16), atol=1e-14)


def test_pi_pulse_is_swap_without_phase():
    u = exchange_unitary((1, 2), math.pi, 3).matrix
    assert np.allclose(u, swap_matrix((1, 2), 3), atol=1e-14)


def test_two_half_pi_pulses_make_a_pi_pulse():
    h = exchange_unitary((3, 4), math.pi / 2, 6).matrix
    assert np.allclose(h @ h, exchange_unitary((3, 4), math.pi, 6).matrix, atol=1e-12)


def test_pair_out_of_range():
    with pytest.raises(SpinArgumentError):
        exchange_unitary((3, 4), 1.0, 3)
    with pytest.raises(SpinArgumentError):
        exchange_unitary((2, 2), 1.0, 3)


@given(pairs6, angles)
def test_exchange_is_unitary_and_periodic(pair, theta):
    u = exchange_unitary(pair, theta, 6)
    assert u.is_unitary(1e-12)
    assert np.allclose(u.matrix, exchange_unitary(pair, theta + 2 * math.pi, 6).matrix, atol=1e-10)


@given(pairs6, angles)
def test_exchange_conserves_total_spin(pair, theta):
    u = exchange_unitary(pair, theta, 6).matrix
    s2 = total_s2(6)
    sz = total_spin_ops(6)[2]
    assert np.linalg.norm(u @ s2 - s2 @ u) < 1e-10
    assert np.linalg.norm(u @ sz - sz @ u) < 1e-10


def test_generator_matches_exponential():
    g = exchange_generator((2, 3), 3)
    w, v = np.linalg.eigh(g)
    theta = 0.73
    u = v @ np.diag(np.exp(-1j * theta * w)) @ v.conj().T
    assert np.allclose(u, exchange_unitary((2, 3), theta, 3).matrix, atol=1e-12)


def test_state_normalization_enforced():
    with pytest.raises(Exception):
        SpinState.from_vector(np.ones(4))
    s = SpinState.from_vector(np.ones(4), normalize=True)
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-12


def test_clebsch_gordan_known_values():
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / math.sqrt(2))
    assert clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == pytest.approx(-1 / math.sqrt(2))
    assert clebsch_gordan(1, 1, 0.5, -0.5, 0.5, 0.5) == pytest.approx(math.sqrt(2 / 3))


def test_two_spin_singlet():
    basis = build_subspace_basis(2)
    k = basis.indices(lambda l: l["S"] == 0)[0]
    vec = basis.matrix[:, k]
    ref = np.array([0, 1, -1, 0]) / math.sqrt(2)  # |ud> - |du>
    assert abs(abs(np.vdot(ref, vec)) - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_basis_unitary_and_round_trip(n, rng):
    b = build_subspace_basis(n)
    assert np.allclose(b.matrix.conj().T @ b.matrix, np.eye(2**n), atol=1e-12)
    op = rng.normal(size=(2**n, 2**n))
    assert np.allclose(b.from_coupled(b.to_coupled(op)), op, atol=1e-12)


def test_three_spin_quadruplet_dimension():
    b = build_subspace_basis(3)
    assert len(b.indices(lambda l: l["S"] == 1.5)) == 4
    assert len(b.indices(lambda l: l["S"] == 0.5)) == 4


def test_six_spin_m_sector_dimensions():
    b = build_subspace_basis(6)
    assert len(b.indices(lambda l: l["m"] == 0)) == 20
    assert len(b.indices(lambda l: l["m"] == 1)) == 15
    assert len(b.indices(lambda l: l["m"] == -1)) == 15
    assert len(b.indices(lambda l: l["S123"] == 0.5 and l["S456"] == 0.5)) == 16


def test_six_spin_total_spin_multiplicities():
    # oracle: brute-force diagonalization of total S^2
    w = np.linalg.eigvalsh(total_s2(6))
    counts = {}
    for v in w:
        s = round((-1 + math.sqrt(1 + 4 * v)) / 2, 6)
        counts[s] = counts.get(s, 0) + 1
    mult = {s: c // int(2 * s + 1) for s, c in counts.items()}
    assert mult == {0.0: 5, 1.0: 9, 2.0: 5, 3.0: 1}
    b = build_subspace_basis(6)
    for s, m in mult.items():
        assert len(b.indices(lambda l, s=s: l["S"] == s and l["m"] == 0)) == m


def test_coupled_labels_are_eigenvalues():
    b = build_subspace_basis(6)
    s2_123 = b.to_coupled(total_s2(6, (1, 2, 3)))
    expect = np.array([l["S123"] * (l["S123"] + 1) for l in b.labels])
    assert np.allclose(s2_123, np.diag(expect), atol=1e-10)
    s2_56 = b.to_coupled(total_s2(6, (5, 6)))
    assert np.allclose(np.diag(s2_56), [l["S56"] * (l["S56"] + 1) for l in b.labels], atol=1e-10)


def test_invalid_coupling_tree():
    with pytest.raises(SpinArgumentError):
        build_subspace_basis(3, ((1, 2), 2))
    with pytest.raises(SpinArgumentError):
        build_subspace_basis(3, ((1, 2), (3, 4)))


def test_project_identity():
    b = build_subspace_basis(6)
    block, leak = project_onto(lambda l: l["S123"] == 0.5, b, np.eye(64))
    assert np.allclose(block, np.eye(block.shape[0]))
    assert leak < 1e-12


@pytest.mark.parametrize("theta", np.linspace(0, 2 * math.pi, 9))
def test_intra_qubit_exchange_never_leaks(theta):
    b = build_subspace_basis(6)
    _, leak = project_onto(lambda l: l["S123"] == 0.5, b, exchange_unitary((1, 2), theta, 6))
    assert leak < 1e-12


def test_inter_qubit_exchange_leaks():
    b = build_subspace_basis(6)
    _, leak = project_onto(lambda l: l["S123"] == 0.5 and l["S456"] == 0.5, b,
                           exchange_unitary((3, 4), math.pi / 2, 6))
    assert leak > 0.1


@given(st.sampled_from([(1, 2), (2, 3), (1, 3)]), angles)
def test_exchange_trivial_on_quadruplet(pair, theta):
    b = build_subspace_basis(3)
    block, _ = project_onto(lambda l: l["S"] == 1.5, b, exchange_unitary(pair, theta, 3))
    assert np.allclose(block, np.eye(4), atol=1e-10)


def test_spin_op_commutator():
    sx, sy, sz = (spin_op(2, a, 3) for a in "xyz")
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)
