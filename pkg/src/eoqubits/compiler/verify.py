"""Encoded-action verification of exchange sequences in the coupled basis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..sequence import PulseSequence
from ..spin import build_subspace_basis, exchange_unitary

COUPLING_LEAK_A = ((((1, 2), 3), (6, 5)), 4)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class EncodedGateSpec:
    """Target encoded unitary (2x2 on one qubit or 4x4 on two) and leakage contract.

    leakage_contract is one of 'unspecified', 'none_required' or 'contain_b'.
    """

    target: np.ndarray
    leakage_contract: str = "unspecified"
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.target, dtype=complex)
        if t.shape not in ((2, 2), (4, 4)):
            raise ValueError("target must be 2x2 or 4x4")
        if not np.allclose(t @ t.conj().T, np.eye(t.shape[0]), atol=1e-12):
            raise ValueError("target must be unitary")
        if self.leakage_contract not in ("unspecified", "none_required", "contain_b"):
            raise ValueError(f"unknown leakage contract {self.leakage_contract!r}")
        object.__setattr__(self, "target", t)

    @property
    def n_qubits(self) -> int:
        return 1 if self.target.shape[0] == 2 else 2


@dataclass
class VerificationReport:
    encoded_fidelity_per_sector: dict
    gauge_consistent: bool
    leakage_norm_encoded_block: float
    pulse_count: int
    leaked_a_action: dict | None = None
    encoded_blocks: dict = field(default_factory=dict, repr=False)

    @property
    def min_fidelity(self) -> float:
        return min(self.encoded_fidelity_per_sector.values())

    def passed(self, tol: float = 1e-10) -> bool:
        ok = self.gauge_consistent and self.min_fidelity > 1 - tol
        ok = ok and self.leakage_norm_encoded_block < math.sqrt(tol)
        if self.leaked_a_action is not None and self.leaked_a_action.get("contract") == "contain_b":
            ok = ok and self.leaked_a_action["b_leakage"] < tol
            ok = ok and self.leaked_a_action["sqrt_z_fidelity"] > 1 - tol
        return ok

    def to_dict(self) -> dict:
        return {
            "encoded_fidelity_per_sector": {f"S={s},m={m}": f for (s, m), f in
                                            sorted(self.encoded_fidelity_per_sector.items())},
            "min_fidelity": self.min_fidelity,
            "gauge_consistent": self.gauge_consistent,
            "leakage_norm_encoded_block": self.leakage_norm_encoded_block,
            "pulse_count": self.pulse_count,
            "leaked_a_action": self.leaked_a_action,
        }


def _encoded_value(lab: dict, pair: str, triple: str):
    if lab[triple] != 0.5:
        return None
    return int(lab[pair])


def encoded_sectors(n_spins: int):
    """Map (S, m) -> basis indices ordered by encoded label (qubit A first)."""
    basis = build_subspace_basis(n_spins)
    sectors: dict = {}
    for k, lab in enumerate(basis.labels):
        if n_spins == 3:
            a = _encoded_value(lab, "S12", "S")
            if a is None:
                continue
            sectors.setdefault((0.5, lab["m"]), {})[a] = k
        else:
            a = _encoded_value(lab, "S12", "S123")
            b = _encoded_value(lab, "S56", "S456")
            if a is None or b is None:
                continue
            sectors.setdefault((lab["S"], lab["m"]), {})[2 * a + b] = k
    return basis, {key: [v[i] for i in sorted(v)] for key, v in sectors.items()}


def encoded_action(u: np.ndarray, n_spins: int):
    """Per-sector encoded blocks and the leakage norm of the encoded subspace."""
    basis, sectors = encoded_sectors(n_spins)
    uc = basis.to_coupled(u)
    blocks = {key: uc[np.ix_(idx, idx)] for key, idx in sectors.items()}
    enc = np.concatenate(list(sectors.values()))
    rest = np.setdiff1d(np.arange(u.shape[0]), enc)
    leak = math.sqrt(np.linalg.norm(uc[np.ix_(rest, enc)]) ** 2
                     + np.linalg.norm(uc[np.ix_(enc, rest)]) ** 2)
    return blocks, leak


def phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|tr(a^dag b)| / dim, i.e. overlap up to a global phase."""
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def _as_unitary(seq_or_u, n_spins: int | None = None) -> tuple[np.ndarray, int, int]:
    if isinstance(seq_or_u, PulseSequence):
        return seq_or_u.unitary(), seq_or_u.n_spins, len(seq_or_u)
    u = np.asarray(seq_or_u)
    n = int(round(math.log2(u.shape[0])))
    return u, n, 0


def verify_encoded(seq, spec: EncodedGateSpec) -> VerificationReport:
    u, n_spins, count = _as_unitary(seq)
    if spec.n_qubits == 1 and n_spins != 3:
        raise ValueError("single-qubit specs need a 3-spin sequence")
    if spec.n_qubits == 2 and n_spins != 6:
        raise ValueError("two-qubit specs need a 6-spin sequence")
    blocks, leak = encoded_action(u, n_spins)
    fids = {key: phase_fidelity(spec.target, blk) for key, blk in blocks.items()}
    keys = sorted(blocks)
    ref = blocks[keys[0]]
    consistent = all(phase_fidelity(ref, blocks[k]) > 1 - 1e-10 for k in keys[1:])
    # a block that is not unitary (leakage) cannot be gauge consistent either
    consistent = consistent and all(
        np.allclose(b.conj().T @ b, np.eye(b.shape[0]), atol=1e-8) for b in blocks.values())
    leaked = None
    if n_spins == 6 and spec.leakage_contract != "unspecified":
        leaked = leaked_a_action(u)
        leaked["contract"] = spec.leakage_contract
    return VerificationReport(fids, consistent, leak, count, leaked, blocks)


def leaked_a_action(u: np.ndarray) -> dict:
    """Effect of a 6-spin unitary on inputs where qubit A is leaked (S123 = 3/2).

    Reports the worst-case probability that an encoded qubit B (S456 = 1/2) is
    pushed out of its code space, and the overlap of the leaked-sector action
    with sqrt(Z) on the (5, 6) pair (an exchange pi/2 or 3pi/2 pulse).
    """
    basis = build_subspace_basis(6)
    uc = basis.to_coupled(u)
    inputs = basis.indices(lambda l: l["S123"] == 1.5 and l["S456"] == 0.5)
    b_leaked_rows = basis.indices(lambda l: l["S456"] == 1.5)
    probs = np.sum(np.abs(uc[np.ix_(b_leaked_rows, inputs)]) ** 2, axis=0)
    sub = basis.indices(lambda l: l["S123"] == 1.5)
    block = uc[np.ix_(sub, sub)]
    out_norm = float(np.linalg.norm(uc[np.ix_(np.setdiff1d(np.arange(64), sub), sub)]))
    best, best_angle = 0.0, None
    for angle in (math.pi / 2, 3 * math.pi / 2):
        t = basis.to_coupled(exchange_unitary((5, 6), angle, 6).matrix)[np.ix_(sub, sub)]
        f = phase_fidelity(t, block)
        if f > best:
            best, best_angle = f, angle
    return {
        "b_leakage": float(probs.max()),
        "b_leakage_mean": float(probs.mean()),
        "a_sector_escape_norm": out_norm,
        "sqrt_z_fidelity": best,
        "sqrt_z_angle": best_angle,
    }


def su2_axis(block: np.ndarray) -> tuple[np.ndarray, float]:
    """Rotation axis (unit 3-vector) and angle of a 2x2 unitary, global phase removed."""
    det = np.linalg.det(block)
    v = block / np.sqrt(det)
    # v = cos(a/2) I - i sin(a/2) n.sigma
    c = (v[0, 0] + v[1, 1]).real / 2
    nx = -((v[0, 1] + v[1, 0]) / 2).imag
    ny = ((v[0, 1] - v[1, 0]) / 2).real
    nz = -((v[0, 0] - v[1, 1]) / 2).imag
    n = np.array([nx, ny, nz])
    s = np.linalg.norm(n)
    angle = 2 * math.atan2(s, c)
    return (n / s if s > 1e-15 else np.array([0.0, 0.0, 1.0])), angle


def leaked_rotation_tilt(u: np.ndarray, s_five: float = 1.5) -> float:
    """Tilt from z of the rotation induced on the (5,6) singlet-triplet pair
    when qubit A is leaked, in the sector where spins 1,2,3,5,6 total `s_five`.
    """
    basis = build_subspace_basis(6, COUPLING_LEAK_A)
    uc = basis.to_coupled(u)
    sel = [k for k, l in enumerate(basis.labels)
           if l["S123"] == 1.5 and l["S12356"] == s_five and l["S"] == s_five + 0.5
           and l["m"] == s_five + 0.5]
    sel.sort(key=lambda k: basis.labels[k]["S56"])
    block = uc[np.ix_(sel, sel)]
    axis, _ = su2_axis(block)
    return float(math.acos(min(1.0, abs(axis[2]))))
