"""Encoded-qubit preparation, Pauli-spin-blockade readout and leakage classes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spin import SpinState, build_subspace_basis

SIDES = ("M1", "M2")
DEFAULT_SPAM = {"M1": (0.95, 0.95), "M2": (0.8, 0.8)}


@dataclass(frozen=True)
class EncodedLabel:
    qubit_a: object  # 0, 1 or "leaked"
    qubit_b: object
    m123: float | None = None
    m456: float | None = None


@dataclass(frozen=True)
class PreparedEnsemble:
    members: tuple  # ((SpinState, probability), ...)
    description: str = ""

    def __post_init__(self):
        total = sum(p for _, p in self.members)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"ensemble probabilities sum to {total}")

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def average(self, fn) -> float:
        return float(math.fsum(p * fn(s) for s, p in self.members))


def _singlet() -> np.ndarray:
    return np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)


_UP = np.array([1.0, 0.0])
_DOWN = np.array([0.0, 1.0])


def singlet_pair_state(gauge: str) -> SpinState:
    """singlet(1,2) x |gauge> on 3 spins; gauge is 'u' or 'd'."""
    return SpinState.from_vector(np.kron(_singlet(), _UP if gauge == "u" else _DOWN))


def prepare_single_qubit_ensemble() -> PreparedEnsemble:
    members = tuple((singlet_pair_state(g), 0.5) for g in "ud")
    return PreparedEnsemble(members, "singlet(1,2) + unpolarized spin 3")


def prepare_two_qubit_ensemble() -> PreparedEnsemble:
    """singlet(1,2) s3 s4 singlet(5,6) for s3, s4 in {up, down}, equal weights."""
    members = []
    for s3, s4 in itertools.product((_UP, _DOWN), repeat=2):
        vec = np.kron(np.kron(np.kron(_singlet(), s3), s4), _singlet())
        members.append((SpinState.from_vector(vec.astype(complex)), 0.25))
    return PreparedEnsemble(tuple(members), "singlet(1,2) s3 s4 singlet(5,6)")


@lru_cache(maxsize=None)
def singlet_projector(n_spins: int, pair: tuple) -> np.ndarray:
    """Projector onto the singlet of `pair` (adjacent) on an n-spin register."""
    i, j = pair
    if j != i + 1:
        raise ValueError("singlet projector needs an adjacent pair")
    s = _singlet()
    p2 = np.outer(s, s).astype(complex)
    left = np.eye(2 ** (i - 1))
    right = np.eye(2 ** (n_spins - j))
    return np.kron(np.kron(left, p2), right)


def _side_pair(side: str, n_spins: int) -> tuple:
    if side not in SIDES:
        raise ValueError(f"unknown readout side {side!r}")
    if side == "M1":
        return (1, 2)
    if n_spins != 6:
        raise ValueError("side M2 needs a 6-spin state")
    return (5, 6)


def measure_psb(state, side: str = "M1") -> float:
    """Singlet probability of (1,2) (M1) or (5,6) (M2); blind to triplet vs leaked."""
    vec = state.amplitudes if isinstance(state, SpinState) else np.asarray(state)
    n = int(round(math.log2(vec.shape[0])))
    proj = singlet_projector(n, _side_pair(side, n))
    return float(np.real(np.vdot(vec, proj @ vec)))


def apply_spam_model(p_ideal, side: str = "M1", spam: tuple | None = None):
    """Linear visibility map p_obs = f0 p + (1 - f1)(1 - p)."""
    f0, f1 = DEFAULT_SPAM[side] if spam is None else spam
    for v in (f0, f1):
        if not 0 <= v <= 1:
            raise ValueError("SPAM fidelities must be in [0, 1]")
    p = np.asarray(p_ideal, dtype=float)
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValueError("probability outside [0, 1]")
    out = f0 * p + (1 - f1) * (1 - p)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _leak_projectors():
    basis = build_subspace_basis(6)
    out = {}
    for a, b in itertools.product((0.5, 1.5), repeat=2):
        idx = basis.indices(lambda l, a=a, b=b: l["S123"] == a and l["S456"] == b)
        vecs = basis.matrix[:, idx]
        out[(a, b)] = vecs
    return out


def classify_leakage(state) -> tuple[float, float, float, float]:
    """(p_encoded, p_leak_a, p_leak_b, p_leak_both) from S123 / S456 projectors."""
    vec = state.amplitudes if isinstance(state, SpinState) else np.asarray(state)
    proj = _leak_projectors()
    probs = {k: float(np.sum(np.abs(v.conj().T @ vec) ** 2)) for k, v in proj.items()}
    return probs[(0.5, 0.5)], probs[(1.5, 0.5)], probs[(0.5, 1.5)], probs[(1.5, 1.5)]


def leaked_probability_3spin(state) -> float:
    """S123 = 3/2 weight of a 3-spin state."""
    vec = state.amplitudes if isinstance(state, SpinState) else np.asarray(state)
    basis = build_subspace_basis(3)
    idx = basis.indices(lambda l: l["S"] == 1.5)
    return float(np.sum(np.abs(basis.matrix[:, idx].conj().T @ vec) ** 2))


def encoded_label(labels: dict) -> EncodedLabel:
    """EncodedLabel of one coupled 6-spin basis vector."""

    def side(pair, triple):
        if labels[triple] == 1.5:
            return "leaked"
        return int(labels[pair])

    return EncodedLabel(side("S12", "S123"), side("S56", "S456"))
