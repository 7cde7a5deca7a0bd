"""Spin-1/2 Hilbert spaces, exchange unitaries and coupled angular-momentum bases.

Conventions
-----------
Spins are numbered from 1.  Spin 1 is the most significant tensor factor, and
the single-spin basis is ordered (up, down).  Exchange pulses use

    U(theta) = exp(-i theta/2 (P_ij - I)),

so that a pi pulse is exactly the permutation of spins i and j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_SPINS = 6

# Nested-tuple coupling trees.  Leaves are spin indices; every internal node
# couples (left, right) in that order with Condon-Shortley CG coefficients.
# Qubit B is mirrored: its pair is coupled (6, 5) so the spin reversal maps
# qubit A's basis onto qubit B's without relative signs.
COUPLING_1 = 1
COUPLING_2 = (1, 2)
COUPLING_3 = ((1, 2), 3)
COUPLING_4 = (((1, 2), 3), 4)
COUPLING_6 = (((1, 2), 3), ((6, 5), 4))


class SpinArgumentError(ValueError):
    """Raised for invalid spin indices, pairs or coupling trees."""


def _check_pair(pair: Sequence[int], n_spins: int) -> tuple[int, int]:
    if len(pair) != 2:
        raise SpinArgumentError(f"pair must have two entries, got {pair!r}")
    i, j = int(pair[0]), int(pair[1])
    if not (1 <= i < j <= n_spins):
        raise SpinArgumentError(f"pair {pair!r} invalid for {n_spins} spins")
    return i, j


@dataclass(frozen=True)
class ExchangeAxis:
    """Unordered dot pair driven by one exchange gate."""

    pair: tuple[int, int]

    def __post_init__(self):
        i, j = sorted(int(p) for p in self.pair)
        if i < 1 or i == j:
            raise SpinArgumentError(f"invalid exchange pair {self.pair!r}")
        object.__setattr__(self, "pair", (i, j))

    @property
    def nearest_neighbor(self) -> bool:
        return self.pair[1] == self.pair[0] + 1

    @classmethod
    def gate(cls, n: int) -> "ExchangeAxis":
        """Hardware axis Xn couples dots n and n+1."""
        return cls((n, n + 1))


@dataclass(frozen=True)
class SpinState:
    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_spins <= MAX_SPINS:
            raise SpinArgumentError(f"n_spins must be in 1..{MAX_SPINS}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_spins,):
            raise SpinArgumentError(
                f"expected {2**self.n_spins} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise SpinArgumentError(f"state norm {norm} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = False) -> "SpinState":
        vec = np.asarray(vec, dtype=complex)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(int(round(math.log2(vec.size))), vec)

    @classmethod
    def product(cls, spins: str) -> "SpinState":
        """Product state from a string of 'u'/'d' characters, spin 1 first."""
        vec = np.array([1.0 + 0j])
        for s in spins:
            vec = np.kron(vec, _UP if s in "u0+" else _DOWN)
        return cls(len(spins), vec)


_UP = np.array([1.0, 0.0], dtype=complex)
_DOWN = np.array([0.0, 1.0], dtype=complex)


@dataclass(frozen=True)
class SpinOperator:
    n_spins: int
    matrix: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, SpinOperator):
            return SpinOperator(self.n_spins, self.matrix @ other.matrix)
        if isinstance(other, SpinState):
            return SpinState(self.n_spins, self.matrix @ other.amplitudes)
        return NotImplemented

    def dagger(self) -> "SpinOperator":
        return SpinOperator(self.n_spins, self.matrix.conj().T)

    def is_unitary(self, atol: float = 1e-12) -> bool:
        m = self.matrix
        return np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=atol, rtol=0)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return np.allclose(self.matrix, self.matrix.conj().T, atol=atol, rtol=0)


# --------------------------------------------------------------------------
# Elementary operators

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@lru_cache(maxsize=None)
def _spin_component(k: int, axis: str, n_spins: int) -> np.ndarray:
    mats = [np.eye(2, dtype=complex)] * n_spins
    mats = list(mats)
    mats[k - 1] = 0.5 * _PAULI[axis]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    out.setflags(write=False)
    return out


def spin_op(k: int, axis: str, n_spins: int) -> np.ndarray:
    """S_axis of spin k (1-based) embedded in n spins."""
    if not 1 <= k <= n_spins:
        raise SpinArgumentError(f"spin {k} out of range for {n_spins} spins")
    return _spin_component(k, axis, n_spins)


def total_spin_ops(n_spins: int, spins: Sequence[int] | None = None):
    """Return (Sx, Sy, Sz) summed over `spins` (default: all)."""
    spins = range(1, n_spins + 1) if spins is None else spins
    return tuple(sum(spin_op(k, a, n_spins) for k in spins) for a in "xyz")


def total_s2(n_spins: int, spins: Sequence[int] | None = None) -> np.ndarray:
    sx, sy, sz = total_spin_ops(n_spins, spins)
    return sx @ sx + sy @ sy + sz @ sz


@lru_cache(maxsize=None)
def _swap_perm(i: int, j: int, n_spins: int) -> np.ndarray:
    idx = np.arange(2**n_spins)
    bi = (idx >> (n_spins - i)) & 1
    bj = (idx >> (n_spins - j)) & 1
    diff = bi ^ bj
    flipped = idx ^ (diff << (n_spins - i)) ^ (diff << (n_spins - j))
    flipped.setflags(write=False)
    return flipped


def swap_matrix(pair: Sequence[int], n_spins: int) -> np.ndarray:
    """Permutation operator P_ij exchanging spins i and j."""
    i, j = _check_pair(pair, n_spins)
    perm = _swap_perm(i, j, n_spins)
    out = np.zeros((2**n_spins, 2**n_spins), dtype=complex)
    out[perm, np.arange(2**n_spins)] = 1.0
    return out


def permutation_matrix(mapping: Sequence[int]) -> np.ndarray:
    """Operator moving the state of spin k to position mapping[k-1]."""
    n = len(mapping)
    if sorted(mapping) != list(range(1, n + 1)):
        raise SpinArgumentError(f"not a permutation: {mapping!r}")
    dim = 2**n
    idx = np.arange(dim)
    target = np.zeros(dim, dtype=int)
    for k, dest in enumerate(mapping, start=1):
        bit = (idx >> (n - k)) & 1
        target |= bit << (n - dest)
    out = np.zeros((dim, dim), dtype=complex)
    out[target, idx] = 1.0
    return out


@lru_cache(maxsize=4096)
def _exchange_matrix(i: int, j: int, theta: float, n_spins: int) -> np.ndarray:
    # P has eigenvalues +1 (triplet) and -1 (singlet):
    # U = I + (exp(i theta) - 1) (I - P)/2
    p = swap_matrix((i, j), n_spins)
    eye = np.eye(2**n_spins, dtype=complex)
    u = eye + (np.exp(1j * theta) - 1.0) * 0.5 * (eye - p)
    u.setflags(write=False)
    return u


def exchange_unitary(pair, theta: float, n_spins: int) -> SpinOperator:
    """Exchange rotation exp(-i theta/2 (P_ij - I)) on n spins."""
    if isinstance(pair, ExchangeAxis):
        pair = pair.pair
    i, j = _check_pair(pair, n_spins)
    if not math.isfinite(theta):
        raise SpinArgumentError("theta must be finite")
    return SpinOperator(n_spins, _exchange_matrix(i, j, float(theta), n_spins))


def exchange_generator(pair, n_spins: int) -> np.ndarray:
    """Hermitian (P_ij - I)/2 so that U(theta) = exp(-i theta * generator)."""
    if isinstance(pair, ExchangeAxis):
        pair = pair.pair
    p = swap_matrix(pair, n_spins)
    return 0.5 * (p - np.eye(2**n_spins))


# --------------------------------------------------------------------------
# Clebsch-Gordan coupling


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, J: float, M: float) -> float:
    """<j1 m1; j2 m2 | J M> by the Racah formula (Condon-Shortley phases)."""
    if abs(m1 + m2 - M) > 1e-9:
        return 0.0
    if not (abs(j1 - j2) - 1e-9 <= J <= j1 + j2 + 1e-9):
        return 0.0
    if abs(m1) > j1 + 1e-9 or abs(m2) > j2 + 1e-9 or abs(M) > J + 1e-9:
        return 0.0

    def f(x: float) -> int:
        return math.factorial(int(round(x)))

    pre = (2 * J + 1) * f(j1 + j2 - J) * f(j1 - j2 + J) * f(-j1 + j2 + J) / f(j1 + j2 + J + 1)
    pre *= f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)
    total = 0.0
    kmin = int(round(max(0, j2 - J - m1, j1 + m2 - J)))
    kmax = int(round(min(j1 + j2 - J, j1 - m1, j2 + m2)))
    for k in range(kmin, kmax + 1):
        den = (f(k) * f(j1 + j2 - J - k) * f(j1 - m1 - k) * f(j2 + m2 - k)
               * f(J - j2 + m1 + k) * f(J - j1 - m2 + k))
        total += (-1) ** k / den
    return math.sqrt(pre) * total


def _leaves(tree) -> list[int]:
    if isinstance(tree, (int, np.integer)):
        return [int(tree)]
    if not (isinstance(tree, (tuple, list)) and len(tree) == 2):
        raise SpinArgumentError(f"coupling node must be a spin or a pair, got {tree!r}")
    return _leaves(tree[0]) + _leaves(tree[1])


def node_name(tree) -> str:
    """Label name of an internal node, e.g. 'S123' for ((1, 2), 3)."""
    return "S" + "".join(str(k) for k in sorted(_leaves(tree)))


@dataclass
class _Multiplet:
    labels: dict
    j: float
    spins: tuple[int, ...]
    vectors: dict  # m -> vector over sorted(spins)


def _couple(tree) -> list[_Multiplet]:
    if isinstance(tree, (int, np.integer)):
        return [_Multiplet({}, 0.5, (int(tree),), {0.5: _UP.copy(), -0.5: _DOWN.copy()})]
    left, right = _couple(tree[0]), _couple(tree[1])
    name = node_name(tree)
    out = []
    for a in left:
        for b in right:
            spins = a.spins + b.spins
            order = np.argsort(spins)
            for J in np.arange(abs(a.j - b.j), a.j + b.j + 0.5, 1.0):
                J = float(J)
                vecs = {}
                for M in np.arange(-J, J + 0.5, 1.0):
                    M = float(M)
                    acc = np.zeros((2,) * len(spins), dtype=complex)
                    for ma, va in a.vectors.items():
                        mb = M - ma
                        if mb not in b.vectors:
                            continue
                        c = clebsch_gordan(a.j, ma, b.j, mb, J, M)
                        if c != 0.0:
                            acc += c * np.multiply.outer(
                                va.reshape((2,) * len(a.spins)),
                                b.vectors[mb].reshape((2,) * len(b.spins)))
                    vecs[M] = acc.transpose(order).reshape(-1)
                labels = {**a.labels, **b.labels, name: J}
                out.append(_Multiplet(labels, J, tuple(sorted(spins)), vecs))
    return out


@dataclass(frozen=True)
class SubspaceBasis:
    """Unitary change of basis from product spins to coupled labels.

    Column k of `matrix` is the coupled basis vector carrying `labels[k]`.
    Each label dict holds every intermediate node value plus total 'S' and 'm'.
    """

    n_spins: int
    coupling_order: object
    labels: tuple
    matrix: np.ndarray = field(repr=False)

    def indices(self, predicate: Callable[[dict], bool]) -> np.ndarray:
        return np.array([k for k, lab in enumerate(self.labels) if predicate(lab)], dtype=int)

    def to_coupled(self, op) -> np.ndarray:
        m = op.matrix if isinstance(op, SpinOperator) else np.asarray(op)
        return self.matrix.conj().T @ m @ self.matrix

    def from_coupled(self, op) -> np.ndarray:
        return self.matrix @ np.asarray(op) @ self.matrix.conj().T

    def projector(self, predicate: Callable[[dict], bool]) -> np.ndarray:
        cols = self.matrix[:, self.indices(predicate)]
        return cols @ cols.conj().T


def build_subspace_basis(n_spins: int, coupling_order=None) -> SubspaceBasis:
    """Coupled basis from sequential Clebsch-Gordan coupling along a binary tree."""
    if coupling_order is None:
        coupling_order = _default_coupling(n_spins)
    return _build_basis_cached(n_spins, _freeze(coupling_order))


def _freeze(tree):
    if isinstance(tree, (int, np.integer)):
        return int(tree)
    if isinstance(tree, (tuple, list)) and len(tree) == 2:
        return (_freeze(tree[0]), _freeze(tree[1]))
    raise SpinArgumentError(f"invalid coupling node {tree!r}")


def _default_coupling(n_spins: int):
    return {1: COUPLING_1, 2: COUPLING_2, 3: COUPLING_3, 4: COUPLING_4, 6: COUPLING_6}.get(
        n_spins, _chain(n_spins))


def _chain(n_spins: int):
    tree = 1
    for k in range(2, n_spins + 1):
        tree = (tree, k)
    return tree


@lru_cache(maxsize=None)
def _build_basis_cached(n_spins: int, tree) -> SubspaceBasis:
    leaves = _leaves(tree)
    if sorted(leaves) != list(range(1, n_spins + 1)):
        raise SpinArgumentError(
            f"coupling order {tree!r} must cover spins 1..{n_spins} exactly once")
    cols, labels = [], []
    for mult in _couple(tree):
        for m in sorted(mult.vectors):
            lab = dict(mult.labels)
            lab.pop(node_name(tree), None)
            lab["S"] = mult.j
            lab["m"] = m + 0.0
            labels.append(lab)
            cols.append(mult.vectors[m])
    mat = np.array(cols).T
    mat.setflags(write=False)
    return SubspaceBasis(n_spins, tree, tuple(labels), mat)


def project_onto(labels_predicate: Callable[[dict], bool], basis: SubspaceBasis, operator):
    """Restrict an operator to the basis vectors selected by `labels_predicate`.

    Returns (block, leakage_norm) where leakage_norm is the Frobenius norm of the
    matrix elements coupling selected and unselected vectors.
    """
    m = operator.matrix if isinstance(operator, SpinOperator) else np.asarray(operator)
    if m.shape != basis.matrix.shape:
        raise SpinArgumentError(
            f"operator shape {m.shape} does not match basis {basis.matrix.shape}")
    coupled = basis.to_coupled(m)
    sel = basis.indices(labels_predicate)
    rest = np.setdiff1d(np.arange(m.shape[0]), sel)
    block = coupled[np.ix_(sel, sel)]
    leak = math.sqrt(np.linalg.norm(coupled[np.ix_(rest, sel)]) ** 2
                     + np.linalg.norm(coupled[np.ix_(sel, rest)]) ** 2)
    return block, leak
