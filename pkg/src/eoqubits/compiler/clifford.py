"""Single- and two-qubit Clifford groups compiled to exchange sequences.

Two-qubit Cliffords use the usual four classes: C1 x C1 (576),
(C1 x C1) CNOT (S1 x S1) (5184), (C1 x C1) CNOT SWAP (S1 x S1) (5184, the
iSWAP-like class) and (C1 x C1) SWAP (576).  S1 is the order-3 subgroup that
cycles X -> Y -> Z.  Elements are identified by a phase-normalised key of their
encoded 4x4 unitary, which gives exact products and inverses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..sequence import PulseSequence
from .gates import build_fw_cnot, build_swap
from .synthesis import synthesize_single_qubit
from .verify import CNOT, HADAMARD, SWAP

_I2 = np.eye(2, dtype=complex)
_S = np.diag([1, 1j])
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.diag([1.0 + 0j, -1.0])


class CliffordGenerationError(RuntimeError):
    pass


def unitary_key(u: np.ndarray, decimals: int = 6) -> bytes:
    """Hashable key of a unitary modulo global phase."""
    flat = np.asarray(u, dtype=complex).ravel()
    k = int(np.argmax(np.abs(flat) > 1e-6))
    v = flat * (abs(flat[k]) / flat[k])
    v = np.round(v, decimals) + 0.0  # + 0.0 folds -0.0
    return v.tobytes()


def _generate_1q() -> list[np.ndarray]:
    """The 24 single-qubit Cliffords by breadth-first closure over H and S."""
    out = [_I2]
    keys = {unitary_key(_I2)}
    frontier = [_I2]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (HADAMARD, _S):
                w = g @ u
                k = unitary_key(w)
                if k not in keys:
                    keys.add(k)
                    out.append(w)
                    nxt.append(w)
        frontier = nxt
    if len(out) != 24:
        raise CliffordGenerationError(f"expected 24 single-qubit Cliffords, got {len(out)}")
    return out


def _maps(u, a, b) -> bool:
    return unitary_key(u @ a @ u.conj().T) == unitary_key(b)


@dataclass
class CliffordGroup1Q:
    """The 24 encoded single-qubit Cliffords and their exchange sequences."""

    unitaries: list
    sequences_a3: list  # on a 3-spin register (qubit A)
    sequences_a6: list  # qubit A on 6 spins
    sequences_b6: list  # qubit B on 6 spins
    s1: tuple  # indices of the X->Y->Z cycling subgroup {I, c, c^2}

    def __post_init__(self):
        self.index = {unitary_key(u): k for k, u in enumerate(self.unitaries)}

    def __len__(self) -> int:
        return len(self.unitaries)

    def lookup(self, u: np.ndarray) -> int:
        k = self.index.get(unitary_key(u))
        if k is None:
            raise CliffordGenerationError("unitary is not a single-qubit Clifford")
        return k

    def compose(self, word) -> np.ndarray:
        u = _I2
        for k in word:
            u = self.unitaries[k] @ u
        return u

    def inverse_of(self, word) -> int:
        return self.lookup(self.compose(word).conj().T)

    def mean_pulses(self) -> float:
        return float(np.mean([len(s) for s in self.sequences_a3]))


@lru_cache(maxsize=None)
def single_qubit_cliffords() -> CliffordGroup1Q:
    us = _generate_1q()
    a3 = [synthesize_single_qubit(u, "A", 3, name=f"C1[{k}]") for k, u in enumerate(us)]
    a6 = [s.embedded(6) for s in a3]
    b6 = [synthesize_single_qubit(u, "B", 6, name=f"C1[{k}]") for k, u in enumerate(us)]
    cyc = next(k for k, u in enumerate(us) if _maps(u, _X, _Y) and _maps(u, _Y, _Z))
    cyc2 = next(k for k, u in enumerate(us) if unitary_key(u) == unitary_key(us[cyc] @ us[cyc]))
    return CliffordGroup1Q(us, a3, a6, b6, (0, cyc, cyc2))


@dataclass(frozen=True)
class CliffordRecipe:
    """U = (C_a x C_b) . entangler . (S_a x S_b); entangler in {'', 'cnot', 'cnot-swap', 'swap'}."""

    cls: str
    c_a: int
    c_b: int
    entangler: str = ""
    s_a: int = 0
    s_b: int = 0

    @property
    def n_cnot(self) -> int:
        return 1 if "cnot" in self.entangler else 0

    @property
    def n_swap(self) -> int:
        return 1 if "swap" in self.entangler else 0

    def n_single_qubit(self) -> int:
        """Non-identity single-qubit Clifford factors in the recipe."""
        return sum(k != 0 for k in (self.c_a, self.c_b, self.s_a, self.s_b))


_ENTANGLERS = {"": np.eye(4, dtype=complex), "cnot": CNOT, "swap": SWAP, "cnot-swap": CNOT @ SWAP}


class CliffordGroup2Q:
    """All 11520 two-qubit Cliffords as recipes, unitaries and pulse sequences."""

    def __init__(self, c1: CliffordGroup1Q):
        self.c1 = c1
        n1 = len(c1)
        recipes = []
        for a, b in itertools.product(range(n1), repeat=2):
            recipes.append(CliffordRecipe("single", a, b))
        for ent, cls in (("cnot", "cnot"), ("cnot-swap", "iswap")):
            for a, b in itertools.product(range(n1), repeat=2):
                for sa, sb in itertools.product(c1.s1, repeat=2):
                    recipes.append(CliffordRecipe(cls, a, b, ent, sa, sb))
        for a, b in itertools.product(range(n1), repeat=2):
            recipes.append(CliffordRecipe("swap", a, b, "swap"))
        self.recipes = recipes
        u1 = np.array(c1.unitaries)
        self.unitaries = np.array([self._unitary(r, u1) for r in recipes])
        self.index = {}
        for k, u in enumerate(self.unitaries):
            key = unitary_key(u)
            if key in self.index:
                raise CliffordGenerationError(f"duplicate two-qubit Clifford at recipe {k}")
            self.index[key] = k
        if len(self.index) != 11520:
            raise CliffordGenerationError(f"expected 11520 elements, got {len(self.index)}")
        self._seq_cache: dict = {}

    @staticmethod
    def _unitary(r: CliffordRecipe, u1) -> np.ndarray:
        post = np.kron(u1[r.c_a], u1[r.c_b])
        pre = np.kron(u1[r.s_a], u1[r.s_b])
        return post @ _ENTANGLERS[r.entangler] @ pre

    def __len__(self) -> int:
        return len(self.recipes)

    def lookup(self, u: np.ndarray) -> int:
        k = self.index.get(unitary_key(u))
        if k is None:
            raise CliffordGenerationError("unitary is not in the compiled Clifford set")
        return k

    def product(self, i: int, j: int) -> int:
        """Index of C_i . C_j (C_j applied first)."""
        return self.lookup(self.unitaries[i] @ self.unitaries[j])

    def compose(self, word) -> np.ndarray:
        u = np.eye(4, dtype=complex)
        for k in word:
            u = self.unitaries[k] @ u
        return u

    def inverse_of(self, word) -> int:
        return self.lookup(self.compose(word).conj().T)

    def sequence(self, k: int) -> PulseSequence:
        seq = self._seq_cache.get(k)
        if seq is None:
            r = self.recipes[k]
            c1 = self.c1
            parts = [c1.sequences_a6[r.s_a], c1.sequences_b6[r.s_b]]
            # the cnot-swap entangler is CNOT . SWAP, so the SWAP runs first
            if "swap" in r.entangler:
                parts.append(build_swap())
            if "cnot" in r.entangler:
                parts.append(build_fw_cnot())
            parts += [c1.sequences_a6[r.c_a], c1.sequences_b6[r.c_b]]
            # components run as compiled; no merging across component boundaries
            pulses = tuple(p for part in parts for p in part.pulses)
            seq = PulseSequence(pulses, 6, f"C2[{k}]")
            self._seq_cache[k] = seq
        return seq

    def pulse_count(self, k: int) -> int:
        r = self.recipes[k]
        c1 = self.c1
        n = sum(len(c1.sequences_a6[i]) for i in (r.s_a, r.c_a))
        n += sum(len(c1.sequences_b6[i]) for i in (r.s_b, r.c_b))
        return n + len(build_fw_cnot()) * r.n_cnot + len(build_swap()) * r.n_swap

    def statistics(self) -> dict:
        n = len(self.recipes)
        counts = {}
        for r in self.recipes:
            counts[r.cls] = counts.get(r.cls, 0) + 1
        pulses = [self.pulse_count(k) for k in range(n)]
        return {
            "n_elements": n,
            "class_sizes": counts,
            "fraction_with_cnot": sum(r.n_cnot > 0 for r in self.recipes) / n,
            "fraction_with_swap": sum(r.n_swap > 0 for r in self.recipes) / n,
            "mean_single_qubit_cliffords": float(np.mean([r.n_single_qubit() for r in self.recipes])),
            "mean_pulses": float(np.mean(pulses)),
            "mean_pulses_1q": single_qubit_cliffords().mean_pulses(),
        }


@lru_cache(maxsize=None)
def two_qubit_cliffords() -> CliffordGroup2Q:
    return CliffordGroup2Q(single_qubit_cliffords())


def compile_clifford_group():
    """(24-element single-qubit group, 11520-element two-qubit group)."""
    return single_qubit_cliffords(), two_qubit_cliffords()
