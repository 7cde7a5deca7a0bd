"""Exhaustive search for the four-spin quasi-Fredkin primitive."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from ..sequence import Pulse, PulseSequence
from ..spin import build_subspace_basis, exchange_unitary

PAIRS_4 = tuple(itertools.combinations(range(1, 5), 2))


class SearchExhaustedError(RuntimeError):
    """No sequence up to the maximum length satisfied the primitive predicate."""


@lru_cache(maxsize=None)
def _blocks():
    basis = build_subspace_basis(4)
    labs = basis.labels
    singlet = [k for k, l in enumerate(labs) if l["S12"] == 0]
    triplet = [k for k, l in enumerate(labs) if l["S12"] == 1 and l["S123"] == 0.5]
    leaked = [k for k, l in enumerate(labs) if l["S123"] == 1.5]
    sign = np.array([1.0 if labs[k]["S"] == 1 else -1.0 for k in triplet])
    return basis, np.array(singlet), np.array(triplet), np.array(leaked), sign


def primitive_residual(u_coupled: np.ndarray) -> np.ndarray:
    """Distance of a (batch of) coupled 16x16 unitaries from the primitive form.

    The form is: c0 * identity on the S12 = 0 block, c1 * (gauge swap) on the
    (S12 = 1, S123 = 1/2) block, with no coupling out of either block.  The
    gauge swap is +1 on total spin 1 and -1 on total spin 0.
    """
    _, s0, s1, lk, sign = _blocks()
    u = np.asarray(u_coupled)
    if u.ndim == 2:
        u = u[None]
    enc = np.concatenate([s0, s1])
    a = u[:, s0[:, None], s0[None, :]]
    b = u[:, s1[:, None], s1[None, :]]
    c0 = a[:, 0, 0]
    c1 = b[:, 0, 0] * sign[0]
    eye = np.eye(len(s0))
    r = np.linalg.norm(a - c0[:, None, None] * eye, axis=(1, 2))
    r = r + np.linalg.norm(b - c1[:, None, None] * np.diag(sign), axis=(1, 2))
    r = r + np.linalg.norm(u[:, s1[:, None], s0[None, :]], axis=(1, 2))
    r = r + np.linalg.norm(u[:, s0[:, None], s1[None, :]], axis=(1, 2))
    r = r + np.linalg.norm(u[:, lk[:, None], enc[None, :]], axis=(1, 2))
    r = r + np.abs(np.abs(c0) - 1)
    return r


def is_quasi_fredkin(seq: PulseSequence, tol: float = 1e-10) -> bool:
    basis = _blocks()[0]
    return bool(primitive_residual(basis.to_coupled(seq.unitary()))[0] < tol)


def leaked_phase_flip(seq: PulseSequence) -> float:
    """Relative phase between S1234 = 2 and S1234 = 1 states of the leaked block.

    Returns the phase (radians, in (-pi, pi]) of <S1234=2|U|S1234=2> relative
    to <S1234=1|U|S1234=1>; a phase flip gives +-pi.
    """
    basis = _blocks()[0]
    u = basis.to_coupled(seq.unitary())
    labs = basis.labels
    k2 = next(k for k, l in enumerate(labs) if l["S123"] == 1.5 and l["S"] == 2)
    k1 = next(k for k, l in enumerate(labs) if l["S123"] == 1.5 and l["S"] == 1)
    return float(np.angle(u[k2, k2] / u[k1, k1]))


def _coupled_pulses(angle: float):
    basis = _blocks()[0]
    return np.array([basis.to_coupled(exchange_unitary(p, angle, 4).matrix) for p in PAIRS_4])


def _words(length: int):
    return list(itertools.product(range(len(PAIRS_4)), repeat=length))


def _products(words, mats):
    out = np.empty((len(words), 16, 16), dtype=complex)
    for k, w in enumerate(words):
        m = np.eye(16, dtype=complex)
        for i in w:
            m = mats[i] @ m
        out[k] = m
    return out


def search_quasi_fredkin(min_length: int = 4, max_length: int = 6, angle: float = math.pi / 2,
                         tol: float = 1e-10) -> list[PulseSequence]:
    """All shortest pi/2-pulse sequences on 4 spins implementing the primitive.

    Lengths are tried from `min_length` up; the first length with solutions is
    returned in lexicographic order of pair indices (so element 0 is canonical).
    """
    mats = _coupled_pulses(angle)
    for length in range(min_length, max_length + 1):
        head = length // 2
        first = _words(head)
        second = _words(length - head)
        a = _products(first, mats)
        b = _products(second, mats)
        hits = []
        for i, wa in enumerate(first):
            total = b @ a[i]
            ok = np.nonzero(primitive_residual(total) < tol)[0]
            hits.extend(wa + second[j] for j in ok)
        if hits:
            hits.sort()
            return [PulseSequence(tuple(Pulse(PAIRS_4[i], angle) for i in w), 4, "quasi-fredkin")
                    for w in hits]
    raise SearchExhaustedError(f"no quasi-Fredkin primitive up to length {max_length}")


@lru_cache(maxsize=None)
def quasi_fredkin_solutions() -> tuple[PulseSequence, ...]:
    return tuple(search_quasi_fredkin())


def canonical_quasi_fredkin() -> PulseSequence:
    return quasi_fredkin_solutions()[0]
