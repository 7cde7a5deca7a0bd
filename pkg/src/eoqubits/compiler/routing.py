"""Nearest-neighbour routing of exchange sequences with pi-pulse spin swaps.

Spins are moved with pi pulses (exact SWAPs) so that every pulse of a
fully-connected sequence acts on adjacent dots.  The router minimises the
pulse count after merging, treating a swap that lands on the same dot pair as
the pulse before or after it as free (the two merge into one pulse).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from ..sequence import Pulse, PulseSequence, compact

INF = 10**9


class RoutingError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _tables(n: int):
    perms = list(itertools.permutations(range(1, n + 1)))  # perm[pos-1] = logical spin
    index = {p: k for k, p in enumerate(perms)}
    swap_to = np.empty((len(perms), n - 1), dtype=int)
    for k, p in enumerate(perms):
        for s in range(n - 1):
            q = list(p)
            q[s], q[s + 1] = q[s + 1], q[s]
            swap_to[k, s] = index[tuple(q)]
    where = np.empty((len(perms), n + 1), dtype=int)  # physical position of logical spin
    for k, p in enumerate(perms):
        for pos, spin in enumerate(p, start=1):
            where[k, spin] = pos
    return perms, index, swap_to, where


def route(seq: PulseSequence, final_permutation=None, name: str | None = None) -> PulseSequence:
    """Route `seq` onto a linear chain and return the physical sequence.

    `final_permutation[pos-1]` is the logical spin that must end at dot `pos`
    (default: every spin back home).  Returning spins 1 and 2 swapped, for
    example, realises an extra pi pulse on (1, 2) at no cost.
    """
    n = seq.n_spins
    perms, index, swap_to, where = _tables(n)
    n_perm = len(perms)
    n_last = n  # last physical pair index 0..n-2, or n-1 for "none"
    none = n - 1
    target = index[tuple(final_permutation) if final_permutation else tuple(range(1, n + 1))]

    start = np.full((n_perm, n_last), INF, dtype=np.int64)
    start[index[tuple(range(1, n + 1))], none] = 0
    layers = []  # per abstract pulse: (dist after swaps, swap predecessor table)
    dist = start
    pulses = seq.pulses
    for k in range(len(pulses) + 1):
        dist, pred = _relax_swaps(dist, swap_to, n)
        layers.append((dist, pred))
        if k == len(pulses):
            break
        a, b = pulses[k].pair
        pa, pb = where[:, a], where[:, b]
        adjacent = np.abs(pa - pb) == 1
        phys = np.minimum(pa, pb) - 1  # physical pair index
        nxt = np.full_like(dist, INF)
        rows = np.nonzero(adjacent)[0]
        for r in rows:
            s = phys[r]
            cost = dist[r].copy()
            cost[np.arange(n_last) != s] += 1
            best = cost.min()
            if best < nxt[r, s]:
                nxt[r, s] = best
        dist = nxt

    final = layers[-1][0][target]
    if final.min() >= INF:
        raise RoutingError("no routing found")
    # backtrack
    state = (target, int(np.argmin(final)))
    ops: list = []
    for k in range(len(pulses), -1, -1):
        dist_k, pred_k = layers[k]
        perm_i, last = state
        while pred_k[perm_i, last][0] >= 0:
            pp, pl, s = pred_k[perm_i, last]
            ops.append(("swap", s))
            perm_i, last = int(pp), int(pl)
        if k == 0:
            break
        a, b = pulses[k - 1].pair
        s = min(where[perm_i, a], where[perm_i, b]) - 1
        assert s == last
        ops.append(("pulse", k - 1, s))
        prev = layers[k - 1][0][perm_i]
        cost = prev.copy()
        cost[np.arange(n_last) != s] += 1
        state = (perm_i, int(np.argmin(cost)))
    ops.reverse()
    out = []
    for op in ops:
        if op[0] == "swap":
            s = op[1]
            out.append(Pulse((s + 1, s + 2), math.pi))
        else:
            _, k, s = op
            out.append(Pulse((s + 1, s + 2), pulses[k].angle))
    routed = PulseSequence(tuple(out), n, seq.name if name is None else name, seq.timing)
    return compact(routed, commute=False)


def _relax_swaps(dist: np.ndarray, swap_to: np.ndarray, n: int):
    """Shortest-path closure under single adjacent swaps within one layer."""
    n_perm, n_last = dist.shape
    pred = np.full((n_perm, n_last, 3), -1, dtype=np.int64)
    dist = dist.copy()
    for _ in range(4 * n * n):
        changed = False
        for s in range(n - 1):
            dst = swap_to[:, s]
            # swapping on pair s after last pulse on pair s merges for free
            cost = dist + 1
            cost[:, s] = dist[:, s]
            best_last = np.argmin(cost, axis=1)
            best = cost[np.arange(n_perm), best_last]
            improve = best < dist[dst, s]
            if improve.any():
                src = np.nonzero(improve)[0]
                dist[dst[src], s] = best[src]
                pred[dst[src], s, 0] = src
                pred[dst[src], s, 1] = best_last[src]
                pred[dst[src], s, 2] = s
                changed = True
        if not changed:
            break
    return dist, pred
