"""Encoded two-qubit process matrices (Pauli transfer matrices) by linear inversion."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..compiler.synthesis import synthesize_single_qubit
from ..compiler.verify import HADAMARD
from ..encoding import apply_spam_model, prepare_two_qubit_ensemble, singlet_projector
from ..sequence import PulseSequence, Timing
from ..simulate import (NoiseModel, ShotPropagator, ShotRealization, _gauge_layout, evolve,
                        realizations, schedule, shot_rng)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0 + 0j, -1.0]),
}
_S = np.diag([1, 1j])
# preparations from |0>: |0>, |1>, |+>, |+i>
PREPARATIONS = {"0": np.eye(2, dtype=complex), "1": _PAULI["X"], "+": HADAMARD, "+i": _S @ HADAMARD}
# measurement pre-rotations mapping Z, X, Y onto the readout axis
SETTINGS = {"Z": np.eye(2, dtype=complex), "X": HADAMARD, "Y": HADAMARD @ _S.conj().T}


def pauli_labels() -> list[str]:
    return [a + b for a, b in itertools.product("IXYZ", repeat=2)]


def _pauli2(label: str) -> np.ndarray:
    return np.kron(_PAULI[label[0]], _PAULI[label[1]])


def ideal_ptm(u: np.ndarray) -> np.ndarray:
    """R_ij = tr(P_i U P_j U^dag) / d for a d = 4 unitary."""
    ps = [_pauli2(l) for l in pauli_labels()]
    return np.array([[np.real(np.trace(pi @ u @ pj @ u.conj().T)) / 4 for pj in ps] for pi in ps])


@dataclass
class ProcessMatrix:
    ptm: np.ndarray
    labels: list
    mode: str
    condition_number: float | None = None

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([""] + self.labels)
            for lab, row in zip(self.labels, self.ptm):
                w.writerow([lab] + [repr(float(v)) for v in row])

    def to_dict(self) -> dict:
        return {"labels": self.labels, "mode": self.mode, "condition_number": self.condition_number,
                "ptm": [[float(v) for v in row] for row in self.ptm]}


def _analytic(u: np.ndarray) -> np.ndarray:
    """PTM of the gauge-traced encoded channel of a 6-spin unitary (leakage is trace loss)."""
    basis, sectors = _gauge_layout(6)
    uc = basis.matrix.conj().T @ u @ basis.matrix
    kraus = [uc[np.ix_(g2, g)] / np.sqrt(len(sectors)) for g in sectors for g2 in sectors]
    ps = [_pauli2(l) for l in pauli_labels()]
    r = np.zeros((16, 16))
    for j, pj in enumerate(ps):
        out = sum(k @ pj @ k.conj().T for k in kraus)
        for i, pi in enumerate(ps):
            r[i, j] = np.real(np.trace(pi @ out)) / 4
    return r


def _prep_sequences():
    out = {}
    for la, lb in itertools.product(PREPARATIONS, repeat=2):
        a = synthesize_single_qubit(PREPARATIONS[la], "A", 6)
        b = synthesize_single_qubit(PREPARATIONS[lb], "B", 6)
        out[(la, lb)] = a + b
    return out


def _meas_sequences():
    out = {}
    for sa, sb in itertools.product(SETTINGS, repeat=2):
        a = synthesize_single_qubit(SETTINGS[sa], "A", 6)
        b = synthesize_single_qubit(SETTINGS[sb], "B", 6)
        out[(sa, sb)] = a + b
    return out


def _bloch(label: str) -> np.ndarray:
    """Pauli vector (I, X, Y, Z) of a single-qubit preparation."""
    psi = PREPARATIONS[label] @ np.array([1.0, 0.0])
    rho = np.outer(psi, psi.conj())
    return np.array([np.real(np.trace(_PAULI[p] @ rho)) for p in "IXYZ"])


def _joint_probabilities(states: np.ndarray, weights) -> np.ndarray:
    """P(sA, sB) over singlet (0) / not singlet (1) outcomes on M1 and M2."""
    p1 = singlet_projector(6, (1, 2))
    p2 = singlet_projector(6, (5, 6))
    eye = np.eye(64)
    projs = {(0, 0): p1 @ p2, (0, 1): p1 @ (eye - p2), (1, 0): (eye - p1) @ p2,
             (1, 1): (eye - p1) @ (eye - p2)}
    out = np.zeros((2, 2))
    for k, w in enumerate(weights):
        v = states[:, k]
        for key, proj in projs.items():
            out[key] += w * np.real(np.vdot(v, proj @ v))
    return out


def _confusion(side: str, spam) -> np.ndarray:
    """Column-stochastic map from true to observed (singlet, other)."""
    if spam is None:
        return np.eye(2)
    f0, f1 = spam[side] if isinstance(spam, dict) else spam
    p_s = apply_spam_model(1.0, side, (f0, f1))
    p_t = apply_spam_model(0.0, side, (f0, f1))
    return np.array([[p_s, p_t], [1 - p_s, 1 - p_t]])


def extract_process_matrix(seq: PulseSequence, mode: str = "analytic", spam=None,
                           noise: NoiseModel | None = None, timing: Timing = Timing(),
                           n_shots: int | None = None, n_noise: int = 1, seed: int = 0) -> ProcessMatrix:
    """16 x 16 encoded PTM of `seq`.

    analytic: exact PTM of the gauge-averaged channel of the noiseless unitary.
    sampled: 16 product inputs x 9 pre-rotation settings read out by PSB on both
    sides, optionally through the SPAM model (dict side -> (f0, f1) or one
    pair for both) and with `n_shots` binomial samples per setting, then
    inverted linearly.
    """
    labels = pauli_labels()
    if mode == "analytic":
        return ProcessMatrix(_analytic(seq.unitary()), labels, mode)
    if mode != "sampled":
        raise ValueError("mode must be 'analytic' or 'sampled'")
    ens = prepare_two_qubit_ensemble()
    states0 = np.stack([s.amplitudes for s, _ in ens], axis=1)
    weights = [p for _, p in ens]
    preps = _prep_sequences()
    meas = _meas_sequences()
    conf = np.kron(_confusion("M1", spam), _confusion("M2", spam))
    rng = shot_rng(seed, 7)
    noise = noise or NoiseModel()
    reals = (list(realizations(noise, 6, n_noise, stream=8)) if noise.hyperfine_sigma
             or noise.exchange_fractional_sigma else [ShotRealization.zero(6)])
    props = [ShotPropagator(r, timing) for r in reals]
    inputs = []
    outputs = []
    for (la, lb), prep in preps.items():
        inputs.append(np.kron(_bloch(la), _bloch(lb)))
        expect = {"II": 1.0}
        for (sa, sb), post in meas.items():
            ops = schedule([prep, seq, post], timing)
            probs = np.zeros((2, 2))
            for prop in props:
                out = evolve(ops, states0, prop)
                probs += _joint_probabilities(out, weights) / len(props)
            obs = conf @ probs.ravel()
            obs = np.clip(obs, 0, None)
            obs = obs / obs.sum()
            if n_shots:
                obs = rng.multinomial(n_shots, obs) / n_shots
            q = obs.reshape(2, 2)
            za = q[0, 0] + q[0, 1] - q[1, 0] - q[1, 1]
            zb = q[0, 0] - q[0, 1] + q[1, 0] - q[1, 1]
            zz = q[0, 0] - q[0, 1] - q[1, 0] + q[1, 1]
            expect.setdefault(sa + "I", []).append(za)
            expect.setdefault("I" + sb, []).append(zb)
            expect.setdefault(sa + sb, []).append(zz)
        vec = np.array([1.0 if l == "II" else float(np.mean(expect[l])) for l in labels])
        outputs.append(vec)
    a = np.array(inputs)  # rows: inputs, columns: Pauli components
    b = np.array(outputs)
    # b = a @ R^T  ->  least squares for R^T
    rt, *_ = np.linalg.lstsq(a, b, rcond=None)
    return ProcessMatrix(rt.T, labels, mode, float(np.linalg.cond(a)))
