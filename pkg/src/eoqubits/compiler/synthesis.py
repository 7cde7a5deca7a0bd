"""Single-qubit gate synthesis from the two exchange axes of an encoded qubit.

Within the encoded qubit, exchange on the inner pair (1,2) is a z rotation and
exchange on the outer pair (2,3) rotates about an axis 120 degrees away.  For
qubit B the roles are played by (5,6) and (4,5).  An exchange pulse of angle
theta acts as exp(i theta/2) R_n(-theta) with n the pair's axis.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.transform import Rotation

from ..sequence import Pulse, PulseSequence, fold_angle, is_zero_angle

AXIS_INNER = np.array([0.0, 0.0, 1.0])
AXIS_OUTER = np.array([-math.sqrt(3) / 2, 0.0, -0.5])

QUBIT_PAIRS = {
    "A": {"inner": (1, 2), "outer": (2, 3)},
    "B": {"inner": (5, 6), "outer": (4, 5)},
}

_SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


class SynthesisError(ValueError):
    pass


def su2_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle/2 axis.sigma)."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = np.tensordot(n, _SIGMA, axes=1)
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * gen


def encoded_pulse(axis: str, theta: float) -> np.ndarray:
    """Encoded 2x2 action of an exchange pulse on the inner or outer pair."""
    n = AXIS_INNER if axis == "inner" else AXIS_OUTER
    return np.exp(0.5j * theta) * su2_rotation(n, -theta)


def sequence_action(pulses) -> np.ndarray:
    """Encoded action of (axis, theta) pulses applied first to last."""
    u = np.eye(2, dtype=complex)
    for axis, theta in pulses:
        u = encoded_pulse(axis, theta) @ u
    return u


def _to_rotation(u: np.ndarray) -> Rotation:
    v = u / np.sqrt(np.linalg.det(u))
    c = (v[0, 0] + v[1, 1]).real / 2
    n = np.array([-((v[0, 1] + v[1, 0]) / 2).imag,
                  ((v[0, 1] - v[1, 0]) / 2).real,
                  -((v[0, 0] - v[1, 1]) / 2).imag])
    s = np.linalg.norm(n)
    if s < 1e-15:
        return Rotation.identity()
    angle = 2 * math.atan2(s, c)
    return Rotation.from_rotvec(n / s * angle)


def _phase_infidelity(a: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - abs(np.trace(a.conj().T @ b)) / 2


def _signed_angle(v: np.ndarray, w: np.ndarray, axis: np.ndarray) -> float:
    vp = v - axis * (axis @ v)
    wp = w - axis * (axis @ w)
    return math.atan2(axis @ np.cross(vp, wp), vp @ wp)


def _euler3(rot: Rotation, a: np.ndarray, b: np.ndarray):
    """All (x1, x2, x3) with R_a(x3) R_b(x2) R_a(x1) = rot, or [] if unreachable."""
    c = float(a @ b)
    target = rot.apply(a)
    cos2 = (float(a @ target) - c * c) / (1 - c * c)
    if cos2 > 1 + 1e-9 or cos2 < -1 - 1e-9:
        return []
    x2_base = math.acos(max(-1.0, min(1.0, cos2)))
    out = []
    for x2 in {x2_base, -x2_base}:
        v = Rotation.from_rotvec(b * x2).apply(a)
        x3 = _signed_angle(v, target, a)
        rest = (Rotation.from_rotvec(a * x3) * Rotation.from_rotvec(b * x2)).inv() * rot
        rv = rest.as_rotvec()
        x1 = float(rv @ a)
        if np.linalg.norm(rv - a * x1) > 1e-7:
            continue
        out.append((x1, x2, x3))
    return out


def _candidates(target: np.ndarray):
    rot = _to_rotation(target)
    axes = {"inner": AXIS_INNER, "outer": AXIS_OUTER}
    found = []
    for first, second in (("inner", "outer"), ("outer", "inner")):
        for x1, x2, x3 in _euler3(rot, axes[first], axes[second]):
            pulses = [(first, -x1), (second, -x2), (first, -x3)]
            found.append(pulses)
    return found


def _refine(pulses, target):
    axes = [p[0] for p in pulses]

    def resid(x):
        d = sequence_action(list(zip(axes, x))).conj().T @ target
        ph = np.trace(d) / abs(np.trace(d)) if abs(np.trace(d)) > 0 else 1.0
        r = (d / ph - np.eye(2)).ravel()
        return np.concatenate([r.real, r.imag])

    sol = least_squares(resid, [p[1] for p in pulses], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return list(zip(axes, sol.x))


def _clean(pulses):
    out = []
    for axis, theta in pulses:
        if is_zero_angle(theta, 1e-10):
            continue
        theta = fold_angle(theta)
        if out and out[-1][0] == axis:
            theta = fold_angle(out[-1][1] + theta)
            out.pop()
            if is_zero_angle(theta, 1e-10):
                continue
        out.append((axis, theta))
    return out


def synthesize_pulses(target: np.ndarray, tol: float = 1e-10):
    """Shortest (axis, theta) list realising `target` up to global phase."""
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2) or not np.allclose(target @ target.conj().T, np.eye(2), atol=1e-10):
        raise SynthesisError("target must be a 2x2 unitary")
    target = target / np.sqrt(np.linalg.det(target))
    if _phase_infidelity(np.eye(2), target) < tol:
        return []
    best = None
    for pulses in _candidates(target):
        pulses = _clean(pulses)
        if _phase_infidelity(sequence_action(pulses), target) > tol:
            pulses = _clean(_refine(pulses, target))
        if _phase_infidelity(sequence_action(pulses), target) > tol:
            continue
        key = (len(pulses), sum(min(t, 2 * math.pi - t) for _, t in pulses), pulses[0][0] != "inner")
        if best is None or key < best[0]:
            best = (key, pulses)
    if best is not None:
        return best[1]
    # four pulses: peel off a leading rotation so the remainder is reachable
    for first in ("outer", "inner"):
        for k in range(1, 48):
            theta = 2 * math.pi * k / 48
            rest = target @ encoded_pulse(first, theta).conj().T
            for pulses in _candidates(rest):
                if pulses[0][0] == first:
                    continue
                pulses = _clean([(first, theta)] + pulses)
                if _phase_infidelity(sequence_action(pulses), target) > tol:
                    pulses = _clean(_refine(pulses, target))
                if _phase_infidelity(sequence_action(pulses), target) < tol:
                    return pulses
    raise SynthesisError("no decomposition found")


def synthesize_single_qubit(target: np.ndarray, qubit: str = "A", n_spins: int | None = None,
                            name: str = "") -> PulseSequence:
    """Exchange sequence (at most 4 pulses) implementing `target` on one encoded qubit.

    Qubit A lives on spins 1-3 and qubit B on spins 4-6.  By default qubit A is
    synthesised on a 3-spin register and qubit B on the full 6-spin register.
    """
    if qubit not in QUBIT_PAIRS:
        raise SynthesisError(f"unknown qubit {qubit!r}")
    if n_spins is None:
        n_spins = 3 if qubit == "A" else 6
    if qubit == "B" and n_spins != 6:
        raise SynthesisError("qubit B needs a 6-spin register")
    pairs = QUBIT_PAIRS[qubit]
    pulses = tuple(Pulse(pairs[axis], theta) for axis, theta in synthesize_pulses(target))
    return PulseSequence(pulses, n_spins, name)
