"""Quasi-static noise Monte Carlo for exchange pulse sequences.

Each shot draws one set of local fields (6 x 3, rad/s) and one fractional
exchange error per adjacent pair, held fixed for the shot.  Pulses evolve under
H_J + H_B for t_pulse and gaps under H_B alone.  Times are in ns throughout
the simulation core; fields are converted from rad/s at the boundary.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
import numpy as np

from .compiler.verify import encoded_sectors
from .encoding import prepare_single_qubit_ensemble, singlet_projector
from .fitting import DecayFit, fit_decay
from .sequence import PulseSequence, Timing
from .spin import SpinState, build_subspace_basis, exchange_generator, spin_op

TimingConfig = Timing
NS = 1e-9
FIELD_MODES = ("isotropic", "longitudinal_only")


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """hyperfine_sigma in rad/s per Cartesian component; exchange sigma is fractional."""

    hyperfine_sigma: float = 0.0
    field_mode: str = "isotropic"
    exchange_fractional_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.hyperfine_sigma < 0 or self.exchange_fractional_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")
        if self.field_mode not in FIELD_MODES:
            raise ValueError(f"field_mode must be one of {FIELD_MODES}")

    @property
    def longitudinal(self) -> bool:
        return self.field_mode == "longitudinal_only"

    def replace(self, **kw) -> "NoiseModel":
        d = {**self.__dict__, **kw}
        return NoiseModel(**d)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ShotRealization:
    local_fields: np.ndarray  # (n_spins, 3) rad/s
    fractional_j_errors: np.ndarray  # (n_spins - 1,)

    @property
    def n_spins(self) -> int:
        return self.local_fields.shape[0]

    @classmethod
    def zero(cls, n_spins: int = 6) -> "ShotRealization":
        return cls(np.zeros((n_spins, 3)), np.zeros(n_spins - 1))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.local_fields) and not np.any(self.fractional_j_errors)


def shot_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for shot `key` under root `seed` (counter-based split)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def draw_realization(noise: NoiseModel, n_spins: int, rng: np.random.Generator) -> ShotRealization:
    # draw the full set regardless of mode so that modes share random numbers
    fields = rng.standard_normal((n_spins, 3)) * noise.hyperfine_sigma
    eps = rng.standard_normal(n_spins - 1) * noise.exchange_fractional_sigma
    if noise.longitudinal:
        fields[:, :2] = 0.0
    return ShotRealization(fields, eps)


def realizations(noise: NoiseModel, n_spins: int, n_shots: int, stream=0):
    """Shot realizations for one named stream (an int or a tuple of ints)."""
    key = tuple(stream) if isinstance(stream, tuple) else (stream,)
    for k in range(n_shots):
        yield draw_realization(noise, n_spins, shot_rng(noise.seed, *key, k))


@lru_cache(maxsize=None)
def _spin_ops(n_spins: int):
    return np.array([[spin_op(k, a, n_spins) for a in "xyz"] for k in range(1, n_spins + 1)])


@lru_cache(maxsize=None)
def _m_blocks(n_spins: int):
    """Product-basis indices grouped by number of down spins (fixed S_z)."""
    idx = np.arange(2**n_spins)
    downs = np.array([bin(i).count("1") for i in idx])
    return [idx[downs == k] for k in range(n_spins + 1)]


def field_hamiltonian(realization: ShotRealization) -> np.ndarray:
    """sum_d b_d . S_d in rad/ns."""
    ops = _spin_ops(realization.n_spins)
    return np.einsum("da,daij->ij", realization.local_fields * NS, ops)


def expm_hermitian(h: np.ndarray, t: float, blocks=None) -> np.ndarray:
    """exp(-i h t) by eigendecomposition, optionally block by block."""
    if blocks is None:
        w, v = np.linalg.eigh(h)
        return (v * np.exp(-1j * w * t)) @ v.conj().T
    u = np.zeros_like(h, dtype=complex)
    for b in blocks:
        sub = h[np.ix_(b, b)]
        w, v = np.linalg.eigh(sub)
        u[np.ix_(b, b)] = (v * np.exp(-1j * w * t)) @ v.conj().T
    return u


class ShotPropagator:
    """Per-shot cache of pulse and gap propagators."""

    def __init__(self, realization: ShotRealization, timing: Timing = Timing()):
        self.realization = realization
        self.timing = timing
        self.n = realization.n_spins
        self.h_field = field_hamiltonian(realization)
        transverse = np.any(realization.local_fields[:, :2])
        self.blocks = None if transverse else _m_blocks(self.n)
        self._cache: dict = {}

    def pulse(self, pair, angle: float) -> np.ndarray:
        key = ("p", pair, angle)
        u = self._cache.get(key)
        if u is None:
            i, j = pair
            eps = self.realization.fractional_j_errors[i - 1] if j == i + 1 else 0.0
            tp = self.timing.t_pulse
            h = angle * (1 + eps) / tp * exchange_generator(pair, self.n) + self.h_field
            u = expm_hermitian(h, tp, self.blocks)
            self._cache[key] = u
        return u

    def idle(self, duration: float) -> np.ndarray:
        key = ("i", duration)
        u = self._cache.get(key)
        if u is None:
            u = expm_hermitian(self.h_field, duration, self.blocks)
            self._cache[key] = u
        return u


def schedule(items, timing: Timing = Timing()) -> list:
    """Flatten sequences and idle durations (ns) into ('p', pair, angle) / ('i', t) ops.

    Consecutive pulses are separated by a t_idle gap; an explicit idle item
    replaces the gap at that position.
    """
    if isinstance(items, PulseSequence):
        items = [items]
    ops: list = []
    prev_pulse = False
    for item in items:
        if isinstance(item, PulseSequence):
            for p in item.pulses:
                if prev_pulse and timing.t_idle > 0:
                    ops.append(("i", timing.t_idle))
                ops.append(("p", p.pair, p.angle))
                prev_pulse = True
        else:
            t = float(item)
            if t < 0:
                raise ValueError("idle duration must be >= 0")
            if t > 0:
                ops.append(("i", t))
            prev_pulse = False
    return ops


def schedule_duration(ops, timing: Timing = Timing()) -> float:
    return sum(timing.t_pulse if op[0] == "p" else op[1] for op in ops)


def evolve(ops, states: np.ndarray, prop: ShotPropagator) -> np.ndarray:
    """Apply scheduled ops to columns of `states`."""
    out = np.array(states, dtype=complex)
    for op in ops:
        u = prop.pulse(op[1], op[2]) if op[0] == "p" else prop.idle(op[1])
        out = u @ out
    return out


def noisy_unitary(ops, prop: ShotPropagator) -> np.ndarray:
    return evolve(ops, np.eye(2**prop.n, dtype=complex), prop)


class BatchPropagator:
    """Propagators for a batch of shots at once, cached per scheduled op.

    Without transverse fields the Hamiltonian conserves S_z, so it is
    exponentiated block by block in a basis sorted by the number of down spins.
    """

    def __init__(self, reals: list, timing: Timing = Timing()):
        self.timing = timing
        self.n = reals[0].n_spins
        self.size = len(reals)
        fields = np.array([r.local_fields for r in reals]) * NS
        self.eps = np.array([r.fractional_j_errors for r in reals])
        self.blocked = not np.any(fields[:, :, :2])
        ops = _spin_ops(self.n)
        if self.blocked:
            blocks = _m_blocks(self.n)
            self.perm = np.concatenate(blocks)
            self.slices = []
            start = 0
            for b in blocks:
                self.slices.append(slice(start, start + len(b)))
                start += len(b)
            diag = np.einsum("sd,dii->si", fields[:, :, 2], ops[:, 2])
            self.h_diag = diag[:, self.perm].real
        else:
            self.h_field = np.einsum("sda,daij->sij", fields, ops)
        self._cache: dict = {}

    def _generator(self, pair):
        g = exchange_generator(pair, self.n)
        return g[np.ix_(self.perm, self.perm)] if self.blocked else g

    def _exp(self, scale: np.ndarray, gen, t: float):
        """exp(-i (scale_s * gen + H_B,s) t) for every shot s."""
        if not self.blocked:
            h = self.h_field if gen is None else scale[:, None, None] * gen[None] + self.h_field
            w, v = np.linalg.eigh(h)
            return np.einsum("sij,sj,skj->sik", v, np.exp(-1j * w * t), v.conj())
        out = []
        for sl in self.slices:
            hd = self.h_diag[:, sl]
            if gen is None:
                out.append(np.exp(-1j * hd * t))  # diagonal block
                continue
            h = scale[:, None, None] * gen[sl, sl][None] + np.einsum("si,ij->sij", hd, np.eye(hd.shape[1]))
            w, v = np.linalg.eigh(h)
            out.append(np.einsum("sij,sj,skj->sik", v, np.exp(-1j * w * t), v.conj()))
        return out

    def get(self, op):
        u = self._cache.get(op)
        if u is None:
            if op[0] == "p":
                (i, j), angle = op[1], op[2]
                eps = self.eps[:, i - 1] if j == i + 1 else np.zeros(self.size)
                tp = self.timing.t_pulse
                u = self._exp(angle * (1 + eps) / tp, self._generator((i, j)), tp)
            else:
                u = self._exp(None, None, op[1])
            self._cache[op] = u
        return u

    def evolve(self, ops, states: np.ndarray) -> np.ndarray:
        """Apply ops to columns of `states` (dim x k) for every shot: (shots, dim, k)."""
        states = np.asarray(states, dtype=complex)
        if not self.blocked:
            out = np.broadcast_to(states, (self.size,) + states.shape).copy()
            for op in ops:
                out = np.matmul(self.get(op), out)
            return out
        parts = [np.broadcast_to(states[self.perm[sl]], (self.size,) + states[self.perm[sl]].shape).copy()
                 for sl in self.slices]
        for op in ops:
            us = self.get(op)
            if op[0] == "i":
                parts = [u[:, :, None] * x for u, x in zip(us, parts)]
            else:
                parts = [np.matmul(u, x) for u, x in zip(us, parts)]
        out = np.empty((self.size,) + states.shape, dtype=complex)
        for sl, x in zip(self.slices, parts):
            out[:, self.perm[sl]] = x
        return out


def run_shot(seq, state: SpinState, noise: NoiseModel | None = None,
             timing: Timing | None = None, realization: ShotRealization | None = None) -> SpinState:
    """Evolve one input state through `seq` for a fixed noise realization."""
    timing = timing or (seq.timing if isinstance(seq, PulseSequence) else Timing())
    if realization is None:
        noise = noise or NoiseModel()
        realization = draw_realization(noise, state.n_spins, shot_rng(noise.seed, 0, 0))
    prop = ShotPropagator(realization, timing)
    vec = evolve(schedule(seq, timing), state.amplitudes[:, None], prop)[:, 0]
    return SpinState.from_vector(vec / np.linalg.norm(vec))


# --------------------------------------------------------------------------
# curves and export


@dataclass
class DecayCurve:
    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_shots: int
    extra: dict = field(default_factory=dict)
    fit: DecayFit | None = None

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "mean", "stderr", "n_shots"])
            for x, m, s in zip(self.x, self.mean, self.stderr):
                w.writerow([repr(float(x)), repr(float(m)), repr(float(s)), self.n_shots])

    def to_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "mean": [float(v) for v in self.mean],
            "stderr": [float(v) for v in self.stderr],
            "n_shots": self.n_shots,
            "extra": {k: [float(v) for v in np.atleast_1d(val)] for k, val in self.extra.items()},
            "fit": self.fit.to_dict() if self.fit else None,
        }


def _mean_stderr(samples: np.ndarray):
    """Column mean and standard error of per-shot samples (shots along axis 0)."""
    n = samples.shape[0]
    mean = np.mean(samples, axis=0)
    err = np.std(samples, axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, err


def _fields_batch(noise: NoiseModel, n_spins: int, n_shots: int, stream: int):
    real = list(realizations(noise, n_spins, n_shots, stream))
    fields = np.array([r.local_fields for r in real]) * NS
    eps = np.array([r.fractional_j_errors for r in real])
    return fields, eps


# --------------------------------------------------------------------------
# characterization experiments


def experiment_idle_singlet(pair=(1, 2), max_time: float = 10.0, n_shots: int = 4000,
                            noise: NoiseModel = NoiseModel(), n_points: int = 81) -> DecayCurve:
    """Singlet return probability of an idle pair vs time (max_time in us).

    The prepared pair plus its unpolarized neighbour are simulated as three
    spins, which also resolves the encoded-triplet and leaked weights.
    Curve x values are in us.
    """
    if pair not in ((1, 2), (5, 6)):
        raise ValueError("idle singlet pairs are (1,2) or (5,6)")
    times_us = np.linspace(0.0, max_time, n_points)
    fields, _ = _fields_batch(noise, 3, n_shots, stream=11)
    ops = _spin_ops(3)
    h = np.einsum("sda,daij->sij", fields, ops)
    w, v = np.linalg.eigh(h)
    ens = prepare_single_qubit_ensemble()
    t_ns = times_us * 1e3
    phase = np.exp(-1j * w[:, None, :] * t_ns[None, :, None])  # (s, t, k)
    p_s = np.zeros((n_shots, len(t_ns)))
    p_leak = np.zeros_like(p_s)
    proj = singlet_projector(3, (1, 2))
    basis = build_subspace_basis(3)
    leak = basis.matrix[:, basis.indices(lambda l: l["S"] == 1.5)]
    for state, weight in ens:
        c = np.einsum("ski,k->si", v.conj(), state.amplitudes)  # v^dag psi
        psi = np.einsum("sjk,stk->stj", v, phase * c[:, None, :])
        p_s += weight * np.real(np.einsum("stj,jk,stk->st", psi.conj(), proj, psi))
        p_leak += weight * np.sum(np.abs(np.einsum("jk,stj->stk", leak.conj(), psi)) ** 2, axis=2)
    mean, err = _mean_stderr(p_s)
    lmean, lerr = _mean_stderr(p_leak)
    triplet = 1 - mean - lmean
    return DecayCurve(times_us, mean, err, n_shots,
                      {"p_leaked": lmean, "p_leaked_stderr": lerr, "p_encoded_triplet": triplet})


def fit_idle_envelope(curve: DecayCurve) -> DecayFit:
    fit = fit_decay(curve.x, curve.mean, np.maximum(curve.stderr, 1e-4), "gaussian_envelope")
    curve.fit = fit
    return fit


def fitted_t2star(noise: NoiseModel, n_shots: int = 4000, max_time: float | None = None) -> float:
    """Fitted 1/e Gaussian envelope time (us) of the simulated idle singlet."""
    if noise.hyperfine_sigma <= 0:
        raise CalibrationError("no hyperfine noise: the idle singlet does not decay")
    scale = 1e6 / noise.hyperfine_sigma  # 1/sigma in us
    curve = experiment_idle_singlet((1, 2), max_time or 4 * scale, n_shots, noise)
    fit = fit_idle_envelope(curve)
    if not fit.converged or fit.params["tau"] > 2 * (max_time or 4 * scale):
        raise CalibrationError("idle-singlet envelope fit did not converge")
    return fit.params["tau"]


def calibrate_hyperfine_sigma(target_t2star: float, field_mode: str = "isotropic", seed: int = 0,
                              n_shots: int = 4000, rtol: float = 2e-3, max_iter: int = 60) -> float:
    """Per-component sigma (rad/s) whose simulated idle-singlet T2* equals `target_t2star` (us).

    Bisection in log(sigma) on the Monte Carlo fit; common random numbers make
    the fitted T2* a deterministic, monotone function of sigma.
    """
    if target_t2star <= 0:
        raise ValueError("target T2* must be > 0")
    base = NoiseModel(1.0, field_mode, 0.0, seed)

    def t2(sigma):
        return fitted_t2star(base.replace(hyperfine_sigma=sigma), n_shots,
                             max_time=4 * target_t2star)

    guess = 1e6 / target_t2star
    lo, hi = guess / 4, guess * 4
    if not (t2(lo) > target_t2star > t2(hi)):
        raise CalibrationError("target T2* outside the calibration bracket")
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        val = t2(mid)
        if abs(val / target_t2star - 1) < rtol:
            return mid
        if val > target_t2star:
            lo = mid
        else:
            hi = mid
    raise CalibrationError("hyperfine calibration did not converge")


def nosc_to_fractional_sigma(n_osc: float) -> float:
    """Fractional exchange sigma giving N_osc oscillations within the 1/e envelope."""
    return math.sqrt(2) / (2 * math.pi * n_osc)


def experiment_exchange_oscillations(axis=(2, 3), j_frequency: float = 100.0,
                                     noise: NoiseModel = NoiseModel(),
                                     max_pulse_duration: float | None = None,
                                     n_shots: int = 2000, n_points: int | None = None) -> DecayCurve:
    """Singlet return of pair (1,2) under continuous exchange on (2,3).

    j_frequency in MHz, durations in ns; x values are ns.  The fit attached to
    the curve is a Gaussian-damped cosine; N_osc = f * tau is in curve.extra.
    """
    if tuple(axis) != (2, 3):
        raise ValueError("oscillations are driven on the (2,3) axis of a prepared (1,2) singlet")
    f_ghz = j_frequency * 1e-3
    if max_pulse_duration is None:
        sig = max(noise.exchange_fractional_sigma, 1e-6)
        max_pulse_duration = min(2.0 * math.sqrt(2) / (2 * math.pi * f_ghz * sig), 400 / f_ghz)
    if n_points is None:
        n_points = int(min(4000, max(200, 8 * f_ghz * max_pulse_duration)))
    t = np.linspace(0.0, max_pulse_duration, n_points)
    fields, eps = _fields_batch(noise, 3, n_shots, stream=12)
    gen = exchange_generator((2, 3), 3)
    ops = _spin_ops(3)
    h = (2 * np.pi * f_ghz * (1 + eps[:, 1]))[:, None, None] * gen[None] + np.einsum(
        "sda,daij->sij", fields, ops)
    w, v = np.linalg.eigh(h)
    proj = singlet_projector(3, (1, 2))
    p = np.zeros((n_shots, len(t)))
    phase = np.exp(-1j * w[:, None, :] * t[None, :, None])
    for state, weight in prepare_single_qubit_ensemble():
        c = np.einsum("ski,k->si", v.conj(), state.amplitudes)
        psi = np.einsum("sjk,stk->stj", v, phase * c[:, None, :])
        p += weight * np.real(np.einsum("stj,jk,stk->st", psi.conj(), proj, psi))
    mean, err = _mean_stderr(p)
    curve = DecayCurve(t, mean, err, n_shots)
    fit = fit_decay(t, mean, np.maximum(err, 1e-4), "damped_cosine")
    curve.fit = fit
    curve.extra["n_osc"] = np.array([abs(fit.params["f"]) * fit.params["tau"]])
    return curve


# --------------------------------------------------------------------------
# sequence error


@lru_cache(maxsize=None)
def _gauge_layout(n_spins: int):
    """Coupled basis, per-gauge-sector encoded index lists."""
    basis, sectors = encoded_sectors(n_spins)
    keys = sorted(sectors)
    return basis, [np.array(sectors[k]) for k in keys]


def encoded_channel_fidelity(u: np.ndarray, ideal: np.ndarray, n_spins: int):
    """Average gate fidelity and leakage of the gauge-traced encoded channel.

    `u` is the (noisy) full unitary and `ideal` the noiseless one; the
    encoded input carries a uniformly mixed gauge.
    """
    basis, sectors = _gauge_layout(n_spins)
    uc = basis.matrix.conj().T @ u @ basis.matrix
    ic = basis.matrix.conj().T @ ideal @ basis.matrix
    d = len(sectors[0])
    ng = len(sectors)
    overlap = 0.0
    survive = 0.0
    # Kraus operators K = <g2|U|g> between gauge sectors; gauge transfer is
    # harmless, so each is compared with the ideal encoded block of sector g
    for g in sectors:
        target = ic[np.ix_(g, g)]
        for g2 in sectors:
            k = uc[np.ix_(g2, g)]
            survive += np.sum(np.abs(k) ** 2)
            overlap += abs(np.trace(target.conj().T @ k)) ** 2
    survive /= ng * d
    f_ent = overlap / (ng * d * d)
    f_avg = (d * f_ent + survive) / (d + 1)
    return float(f_avg), float(1 - survive)


@dataclass
class SequenceError:
    avg_infidelity: float
    infidelity_stderr: float
    leakage_rate: float
    leakage_stderr: float
    n_shots: int
    duration_ns: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def estimate_sequence_error(seq, noise: NoiseModel, timing: Timing = Timing(),
                            n_shots: int = 200, stream: int = 21) -> SequenceError:
    """Monte Carlo encoded infidelity and leakage of a sequence (or idle items).

    `seq` may be a PulseSequence or a list mixing sequences and idle durations
    (ns).  Single-qubit (3-spin) and two-qubit (6-spin) registers are supported.
    """
    items = [seq] if isinstance(seq, PulseSequence) else list(seq)
    n_spins = next((s.n_spins for s in items if isinstance(s, PulseSequence)), None)
    if n_spins is None:
        n_spins = 6
    ops = schedule(items, timing)
    ideal = noisy_unitary(ops, ShotPropagator(ShotRealization.zero(n_spins), timing))
    reals = list(realizations(noise, n_spins, n_shots, stream))
    infid = np.empty(n_shots)
    leak = np.empty(n_shots)
    eye = np.eye(2 ** n_spins)
    for start in range(0, n_shots, 64):
        chunk = reals[start:start + 64]
        us = BatchPropagator(chunk, timing).evolve(ops, eye)
        for k, u in enumerate(us):
            f, lk = encoded_channel_fidelity(u, ideal, n_spins)
            infid[start + k] = 1 - f
            leak[start + k] = lk
    (mi, si), (ml, sl) = _mean_stderr(infid), _mean_stderr(leak)
    return SequenceError(float(mi), float(si), float(ml), float(sl), n_shots,
                         schedule_duration(ops, timing))


def idle_items(duration_ns: float, n_spins: int = 6) -> list:
    """Item list describing a bare idle of the given length on a register."""
    return [PulseSequence((), n_spins, "idle"), float(duration_ns)]
