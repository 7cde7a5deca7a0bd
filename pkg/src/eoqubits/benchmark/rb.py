"""Randomized benchmarking on the encoded qubits.

Random Clifford words are closed by the exact inverse from the group, compiled
to exchange pulses and simulated shot by shot over the prepared gauge
ensemble.  Return probabilities are PSB singlet probabilities.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..compiler.clifford import single_qubit_cliffords, two_qubit_cliffords
from ..compiler.gates import build_fw_cnot, build_fwcz_linear, build_lccz, build_swap
from ..compiler.verify import CNOT, CZ, SWAP
from ..encoding import prepare_single_qubit_ensemble, prepare_two_qubit_ensemble
from ..fitting import DecayFit, fit_decay
from ..sequence import Timing
from ..encoding import singlet_projector
from ..simulate import BatchPropagator, NoiseModel, realizations, schedule, shot_rng

_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass
class RBConfig:
    lengths: list
    n_sequences_per_length: int = 10
    n_shots_per_sequence: int = 10
    interleaved_gate: str | None = None
    prerotation: str = "none"
    readout: str = "M1"
    seed: int = 0
    n_qubits: int = 2
    # one pool of noise realizations (and propagator cache) for every sequence;
    # cheaper, and gives common random numbers between reference and interleaved runs
    shared_noise: bool = False

    def __post_init__(self):
        self.lengths = [int(m) for m in self.lengths]
        if not self.lengths or any(m < 1 for m in self.lengths):
            raise ValueError("lengths must be >= 1")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")
        if self.prerotation not in ("none", "X"):
            raise ValueError("prerotation must be 'none' or 'X'")
        if self.readout not in ("M1", "M2", "both"):
            raise ValueError("readout must be M1, M2 or both")
        if self.n_qubits not in (1, 2):
            raise ValueError("n_qubits must be 1 or 2")
        if self.n_qubits == 1 and self.readout != "M1":
            raise ValueError("single-qubit RB reads out on M1")
        if self.n_sequences_per_length < 1 or self.n_shots_per_sequence < 1:
            raise ValueError("need at least one sequence and one shot per length")

    @property
    def sides(self) -> tuple:
        return ("M1", "M2") if self.readout == "both" else (self.readout,)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RBResult:
    config: dict
    lengths: list
    mean: dict  # side -> per-length mean return probability
    stderr: dict
    fits: dict  # side -> DecayFit
    avg_clifford_fidelity: float
    asymptote: float
    fidelity_ci: tuple = (math.nan, math.nan)
    interleaved_gate_fidelity: float | None = None
    interleaved_ci: tuple | None = None
    flags: list = field(default_factory=list)

    @property
    def fit(self) -> DecayFit:
        return self.fits[next(iter(self.fits))]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "points": [{"length": m, **{f"mean_{s}": self.mean[s][i] for s in self.mean},
                        **{f"stderr_{s}": self.stderr[s][i] for s in self.stderr}}
                       for i, m in enumerate(self.lengths)],
            "fit": {s: f.to_dict() for s, f in self.fits.items()},
            "fidelity": self.avg_clifford_fidelity,
            "ci": list(self.fidelity_ci),
            "asymptote": self.asymptote,
            "interleaved_gate_fidelity": self.interleaved_gate_fidelity,
            "interleaved_ci": list(self.interleaved_ci) if self.interleaved_ci else None,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# interleaved gates


def interleaved_gate(name: str | None):
    """(items to run, encoded unitary) for an interleaved gate name.

    Names: 'swap', 'fw-cnot', 'fwcz', 'lccz', 'identity', or 'idle:<ns>'.
    """
    if name is None:
        return [], np.eye(4, dtype=complex)
    if name == "identity":
        return [], np.eye(4, dtype=complex)
    if name.startswith("idle:"):
        return [float(name.split(":", 1)[1])], np.eye(4, dtype=complex)
    table = {"swap": (build_swap, SWAP), "fw-cnot": (build_fw_cnot, CNOT),
             "fwcz": (build_fwcz_linear, CZ), "lccz": (build_lccz, CZ)}
    if name not in table:
        raise ValueError(f"unknown interleaved gate {name!r}")
    builder, target = table[name]
    return [builder()], target


def _idle_1q(name: str | None):
    if name is None or name == "identity":
        return [], np.eye(2, dtype=complex)
    if name.startswith("idle:"):
        return [float(name.split(":", 1)[1])], np.eye(2, dtype=complex)
    raise ValueError(f"single-qubit RB supports only idle/identity interleaving, not {name!r}")


def rb_word(config: RBConfig, length_index: int, seq_index: int, final_x: bool | None = None):
    """Random Clifford word plus its inverse (and optional X pre-rotation).

    The random indices depend only on (seed, length, sequence) so reference and
    interleaved runs share words.  Returns (clifford indices, interleave flags)
    as a list of ('c', k) / ('g',) items.
    """
    m = config.lengths[length_index]
    rng = shot_rng(config.seed, 1, length_index, seq_index)
    if config.n_qubits == 2:
        group = two_qubit_cliffords()
        _, gate_u = interleaved_gate(config.interleaved_gate)
        size = len(group)
    else:
        group = single_qubit_cliffords()
        _, gate_u = _idle_1q(config.interleaved_gate)
        size = len(group)
    word = [int(k) for k in rng.integers(0, size, m)]
    items = []
    u = np.eye(gate_u.shape[0], dtype=complex)
    for k in word:
        items.append(("c", k))
        u = group.unitaries[k] @ u
        if config.interleaved_gate is not None:
            items.append(("g",))
            u = gate_u @ u
    x = config.prerotation == "X" if final_x is None else final_x
    goal = np.eye(u.shape[0], dtype=complex)
    if x:
        goal = _X if config.n_qubits == 1 else np.kron(_X, _X)
    items.append(("c", group.lookup(goal @ u.conj().T)))
    return items


def _compile_items(config: RBConfig, items):
    if config.n_qubits == 2:
        group = two_qubit_cliffords()
        gate_items, _ = interleaved_gate(config.interleaved_gate)
        seq_of = group.sequence
    else:
        group = single_qubit_cliffords()
        gate_items, _ = _idle_1q(config.interleaved_gate)
        seq_of = group.sequences_a3.__getitem__
    out = []
    for it in items:
        if it[0] == "c":
            out.append(seq_of(it[1]))
        else:
            out.extend(gate_items)
    return out


def _ensemble(n_qubits: int):
    ens = prepare_two_qubit_ensemble() if n_qubits == 2 else prepare_single_qubit_ensemble()
    states = np.stack([s.amplitudes for s, _ in ens], axis=1)
    weights = np.array([p for _, p in ens])
    return states, weights


def _singlet_probabilities(out: np.ndarray, weights, side: str, n_spins: int) -> np.ndarray:
    """Ensemble-weighted PSB singlet probability per shot for states (shots, dim, k)."""
    pair = (1, 2) if side == "M1" else (n_spins - 1, n_spins)
    proj = singlet_projector(n_spins, pair)
    pv = np.einsum("ij,sjk->sik", proj, out)
    return np.einsum("sik,sik,k->s", out.conj(), pv, weights).real


def simulate_return(config: RBConfig, noise: NoiseModel, timing: Timing,
                    final_x: bool | None = None, stream: int = 0):
    """Per-length (mean, stderr) of the singlet return probability on each side.

    Every (length, sequence) pair gets its own noise stream, unless
    `config.shared_noise` reuses one pool for all of them.
    """
    n_spins = 6 if config.n_qubits == 2 else 3
    states, weights = _ensemble(config.n_qubits)
    sides = config.sides
    means = {s: [] for s in sides}
    errs = {s: [] for s in sides}
    shared = None
    if config.shared_noise:
        shared = BatchPropagator(list(realizations(noise, n_spins, config.n_shots_per_sequence,
                                                   stream=(3, stream))), timing)
    for li, _ in enumerate(config.lengths):
        per_seq = {s: [] for s in sides}
        for si in range(config.n_sequences_per_length):
            items = _compile_items(config, rb_word(config, li, si, final_x))
            ops = schedule(items, timing)
            prop = shared
            if prop is None:
                prop = BatchPropagator(list(realizations(noise, n_spins, config.n_shots_per_sequence,
                                                         stream=(2, stream, li, si))), timing)
            out = prop.evolve(ops, states)
            vals = {s: _singlet_probabilities(out, weights, s, n_spins) for s in sides}
            for s in sides:
                per_seq[s].append(np.mean(vals[s]))
        for s in sides:
            arr = np.array(per_seq[s])
            means[s].append(float(arr.mean()))
            errs[s].append(float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0)
    return means, errs


def _depolarizing_fidelity(alpha: float, d: int) -> float:
    return 1 - (1 - alpha) * (d - 1) / d


def _fit_side(lengths, mean, err):
    x = np.array(lengths, dtype=float)
    y = np.array(mean)
    if np.ptp(y) < 1e-9 and abs(y[0] - 1) < 1e-9:
        # noiseless: the decay is flat at one
        fit = DecayFit("exponential", {"A": 0.0, "alpha": 1.0, "B": float(y[0])},
                       {"A": 0.0, "alpha": 0.0, "B": 0.0}, 0.0, True, True)
        return fit
    if len(x) < 4:
        return DecayFit("exponential", {"A": math.nan, "alpha": math.nan, "B": float(np.mean(y))},
                        {}, math.inf, False, True)
    return fit_decay(x, y, np.maximum(err, 1e-6), "exponential")


def _asymptote(fit: DecayFit, lengths, mean) -> float:
    if fit.converged and 0 < fit.params["alpha"] < 0.999 and not math.isnan(fit.params["B"]):
        return float(fit.params["B"])
    half = max(1, len(mean) // 2)
    return float(np.mean(mean[-half:]))


def _result(config: RBConfig, means, errs, d: int) -> RBResult:
    fits = {s: _fit_side(config.lengths, means[s], errs[s]) for s in means}
    main = fits[next(iter(fits))]
    alpha = main.params["alpha"]
    flags = []
    if not main.converged:
        flags.append("fit_not_converged")
    if main.degenerate:
        flags.append("degenerate")
    if math.isnan(alpha):
        fid, ci = math.nan, (math.nan, math.nan)
    else:
        fid = _depolarizing_fidelity(min(alpha, 1.0), d)
        s = main.stderr.get("alpha", math.nan)
        ci = (_depolarizing_fidelity(alpha - s, d), min(1.0, _depolarizing_fidelity(alpha + s, d)))
    if main.degenerate and all(abs(v - 1) < 1e-9 for v in means[next(iter(means))]):
        fid, ci = 1.0, (1.0, 1.0)
    first = next(iter(means))
    return RBResult(config.to_dict(), list(config.lengths), means, errs, fits, fid,
                    _asymptote(main, config.lengths, means[first]), ci, flags=flags)


def run_rb(config: RBConfig, noise: NoiseModel = NoiseModel(), timing: Timing = Timing()) -> RBResult:
    means, errs = simulate_return(config, noise, timing)
    return _result(config, means, errs, 4 if config.n_qubits == 2 else 2)


def run_irb(config: RBConfig, noise: NoiseModel = NoiseModel(), timing: Timing = Timing(),
            reference: RBResult | None = None) -> RBResult:
    """Interleaved RB; the reference uses the same words without the gate."""
    if config.interleaved_gate is None:
        raise ValueError("run_irb needs config.interleaved_gate")
    d = 4 if config.n_qubits == 2 else 2
    if reference is None:
        ref_cfg = RBConfig(**{**config.to_dict(), "interleaved_gate": None})
        reference = run_rb(ref_cfg, noise, timing)
    result = run_rb(config, noise, timing)
    a_ref = reference.fit.params["alpha"]
    a_int = result.fit.params["alpha"]
    if reference.avg_clifford_fidelity == 1.0 and result.avg_clifford_fidelity == 1.0:
        result.interleaved_gate_fidelity, result.interleaved_ci = 1.0, (1.0, 1.0)
        return result
    ratio = a_int / a_ref
    s_ref = reference.fit.stderr.get("alpha", math.nan)
    s_int = result.fit.stderr.get("alpha", math.nan)
    s_ratio = ratio * math.hypot(s_ref / a_ref, s_int / a_int)
    result.interleaved_gate_fidelity = 1 - (1 - ratio) * (d - 1) / d
    result.interleaved_ci = (1 - (1 - ratio + s_ratio) * (d - 1) / d,
                             1 - (1 - ratio - s_ratio) * (d - 1) / d)
    if a_int > a_ref + 2 * math.hypot(s_ref, s_int):
        result.flags.append("noise_floor")
    result.config["reference_alpha"] = a_ref
    return result


@dataclass
class BlindRBResult:
    computational_error: float
    leakage_error: float
    computational_stderr: float
    leakage_stderr: float
    lengths: list
    p_identity: list
    p_x: list
    stderr_identity: list
    stderr_x: list
    sum_fit: DecayFit
    diff_fit: DecayFit
    branch_alphas: dict

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if not isinstance(v, DecayFit)}
        d["sum_fit"] = self.sum_fit.to_dict()
        d["diff_fit"] = self.diff_fit.to_dict()
        return d


def run_blind_rb_1q(config: RBConfig, noise: NoiseModel = NoiseModel(),
                    timing: Timing = Timing()) -> BlindRBResult:
    """Single-qubit blind RB: identity- and X-compiling families on the same words.

    The sum P_I + P_X loses only leaked population (leaked states never read
    singlet), so its decay gives the leakage rate; the difference carries the
    computational decay.
    """
    cfg = RBConfig(**{**config.to_dict(), "n_qubits": 1, "readout": "M1", "prerotation": "none"})
    mi, ei = simulate_return(cfg, noise, timing, final_x=False)
    mx, ex = simulate_return(cfg, noise, timing, final_x=True)
    pi, px = np.array(mi["M1"]), np.array(mx["M1"])
    si, sx = np.array(ei["M1"]), np.array(ex["M1"])
    x = np.array(cfg.lengths, dtype=float)
    s_err = np.maximum(np.hypot(si, sx), 1e-7)
    ssum = pi + px
    sdiff = pi - px
    if np.ptp(ssum) < 1e-10 and abs(ssum[0] - 1) < 1e-10:
        sum_fit = DecayFit("exponential", {"A": 0.0, "alpha": 1.0, "B": 1.0},
                           {"A": 0.0, "alpha": 0.0, "B": 0.0}, 0.0, True, True)
    else:
        sum_fit = fit_decay(x, ssum, s_err, "exponential")
    # the difference decays to zero, so its offset is pinned
    if np.ptp(sdiff) < 1e-10 and abs(sdiff[0] - 1) < 1e-10:
        diff_fit = DecayFit("exponential", {"A": 1.0, "alpha": 1.0, "B": 0.0},
                            {"A": 0.0, "alpha": 0.0, "B": 0.0}, 0.0, True, True)
    else:
        diff_fit = fit_decay(x, sdiff, s_err, "exponential", fixed={"B": 0.0})
    lam_l, b_l = sum_fit.params["alpha"], sum_fit.params["B"]
    leak = (1 - lam_l) * (1 - b_l) if sum_fit.converged else math.nan
    leak_err = math.hypot(sum_fit.stderr.get("alpha", 0) * (1 - b_l),
                          sum_fit.stderr.get("B", 0) * (1 - lam_l))
    lam_c = diff_fit.params["alpha"]
    comp = (1 - lam_c) / 2
    comp_err = diff_fit.stderr.get("alpha", 0) / 2
    branch = {}
    for name, y, e in (("identity", pi, si), ("x", px, sx)):
        if np.ptp(y) > 1e-10 and len(x) >= 4:
            f = fit_decay(x, y, np.maximum(e, 1e-7), "exponential")
            branch[name] = (f.params["alpha"], f.stderr.get("alpha", math.nan))
        else:
            branch[name] = (1.0, 0.0)
    return BlindRBResult(float(comp), float(leak), float(comp_err), float(leak_err),
                         list(cfg.lengths), pi.tolist(), px.tolist(), si.tolist(), sx.tolist(),
                         sum_fit, diff_fit, branch)
