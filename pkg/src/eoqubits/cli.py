"""Command-line entry point: verification, experiments, benchmarking and export.

Every command writes result JSON (no timestamps) plus CSV artifacts and a
``run_config.json`` into ``--out``; passing that file back with ``--config``
replays the run.  Exit codes: 0 success, 1 a contracted check failed,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from pathlib import Path

THREADS_ENV = "EOQUBITS_THREADS"
GATES = ("fw-cnot", "fwcz", "lccz", "swap")

_UNITS = {
    "time": {"ns": 1.0, "us": 1e3, "µs": 1e3, "ms": 1e6, "s": 1e9},  # -> ns
    "freq": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},  # -> Hz
    "field": {"mt": 1.0, "ut": 1e-3, "t": 1e3},  # -> mT
}
GYROMAGNETIC = 1.76085963e11  # electron, rad s^-1 T^-1


class UsageError(ValueError):
    pass


def parse_quantity(text, kind: str, default_unit: str | None = None) -> float:
    """'3.5us' -> 3500.0 (ns); 'time' -> ns, 'freq' -> Hz, 'field' -> mT."""
    if isinstance(text, (int, float)):
        if default_unit is None:
            return float(text)
        text = f"{text}{default_unit}"
    m = re.fullmatch(r"\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Zµ]*)\s*", str(text))
    if not m:
        raise UsageError(f"cannot parse {kind} value {text!r}")
    value, unit = float(m.group(1)), m.group(2).lower() or (default_unit or "").lower()
    table = {"": 1.0, **_UNITS[kind]}  # bare numbers are already canonical
    if unit not in table:
        raise UsageError(f"unknown {kind} unit {m.group(2)!r} in {text!r}")
    return value * table[unit]


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


# --------------------------------------------------------------------------
# shared option groups


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys override flags")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help=f"BLAS thread cap (default ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, default=0)


def _add_timing(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-pulse", default="10ns")
    p.add_argument("--t-idle", default="5ns")


def _add_noise(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t2star", default=None, help="calibrate hyperfine noise to this T2* (e.g. 3.5us)")
    p.add_argument("--sigma", default=None,
                   help="hyperfine sigma per component: rad/s, or a field with mT/uT suffix")
    p.add_argument("--field-mode", default="isotropic", choices=("isotropic", "longitudinal_only"))
    p.add_argument("--nosc", type=float, default=None, help="charge-noise N_osc (sets fractional J sigma)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eoqubits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify a compiled gate")
    p.add_argument("gate", choices=GATES)
    _add_common(p)

    p = sub.add_parser("search-primitive", help="exhaustive quasi-Fredkin search")
    p.add_argument("--max-length", type=int, default=6)
    p.add_argument("--angle", type=float, default=math.pi / 2)
    _add_common(p)

    for name in ("rb", "irb"):
        p = sub.add_parser(name, help="randomized benchmarking" if name == "rb" else "interleaved RB")
        p.add_argument("--lengths", default="1,2,4,8,16,32")
        p.add_argument("--sequences", type=int, default=10)
        p.add_argument("--shots", type=int, default=10)
        p.add_argument("--qubits", type=int, default=2, choices=(1, 2))
        p.add_argument("--readout", default="M1", choices=("M1", "M2", "both"))
        p.add_argument("--prerotation", default="none", choices=("none", "X"))
        p.add_argument("--shared-noise", action="store_true")
        if name == "irb":
            p.add_argument("--gate", required=False, default="swap",
                           help="swap, fw-cnot, fwcz, lccz, identity or idle:<ns>")
        _add_noise(p)
        _add_timing(p)
        _add_common(p)

    p = sub.add_parser("t2star", help="idle-singlet decay and T2* fit")
    p.add_argument("--target", default="3.5us")
    p.add_argument("--field-mode", default="isotropic", choices=("isotropic", "longitudinal_only"))
    p.add_argument("--shots", type=int, default=4000)
    p.add_argument("--pair", default="1,2")
    _add_common(p)

    p = sub.add_parser("nosc", help="exchange oscillations and N_osc fit")
    p.add_argument("--j", default="100MHz")
    p.add_argument("--nosc", type=float, default=50.0)
    p.add_argument("--shots", type=int, default=2000)
    _add_common(p)

    p = sub.add_parser("qpt", help="encoded two-qubit process matrix")
    p.add_argument("--gate", default="fw-cnot", choices=GATES)
    p.add_argument("--mode", default="analytic", choices=("analytic", "sampled"))
    p.add_argument("--spam", default="default", choices=("none", "default"),
                   help="readout model for sampled mode")
    p.add_argument("--shots", type=int, default=0, help="binomial shots per setting (0: exact)")
    _add_common(p)

    p = sub.add_parser("export-waveform", help="voltage schedule for a gate or sequence file")
    p.add_argument("--gate", default="fw-cnot", choices=GATES)
    p.add_argument("--sequence", default=None, help="PulseSequence JSON file (overrides --gate)")
    p.add_argument("--calibration", default=None, help="calibration JSON (per-axis j0, v0, j_max)")
    p.add_argument("--sample-period", default="0.5ns")
    _add_timing(p)
    _add_common(p)
    return parser


def _apply_config(parser, args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    if data.get("command", args.command) != args.command:
        raise UsageError(f"config 'command' is {data['command']!r}, not {args.command!r}")
    for key, value in data.items():
        if key in ("command", "config"):
            continue
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, dest, value)
    return args


# --------------------------------------------------------------------------
# helpers


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    import numpy as np
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _run_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out", "threads")}


def _timing(args):
    from .sequence import Timing
    try:
        return Timing(parse_quantity(args.t_pulse, "time", "ns"), parse_quantity(args.t_idle, "time", "ns"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _noise(args):
    from .simulate import NoiseModel, calibrate_hyperfine_sigma, nosc_to_fractional_sigma
    sigma = 0.0
    if args.sigma is not None and args.t2star is not None:
        raise UsageError("give either --sigma or --t2star, not both")
    if args.sigma is not None:
        text = str(args.sigma)
        if re.search(r"[a-zA-Zµ]", text.replace("e", "").replace("E", "")):
            sigma = parse_quantity(text, "field") * 1e-3 * GYROMAGNETIC
        else:
            sigma = float(text)
    elif args.t2star is not None:
        t2 = parse_quantity(args.t2star, "time", "us") / 1e3
        sigma = calibrate_hyperfine_sigma(t2, args.field_mode, seed=args.seed)
    eps = nosc_to_fractional_sigma(args.nosc) if args.nosc else 0.0
    try:
        return NoiseModel(sigma, args.field_mode, eps, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _gate(name: str):
    from .compiler import gates
    return {"fw-cnot": gates.build_fw_cnot, "fwcz": gates.build_fwcz_linear,
            "lccz": gates.build_lccz, "swap": gates.build_swap}[name]()


# --------------------------------------------------------------------------
# commands; each returns (result dict, passed)


def cmd_verify(args, out: Path):
    import numpy as np
    from .compiler.verify import (CNOT, CZ, SWAP, EncodedGateSpec, leaked_a_action,
                                  leaked_rotation_tilt, verify_encoded)
    seq = _gate(args.gate)
    targets = {"fw-cnot": (CNOT, "unspecified"), "fwcz": (CZ, "unspecified"),
               "lccz": (CZ, "contain_b"), "swap": (SWAP, "unspecified")}
    target, contract = targets[args.gate]
    report = verify_encoded(seq, EncodedGateSpec(target, contract, args.gate))
    passed = report.passed()
    result = {"gate": args.gate, "report": report.to_dict(), "pulses": len(seq)}
    u = seq.unitary()
    leak = leaked_a_action(u)
    result["leaked_a_action"] = leak
    if args.gate == "swap":
        perm = seq.spin_permutation()
        reversal = tuple(range(seq.n_spins, 0, -1))
        twice = np.allclose((seq + seq).unitary(), np.eye(u.shape[0]), atol=1e-10)
        result["spin_permutation"] = list(perm) if perm else None
        result["is_reversal"] = perm == reversal
        result["swap_squared_identity"] = bool(twice)
        passed = passed and perm == reversal and twice
    if args.gate == "fwcz":
        result["leaked_tilt_rad"] = leaked_rotation_tilt(u)
        result["expected_tilt_rad"] = math.atan(3 * math.sqrt(15) / 11)
    (out / "sequence.json").write_text(seq.to_json())
    return result, passed


def cmd_search_primitive(args, out: Path):
    from .compiler.search import SearchExhaustedError, leaked_phase_flip, search_quasi_fredkin
    try:
        sols = search_quasi_fredkin(max_length=args.max_length, angle=args.angle)
    except SearchExhaustedError as exc:
        return {"solutions": [], "error": str(exc)}, False
    result = {"n_solutions": len(sols), "length": len(sols[0]),
              "solutions": [[list(p.pair) for p in s.pulses] for s in sols],
              "leaked_phase_flip": [leaked_phase_flip(s) for s in sols],
              "angle": args.angle}
    (out / "canonical.json").write_text(sols[0].to_json())
    return result, True


def _rb_config(args, gate=None):
    from .benchmark.rb import RBConfig
    try:
        return RBConfig(_int_list(args.lengths), args.sequences, args.shots, gate, args.prerotation,
                        args.readout, args.seed, args.qubits, bool(args.shared_noise))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _rb_csv(result, path: Path) -> None:
    sides = list(result.mean)
    with open(path, "w") as fh:
        fh.write(",".join(["length"] + [f"mean_{s},stderr_{s}" for s in sides]) + "\n")
        for i, m in enumerate(result.lengths):
            row = [str(m)] + [f"{result.mean[s][i]!r},{result.stderr[s][i]!r}" for s in sides]
            fh.write(",".join(row) + "\n")


def cmd_rb(args, out: Path):
    from .benchmark.rb import run_rb
    noise, timing = _noise(args), _timing(args)
    res = run_rb(_rb_config(args), noise, timing)
    _rb_csv(res, out / "decay.csv")
    d = res.to_dict()
    d["noise"] = noise.to_dict()
    return d, True


def cmd_irb(args, out: Path):
    from .benchmark.rb import run_irb, run_rb
    noise, timing = _noise(args), _timing(args)
    ref = run_rb(_rb_config(args), noise, timing)
    try:
        res = run_irb(_rb_config(args, args.gate), noise, timing, reference=ref)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _rb_csv(ref, out / "reference.csv")
    _rb_csv(res, out / "interleaved.csv")
    d = {"reference": ref.to_dict(), "interleaved": res.to_dict(), "noise": noise.to_dict(),
         "gate": args.gate, "gate_error": 1 - res.interleaved_gate_fidelity}
    return d, True


def cmd_t2star(args, out: Path):
    from .simulate import (NoiseModel, calibrate_hyperfine_sigma, experiment_idle_singlet,
                           fit_idle_envelope)
    target = parse_quantity(args.target, "time", "us") / 1e3
    sigma = calibrate_hyperfine_sigma(target, args.field_mode, seed=args.seed, n_shots=args.shots)
    noise = NoiseModel(sigma, args.field_mode, 0.0, args.seed)
    pair = tuple(_int_list(args.pair))
    try:
        curve = experiment_idle_singlet(pair, 4 * target, args.shots, noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fit = fit_idle_envelope(curve)
    curve.to_csv(out / "idle_singlet.csv")
    tau = fit.params["tau"]
    tail = curve.x > 2.5 * target
    result = {"target_us": target, "hyperfine_sigma": sigma, "fitted_t2star_us": tau,
              "asymptote": fit.params["B"], "leaked_fraction_tail": float(curve.extra["p_leaked"][tail].mean()),
              "fit": fit.to_dict(), "noise": noise.to_dict()}
    return result, bool(fit.converged and abs(tau / target - 1) < 0.02)


def cmd_nosc(args, out: Path):
    from .simulate import NoiseModel, experiment_exchange_oscillations, nosc_to_fractional_sigma
    if args.nosc <= 0:
        raise UsageError("nosc must be positive")
    f_mhz = parse_quantity(args.j, "freq", "MHz") / 1e6
    noise = NoiseModel(0.0, "isotropic", nosc_to_fractional_sigma(args.nosc), args.seed)
    curve = experiment_exchange_oscillations((2, 3), f_mhz, noise, n_shots=args.shots)
    curve.to_csv(out / "oscillations.csv")
    n_osc = float(curve.extra["n_osc"][0])
    result = {"j_mhz": f_mhz, "configured_nosc": args.nosc, "fitted_nosc": n_osc,
              "fit": curve.fit.to_dict(), "noise": noise.to_dict()}
    return result, bool(curve.fit.converged and abs(n_osc / args.nosc - 1) < 0.1)


def cmd_qpt(args, out: Path):
    import numpy as np
    from .benchmark.tomography import extract_process_matrix, ideal_ptm
    from .compiler.verify import CNOT, CZ, SWAP
    from .encoding import DEFAULT_SPAM
    seq = _gate(args.gate)
    spam = None if args.spam == "none" else DEFAULT_SPAM
    pm = extract_process_matrix(seq, args.mode, spam=spam if args.mode == "sampled" else None,
                                n_shots=args.shots or None, seed=args.seed)
    target = {"fw-cnot": CNOT, "fwcz": CZ, "lccz": CZ, "swap": SWAP}[args.gate]
    ideal = ideal_ptm(target)
    pm.to_csv(out / "ptm.csv")
    err = float(np.max(np.abs(pm.ptm - ideal)))
    result = {"gate": args.gate, "process_matrix": pm.to_dict(), "max_abs_deviation": err,
              "diagonal": [float(v) for v in np.diag(pm.ptm)]}
    return result, (err < 1e-9) if args.mode == "analytic" else True


def cmd_export_waveform(args, out: Path):
    from .sequence import PulseSequence
    from .waveform import PulseCalibration, SaturationError, emit_schedule, schedule_to_angles
    seq = PulseSequence.from_json(args.sequence) if args.sequence else _gate(args.gate)
    cal = None
    if args.calibration:
        cal = PulseCalibration.from_dict(json.loads(Path(args.calibration).read_text()))
    timing = _timing(args)
    try:
        sched = emit_schedule(seq, cal, timing)
    except SaturationError as exc:
        return {"error": str(exc), "pulse_index": exc.pulse_index}, False
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    sched.to_json(out / "waveform.json")
    sched.to_csv(out / "waveform.csv", parse_quantity(args.sample_period, "time", "ns"))
    back = schedule_to_angles(sched)
    worst = max((abs(a - p.angle) for (_, a), p in zip(back, seq.pulses)), default=0.0)
    result = {"n_pulses": len(seq), "n_x_segments": len(sched.segments("X")),
              "duration_ns": sched.duration, "roundtrip_max_error_rad": worst}
    return result, worst < 1e-9


COMMANDS = {"verify": cmd_verify, "search-primitive": cmd_search_primitive, "rb": cmd_rb,
            "irb": cmd_irb, "t2star": cmd_t2star, "nosc": cmd_nosc, "qpt": cmd_qpt,
            "export-waveform": cmd_export_waveform}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _apply_config(parser, args)
        threads = args.threads if args.threads is not None else int(os.environ.get(THREADS_ENV, "1"))
        if threads < 1:
            raise UsageError("threads must be >= 1")
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(threads))
        out = Path(args.out or time.strftime(f"runs/{args.command}-%Y%m%d-%H%M%S-seed{args.seed}"))
        out.mkdir(parents=True, exist_ok=True)
        result, passed = COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"eoqubits {args.command}: error: {exc}", file=sys.stderr)
        return 2
    _write_json(out / "run_config.json", {"command": args.command, **_run_config(args)})
    result = {"command": args.command, "passed": bool(passed), **result}
    _write_json(out / "result.json", result)
    summary = {k: v for k, v in result.items() if not isinstance(v, (dict, list))}
    for k, v in summary.items():
        print(f"{k}: {v}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
