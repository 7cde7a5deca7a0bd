"""Interleaved RB of SWAP, FW-CNOT and LCCZ against one shared reference decay."""

import argparse
import json
from pathlib import Path

from eoqubits.benchmark import RBConfig, run_irb, run_rb
from eoqubits.sequence import Timing
from eoqubits.simulate import NoiseModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", type=float, default=1.977e5)
    ap.add_argument("--field-mode", default="isotropic")
    ap.add_argument("--lengths", default="1,8,16,32,64,96")
    ap.add_argument("--sequences", type=int, default=16)
    ap.add_argument("--shots", type=int, default=24)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--out", default="runs/irb")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    noise = NoiseModel(args.sigma, args.field_mode, 0.0, args.seed)
    base = RBConfig([int(v) for v in args.lengths.split(",")], args.sequences, args.shots,
                    seed=args.seed, shared_noise=True)
    timing = Timing(10.0, 5.0)
    ref = run_rb(base, noise, timing)
    (out / "reference.json").write_text(ref.to_json())
    print(f"reference Clifford fidelity {ref.avg_clifford_fidelity:.5f}")
    for gate in ("swap", "fw-cnot", "lccz"):
        res = run_irb(RBConfig(**{**base.to_dict(), "interleaved_gate": gate}), noise, timing, ref)
        (out / f"irb_{gate}.json").write_text(res.to_json())
        print(gate, json.dumps({"error": 1 - res.interleaved_gate_fidelity,
                                "ci": res.interleaved_ci, "flags": res.flags}))


if __name__ == "__main__":
    main()
