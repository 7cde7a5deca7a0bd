"""Direct Monte Carlo error and leakage of the compiled gates against equal-length idles."""

import argparse
import json

from eoqubits.compiler.gates import build_fw_cnot, build_fwcz_linear, build_lccz, build_swap
from eoqubits.sequence import Timing
from eoqubits.simulate import NoiseModel, estimate_sequence_error, idle_items


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", type=float, default=1.977e5, help="hyperfine sigma, rad/s")
    ap.add_argument("--field-mode", default="isotropic")
    ap.add_argument("--shots", type=int, default=200)
    args = ap.parse_args()
    noise = NoiseModel(args.sigma, args.field_mode)
    timing = Timing(10.0, 5.0)

    rows = []
    for seq in (build_swap(), build_fwcz_linear(), build_fw_cnot(), build_lccz()):
        gate = estimate_sequence_error(seq, noise, timing, args.shots)
        idle = estimate_sequence_error(idle_items(gate.duration_ns), noise, timing, args.shots)
        rows.append({"gate": seq.name, "pulses": len(seq), "duration_ns": gate.duration_ns,
                     "infidelity": gate.avg_infidelity, "leakage": gate.leakage_rate,
                     "idle_infidelity": idle.avg_infidelity})
        print(json.dumps(rows[-1]))


if __name__ == "__main__":
    main()
