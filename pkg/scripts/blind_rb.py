"""Single-qubit blind RB under calibrated magnetic and charge noise."""

import argparse
import json

from eoqubits.benchmark import RBConfig, run_blind_rb_1q
from eoqubits.sequence import Timing
from eoqubits.simulate import NoiseModel, nosc_to_fractional_sigma


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", type=float, default=1.977e5)
    ap.add_argument("--nosc", type=float, default=50)
    ap.add_argument("--lengths", default="1,400,1600,3200,6400,12800")
    ap.add_argument("--sequences", type=int, default=16)
    ap.add_argument("--shots", type=int, default=32)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    noise = NoiseModel(args.sigma, "isotropic", nosc_to_fractional_sigma(args.nosc), args.seed)
    cfg = RBConfig([int(v) for v in args.lengths.split(",")], args.sequences, args.shots,
                   n_qubits=1, seed=args.seed, shared_noise=True)
    res = run_blind_rb_1q(cfg, noise, Timing(10.0, 5.0))
    print(json.dumps({k: res.to_dict()[k] for k in ("computational_error", "computational_stderr",
                                                    "leakage_error", "leakage_stderr")}, indent=2))


if __name__ == "__main__":
    main()
