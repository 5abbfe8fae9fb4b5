#!/usr/bin/env python3
"""Sweep the channel flip rate and watch the decoder's margin shrink.

With flip probability e on each delivered outcome, a check against the true
entry fails with probability 2e(1-e) while a check against a wrong entry
fails about half the time. The violation-rate threshold delta has to sit
between those two numbers; this sweep shows correct-decode rates collapsing
once e crosses the point where 2e(1-e) approaches delta.

Usage:
    python demos/noise_margin.py
    python demos/noise_margin.py --trials 2000 --n 256
"""

import argparse

from entpost import ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=33)
    args = ap.parse_args()

    print(f"n={args.n}, delta={args.delta}, {args.trials} honest sessions per point")
    print()
    print("flip rate   true-check fail 2e(1-e)   decoded   correct   mean conf")
    for eps in (0.0, 0.02, 0.05, 0.08, 0.11, 0.14):
        spec = ExperimentSpec(
            mode="honest",
            n=args.n,
            lam=16,
            noise=eps,
            delta=args.delta,
            seed=args.seed,
            trials=args.trials,
        )
        _, report = run_experiment(spec, workers=args.workers)
        conf = report.mean_confidence
        print(
            f"  {eps:.2f}             {2 * eps * (1 - eps):.4f}            "
            f"{report.decode_success_rate:7.3f}  {report.correct_rate:7.3f}   "
            f"{conf if conf is None else round(conf, 4)}"
        )
    print()
    print(f"delta={args.delta} tolerates the true entry's violations while wrong")
    print("entries rack up about 50% failures; past e where 2e(1-e) nears delta,")
    print("the true entry itself gets eliminated and sessions stop decoding.")


if __name__ == "__main__":
    main()
