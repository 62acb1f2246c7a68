#!/usr/bin/env python3
"""Run the standard battery: three games x four data sources.

Writes per-run artifacts under the output directory and prints a summary
table of cumulative losses, certificate slack, and worst-case bounds.

Usage: python3 scripts/run_battery.py [--horizon N] [--seed S] [--out DIR]
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from defcast.experiments import ExperimentConfig, run  # noqa: E402

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" \
    / "replay_fixture.csv"

GENERATORS = {
    "iid_logistic": {"kind": "iid_logistic", "weights": [0.0, 2.0]},
    "noisy_threshold": {"kind": "deterministic", "threshold": 0.0,
                        "noise_rate": 0.1},
    "adversarial": {"kind": "adversarial"},
    "replay": {"kind": "replay", "path": str(FIXTURE)},
}

COMPARATORS = [
    {"centers": [], "weights": []},
    {"centers": [-0.5, 0.5], "weights": [0.6, -0.6]},
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=77)
    ap.add_argument("--out", default="battery_out")
    args = ap.parse_args()

    header = f"{'game':<9} {'generator':<16} {'loss':>10} {'cert slack':>11} " \
             f"{'worst regret':>13} {'bound':>9} {'time':>7}"
    print(header)
    print("-" * len(header))
    all_ok = True
    for game in ("square", "absolute", "log"):
        for gen_name, gen_doc in GENERATORS.items():
            doc = {
                "game": game,
                "kernel": {"kind": "sobolev"},
                "generator": gen_doc,
                "horizon": args.horizon,
                "seed": args.seed,
                "comparators": COMPARATORS,
            }
            t0 = time.perf_counter()
            artifacts = run(ExperimentConfig.from_json(doc),
                            Path(args.out) / f"{game}_{gen_name}")
            dt = time.perf_counter() - t0
            rep = artifacts.report
            worst = max(r["realized_regret"] for r in rep["comparators"])
            bound = max(r["bound"] for r in rep["comparators"])
            all_ok = all_ok and artifacts.all_pass
            print(f"{game:<9} {gen_name:<16} "
                  f"{rep['cumulative_loss']:>10.3f} "
                  f"{rep['large_numbers_certificate']['slack']:>11.2e} "
                  f"{worst:>13.3f} {bound:>9.3f} {dt:>6.2f}s")
    print()
    print("all inequalities pass" if all_ok else "INEQUALITY VIOLATED")
    summary = {"all_pass": all_ok, "horizon": args.horizon,
               "seed": args.seed}
    (Path(args.out) / "summary.json").write_text(
        json.dumps(summary, indent=2) + "\n")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
