#!/usr/bin/env python3
"""Products whose small-cycle statistics escape the independent-Poisson
picture even though each factor looks nearly uniform at first order.

Two constructions, both conjugation invariant:
  fixed-heavy    both factors fix about sqrt(n) points; the product keeps
                 E[#1] near 2 instead of 1.
  matching-heavy both factors are mostly 2-cycles; the product's fixed
                 points arrive in pairs, pushing E[#1^2] near 3.
"""

import argparse
import sys

from permprod.cli import main as cli_main


def run_job(tag: str, samplers: str, n: int, samples: int, seed: int, prefix: str) -> int:
    output = f"{prefix}{tag}.csv"
    print(f"== {tag}: n={n}, {samples} samples -> {output}")
    return cli_main(
        [
            "counterexample",
            "--seed", str(seed),
            "--samplers", samplers,
            "--n", str(n),
            "--samples", str(samples),
            "--output", output,
        ]
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--samples", type=int, default=20000)
    parser.add_argument("--fixed-n", type=int, default=4096)
    parser.add_argument("--matching-n", type=int, default=2000)
    parser.add_argument("--prefix", default="counterexample_")
    args = parser.parse_args(argv)
    code = run_job(
        "fixed_heavy",
        "sqrt_fixed:sqrt, sqrt_fixed:sqrt",
        args.fixed_n,
        args.samples,
        args.seed,
        args.prefix,
    )
    if code:
        return code
    return run_job(
        "matching_heavy",
        "matching_heavy:1/2, matching_heavy:1/2",
        args.matching_n,
        args.samples,
        args.seed,
        args.prefix,
    )


if __name__ == "__main__":
    sys.exit(main())
