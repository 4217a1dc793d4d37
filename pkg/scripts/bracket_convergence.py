"""Measure how fast commutator loops converge to the bracket field.

For random configurations the square loop along frame fields E_i, E_j with
side t is compared against the bracket field B_ij; first-order convergence
of (loop displacement)/t^2 toward the bracket is the numerical signature of
the ladder identity [E_i, E_j] = B_ij.  Prints the error at each t and the
measured order between consecutive halvings.

    python3 scripts/bracket_convergence.py --d 3 --segments 3 --levels 5
"""

import argparse

import numpy as np

from snakecharm.control import LOOP_BRACKET_SIGN, commutator_loop
from snakecharm.frames import bracket_field, lambda_pairs
from snakecharm.geometry import random_configuration


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=3, help="ambient dimension")
    ap.add_argument("--segments", type=int, default=3)
    ap.add_argument("--levels", type=int, default=4,
                    help="number of halvings starting from t=1e-2")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    u = random_configuration(rng, args.d, args.segments)
    ts = [1e-2 / 2 ** k for k in range(args.levels)]

    print(f"d={args.d}, {args.segments} segments, seed {args.seed}; "
          f"bracket sign {LOOP_BRACKET_SIGN:+.0f}")
    for (i, j) in lambda_pairs(args.d):
        b = LOOP_BRACKET_SIGN * bracket_field(u, i, j).values
        errs = []
        for t in ts:
            _, est = commutator_loop(u, i, j, t)
            errs.append(np.linalg.norm(est.values - b, axis=1).max())
        orders = [np.log2(errs[k] / errs[k + 1]) for k in range(len(errs) - 1)]
        row = "  ".join(f"{e:.3e}" for e in errs)
        print(f"pair ({i},{j}): err {row}")
        print(f"           order {'  '.join(f'{o:+.3f}' for o in orders)}")


if __name__ == "__main__":
    main()
