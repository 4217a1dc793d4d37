"""Track a circle with a three-link planar arm and tabulate scheme accuracy.

Runs the canonical benchmark (unit links at angles +/- arccos(1/4), head at
(1.5, 0), target circle of radius 1.5 about the origin) for a grid of
integrator schemes and step sizes, printing max/final head error and energy.
Optionally dumps the finest rk4 run as JSONL for plotting elsewhere.

    python3 scripts/circle_tracking.py
    python3 scripts/circle_tracking.py --periods 2 --export run.jsonl
"""

import argparse
import time

import numpy as np

from snakecharm.control import TargetCurve, energy, track
from snakecharm.geometry import Configuration, Partition
from snakecharm.scenario import export_trajectory


def three_link_arm() -> Configuration:
    a = np.arccos(0.25)
    vals = np.array([[np.cos(a), np.sin(a)],
                     [1.0, 0.0],
                     [np.cos(a), -np.sin(a)]])
    return Configuration.arm(Partition.uniform(3), vals)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--periods", type=float, default=1.0,
                    help="number of circle periods to track (default 1)")
    ap.add_argument("--gain", type=float, default=0.0,
                    help="feedback gain K (default 0: pure feedforward)")
    ap.add_argument("--export", metavar="PATH",
                    help="write the finest rk4 trajectory as JSONL")
    args = ap.parse_args()

    u0 = three_link_arm()
    circle = TargetCurve.circle(u0.total_length, 1.5, omega=1.0)
    horizon = args.periods * circle.duration

    print(f"three-link arm, head {np.round(u0.values.sum(axis=0), 6)}, "
          f"target circle r=1.5, duration {horizon:.4f}")
    print(f"{'scheme':>6} {'dt':>8} {'steps':>7} {'max err':>12} "
          f"{'final err':>12} {'energy':>10} {'wall s':>7}")

    finest = None
    for scheme in ("euler", "rk4"):
        for dt in (4e-3, 2e-3, 1e-3):
            t0 = time.perf_counter()
            traj = track(u0, circle, scheme=scheme, dt=dt,
                         feedback_gain=args.gain, duration=horizon)
            wall = time.perf_counter() - t0
            err = traj.tracking_errors
            print(f"{scheme:>6} {dt:>8.0e} {traj.times.size - 1:>7d} "
                  f"{err.max():>12.3e} {err[-1]:>12.3e} "
                  f"{energy(traj):>10.6f} {wall:>7.2f}")
            if scheme == "rk4":
                finest = traj

    if args.export and finest is not None:
        export_trajectory(finest, args.export)
        print(f"wrote {finest.times.size} records to {args.export}")


if __name__ == "__main__":
    main()
