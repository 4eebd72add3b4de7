"""Jump magnitude of the Burgers profile across the continuity threshold.

Prints one line per shock size and writes ``threshold_sweep.csv``. The
regularity thresholds of the same family are printed for comparison.

    python3 scripts/threshold_sweep.py [--eps 1] [--out DIR]
"""

import argparse
import math
import os

import numpy as np

from radshock.flux import builtin
from radshock.profile import assemble_profile, write_csv
from radshock.regularity import thresholds
from radshock.shock import ShockTriple, build_chord


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()
    f = builtin("burgers")
    crit = math.sqrt(2.0 / args.eps)
    sizes = np.unique(np.concatenate([np.linspace(0.5 * crit, 1.6 * crit, 23),
                                      crit * (1 + np.array([-1e-3, 1e-3, 1e-2, 3e-2]))]))
    rows = []
    for size in sizes:
        chord = build_chord(f, ShockTriple(size / 2, -size / 2, 0.0))
        jump = assemble_profile(chord, args.eps).jump_magnitude()
        rows.append((size, jump))
        print(f"size {size:.6f}  jump {jump:.6e}")
    os.makedirs(args.out, exist_ok=True)
    write_csv(os.path.join(args.out, "threshold_sweep.csv"), "size,jump", rows)
    eps_n = thresholds(build_chord(f, ShockTriple(0.5, -0.5, 0.0)), 4)
    for n, e in enumerate(eps_n, 1):
        print(f"n = {n}: threshold {e:.15f}  closed form {2 * math.sqrt(2 * n) / (n + 1):.15f}")


if __name__ == "__main__":
    main()
