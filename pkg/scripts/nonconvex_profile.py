"""Profile of the quartic flux ``u^4/4 - u^2/2`` between ``u_pm = +-2``.

Writes ``quartic_profile.csv`` and ``quartic_jumps.csv`` and prints the jump
table together with the branch each side of a jump lies on.

    python3 scripts/nonconvex_profile.py [--eps 0.1] [--um 2] [--out DIR]
"""

import argparse
import os

from radshock.cli import JUMP_HEADER
from radshock.flux import builtin
from radshock.profile import assemble_profile, write_csv
from radshock.shock import build_chord, shock_speed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--um", type=float, default=2.0)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()
    f = builtin("quartic")
    chord = build_chord(f, shock_speed(f, args.um, -args.um))
    prof = assemble_profile(chord, args.eps)
    os.makedirs(args.out, exist_ok=True)
    prof.to_csv(os.path.join(args.out, "quartic_profile.csv"))
    recs = prof.jump_records()
    write_csv(os.path.join(args.out, "quartic_jumps.csv"), JUMP_HEADER,
              [[r[k] for k in JUMP_HEADER.split(",")] for r in recs])
    print(f"{len(recs)} jump(s), branches {[(b.lo, b.hi) for b in chord.branches]}")
    for r in recs:
        print(f"xi0 {r['xi0']:+.6f}  u_left {r['u_left']:+.9f} (branch "
              f"{chord.branch_of(r['u_left'])})  u_right {r['u_right']:+.9f} (branch "
              f"{chord.branch_of(r['u_right'])})  RH {r['rh_residual']:.1e}  "
              f"Oleinik {r['oleinik_margin']:.3e}")


if __name__ == "__main__":
    main()
