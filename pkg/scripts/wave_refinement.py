"""Grid refinement of the traveling-wave drift for a Burgers profile.

Evolves the computed profile with the finite-volume solver on successively
finer grids and prints the shift-minimized L1 drift, its ratio to the
previous grid, and the recovered speed.

    python3 scripts/wave_refinement.py [--size 1] [--eps 1] [--T 10]
"""

import argparse

from radshock.flux import builtin
from radshock.evolution import verify_traveling_wave
from radshock.profile import assemble_profile
from radshock.shock import build_chord, shock_speed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=float, default=1.0)
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--T", type=float, default=10.0)
    ap.add_argument("--grids", default="1024,2048,4096,8192")
    args = ap.parse_args()
    f = builtin("burgers")
    prof = assemble_profile(build_chord(f, shock_speed(f, args.size / 2, -args.size / 2)),
                            args.eps)
    prev = None
    for M in (int(m) for m in args.grids.split(",")):
        rep = verify_traveling_wave(prof, args.T, M=M)
        ratio = "" if prev is None else f"  ratio {rep.drift / prev:.3f}"
        print(f"M {M:6d}  drift {rep.drift:.4e}  speed {rep.speed:+.3e}{ratio}")
        prev = rep.drift


if __name__ == "__main__":
    main()
