"""Regenerate the tabulated lm-gamma target slopes by Monte-Carlo least squares.

Usage: python3 scripts/regen_theta0.py [--draws 10000000] [--raw]
"""

import argparse

from hulc.simlab import LM_GAMMA_THETA0, lm_gamma_slope_exact, regenerate_lm_gamma_theta0


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--draws", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw", action="store_true", help="regress the noisy Y instead of E[Y|X]")
    args = p.parse_args()
    print(f"{'gamma':>6} {'tabulated':>10} {'monte-carlo':>12} {'closed-form':>12}")
    for g, tab in sorted(LM_GAMMA_THETA0.items()):
        mc = regenerate_lm_gamma_theta0(g, args.draws, args.seed, conditional=not args.raw)
        print(f"{g:>6g} {tab:>10.4f} {mc:>12.4f} {lm_gamma_slope_exact(g):>12.4f}")


if __name__ == "__main__":
    main()
