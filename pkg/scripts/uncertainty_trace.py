"""Trace the uncertainty products of a wave packet through a Mathieu drive.

Prints, at a few times per drive period, the position-momentum product, the
covariance-corrected bound it saturates, and the product in the rotated
(Z, P) quadratures, which stays at 1/4 throughout.

    python3 scripts/uncertainty_trace.py --a 0 --q 0.4 --periods 3
"""
import argparse
import math

import numpy as np

from qtrap.dynamics import integrate_epsilon, mathieu_profile
from qtrap.gaussian import coherent_state, squeeze_factor, uncertainty_products


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=0.0)
    ap.add_argument("--q", type=float, default=0.4)
    ap.add_argument("--omega", type=float, default=2.0)
    ap.add_argument("--periods", type=int, default=3)
    ap.add_argument("--per-period", type=int, default=8)
    ap.add_argument("--z0", type=float, default=1.0)
    args = ap.parse_args(argv)

    period = 2 * math.pi / args.omega
    t_end = args.periods * period
    sol = integrate_epsilon(mathieu_profile(args.a, args.q, args.omega), 0.0, t_end)

    print(f"{'t/T':>6s} {'var_z var_p':>12s} {'bound':>12s} {'var_Z var_P':>12s} {'|B|':>8s}")
    worst = 0.0
    for t in np.linspace(0.0, t_end, args.periods * args.per_period + 1):
        state = coherent_state(sol, t, args.z0, 0.0)
        u = uncertainty_products(state)
        worst = max(worst, abs(u.heisenberg_zp - u.schrodinger_rhs), abs(u.heisenberg_ZP - 0.25))
        print(f"{t / period:6.3f} {u.heisenberg_zp:12.8f} {u.schrodinger_rhs:12.8f}"
              f" {u.heisenberg_ZP:12.8f} {abs(squeeze_factor(state)):8.4f}")
    print(f"max identity gap: {worst:.2e}")


if __name__ == "__main__":
    main()
