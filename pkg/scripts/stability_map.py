"""Print a character map of the Mathieu stability diagram and optionally save the CSV.

Each cell is ``#`` (stable), ``.`` (unstable) or ``?`` (integration failed).
Rows run over q from top (largest) to bottom, columns over a.

    python3 scripts/stability_map.py --na 61 --nq 25 --csv map.csv
"""
import argparse

import numpy as np

from qtrap import io as qio
from qtrap.dynamics import stability_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", nargs=2, type=float, default=(-2.0, 2.0), metavar=("LO", "HI"))
    ap.add_argument("--q", nargs=2, type=float, default=(0.0, 2.0), metavar=("LO", "HI"))
    ap.add_argument("--na", type=int, default=61)
    ap.add_argument("--nq", type=int, default=21)
    ap.add_argument("--omega", type=float, default=2.0)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--csv", default=None, help="also write the stability table here")
    args = ap.parse_args(argv)

    a_values = np.linspace(*args.a, args.na)
    q_values = np.linspace(*args.q, args.nq)
    verdicts = stability_sweep(a_values, q_values, args.omega, args.tol, threads=args.threads)
    grid = np.array(verdicts, dtype=object).reshape(args.nq, args.na)

    for q, row in zip(q_values[::-1], grid[::-1]):
        cells = "".join("?" if isinstance(v, Exception) else "#" if v.stable else "." for v in row)
        print(f"q={q:5.2f} |{cells}|")
    print(f"        a from {args.a[0]:g} to {args.a[1]:g}")
    stable = sum(not isinstance(v, Exception) and v.stable for v in verdicts)
    print(f"{stable}/{len(verdicts)} stable")

    if args.csv:
        rows = []
        for (q, a), v in zip(((q, a) for q in q_values for a in a_values), verdicts):
            if isinstance(v, Exception):
                rows.append((a, q, "failed", float("nan"), float("nan")))
            else:
                rows.append((a, q, v.stable, v.monodromy_trace, v.growth_exponent))
        qio.emit(qio.table_text("stability", rows, "csv"), args.csv)


if __name__ == "__main__":
    main()
