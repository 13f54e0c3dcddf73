"""Sweep the boundedness/compactness verdicts over an exponent grid.

Prints one table row per (p, q) pair for a fixed weight and symbol pair,
with the route, statistic and growth factor next to each verdict.  Useful
for eyeballing where an operator crosses from bounded to unbounded as the
exponents move across the diagonal.
"""

import argparse
import math

from bergmanops.criteria import CheckConfig, check_boundedness, check_compactness
from bergmanops.symbols import Symbol, parse_symbol
from bergmanops.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--weight", default="exp:b=1,alpha=1")
    ap.add_argument("--op", default="C_g_psi",
                    choices=["C_psi_g", "C_g_psi", "I", "J"])
    ap.add_argument("--psi", default="poly:0,1")
    ap.add_argument("--g", default="poly:0,1")
    ap.add_argument("--exponents", default="1,2,4",
                    help="comma-separated p and q values, inf allowed")
    ap.add_argument("--r-cut", type=float, default=0.95)
    ap.add_argument("--density", type=float, default=1.0)
    args = ap.parse_args()

    w = WeightSpec.parse(args.weight)
    psi = Symbol.identity() if args.op in ("I", "J") else parse_symbol(args.psi)
    g = parse_symbol(args.g)
    ps = [math.inf if t.strip().lower() == "inf" else float(t)
          for t in args.exponents.split(",")]
    cfg = CheckConfig(r_cut=args.r_cut, grid_density=args.density)

    print(f"# weight {w.spec_string()}  op {args.op}  psi {psi.to_spec()}  "
          f"g {g.to_spec()}")
    print(f"{'p':>6} {'q':>6} {'bounded':>14} {'compact':>14} "
          f"{'route':>16} {'statistic':>12} {'growth':>8}")
    for p in ps:
        for q in ps:
            rb = check_boundedness(w, args.op, psi, g, p, q, cfg)
            rk = check_compactness(w, args.op, psi, g, p, q, cfg)
            growth = "-" if rb.growth is None else f"{rb.growth:.3f}"
            print(f"{p:>6g} {q:>6g} {rb.verdict:>14} {rk.verdict:>14} "
                  f"{rb.route:>16} {rb.statistic:>12.4e} {growth:>8}")


if __name__ == "__main__":
    main()
