"""Truncated-matrix spectral data along a ladder of matrix sizes.

For one operator configuration, builds the N x N truncation for each
rung, prints operator norm, Schatten norms and the tail trend, and flags
whether the top rungs saturate.  This is the direct-spectral side of the
criteria cross-checks, exposed on its own for convergence studies.
"""

import argparse

from bergmanops.operators import build_operator, spectral_summary
from bergmanops.symbols import Symbol, parse_symbol
from bergmanops.weights import WeightSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--weight", default="exp:b=1,alpha=1")
    ap.add_argument("--op", default="C_g_psi",
                    choices=["C_psi_g", "C_g_psi", "GI", "GV", "I", "J"])
    ap.add_argument("--psi", default="scale:0.5")
    ap.add_argument("--g", default="poly:1")
    ap.add_argument("--ladder", default="16,32,64,128",
                    help="comma-separated matrix sizes")
    ap.add_argument("--schatten", default="1,2",
                    help="comma-separated Schatten exponents")
    args = ap.parse_args()

    w = WeightSpec.parse(args.weight)
    psi = Symbol.identity() if args.op in ("I", "J") else parse_symbol(args.psi)
    g = parse_symbol(args.g)
    sizes = [int(t) for t in args.ladder.split(",")]
    p_list = tuple(float(t) for t in args.schatten.split(","))

    print(f"# weight {w.spec_string()}  op {args.op}  psi {psi.to_spec()}  "
          f"g {g.to_spec()}")
    header = f"{'N':>5} {'op_norm':>14}"
    header += "".join(f" {'S_' + format(p, 'g'):>14}" for p in p_list)
    header += f" {'tail(N/2)':>12}"
    print(header)
    op_norms = []
    for n in sizes:
        summary = spectral_summary(build_operator(args.op, psi, g, w, n),
                                   p_list)
        op_norms.append(summary.op_norm)
        half_tail = next((d["op_norm"] for d in summary.tail_trend
                          if d["m"] == n // 2), float("nan"))
        row = f"{n:>5} {summary.op_norm:>14.8e}"
        row += "".join(f" {summary.schatten[p]:>14.8e}" for p in p_list)
        row += f" {half_tail:>12.4e}"
        print(row)
    if len(op_norms) >= 2:
        rel = abs(op_norms[-1] - op_norms[-2]) / max(op_norms[-2], 1e-300)
        print(f"# top-rung op-norm increment {rel:.2e} "
              f"({'saturated' if rel < 0.10 else 'still moving'})")


if __name__ == "__main__":
    main()
