"""Print the two-to-one obstruction floor over the sub-threshold color range,
optionally with a Monte Carlo audit of the seeding coupling's list sizes."""

import argparse
import sys

from cftp_colorings import oracle


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", default="4,6,8,10,12")
    ap.add_argument("--audit", action="store_true")
    ap.add_argument("--trials", type=int, default=20000)
    args = ap.parse_args()

    header = "delta,q,m,r,bound" + (",measured,ci_lo,ci_hi" if args.audit else "")
    print(header)
    for delta in (int(d) for d in args.deltas.split(",")):
        m = delta // 2
        for q in range(3 * m, int(2.5 * delta - 1)):
            bound = oracle.lower_bound_value(delta, q)
            row = f"{delta},{q},{m},{q - 3 * m},{bound:.6f}"
            if args.audit:
                inst = oracle.build_worst_case(delta, q)
                res = oracle.audit_coupling_at_worst_case(inst, "seeding", args.trials)
                if res.compatible:
                    row += f",{res.mean:.6f},{res.ci_lo:.6f},{res.ci_hi:.6f}"
                else:
                    row += ",,,"
            print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
