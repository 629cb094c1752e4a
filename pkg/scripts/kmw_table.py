#!/usr/bin/env python3
"""Print the lower-bound arithmetic: log2(delta) against k for a few graph sizes.

A negative entry means delta < 1, so no degree bound of that form is
available at that size and k.
"""
import argparse

from lrvc import Q
from lrvc.bounds import feasible_k_Delta, feasible_k_n, kmw_delta_from_Delta, kmw_delta_from_n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", default="1/4")
    ap.add_argument("--log2n", default="64,100,1000,10000")
    ap.add_argument("--log2Delta", default="16,20,64")
    ap.add_argument("--k-max", type=int, default=8)
    args = ap.parse_args()
    eps = Q(args.eps)

    ks = range(1, args.k_max + 1)
    print(f"eps = {eps}")
    print("log2n   " + "".join(f"{'k=' + str(k):>10}" for k in ks) + "   feasible k")
    for lg in map(Q, args.log2n.split(",")):
        cells = "".join(f"{float(kmw_delta_from_n(lg, k)):>10.3f}" for k in ks)
        print(f"{str(lg):<8}{cells}   {feasible_k_n(eps, lg)}")
    print()
    print("log2D   " + "".join(f"{'k=' + str(k):>10}" for k in ks) + "   feasible k")
    for lg in map(Q, args.log2Delta.split(",")):
        cells = "".join(f"{float(kmw_delta_from_Delta(lg, k)):>10.3f}" for k in ks)
        print(f"{str(lg):<8}{cells}   {feasible_k_Delta(eps, lg)}")


if __name__ == "__main__":
    main()
