"""Occupation law of hard rods in a short segment against the quadrature reference.

    python scripts/rod_occupations.py --length 3 --sweeps 1000000
"""

import argparse
import math

import numpy as np
from scipy import integrate

from gibbs_anneal.configuration import BoxRegion, Configuration
from gibbs_anneal.potential import hard_rods
from gibbs_anneal.sampler import GibbsParams, MoveWeights, new_chain, run
from gibbs_anneal.stats import batch_means


def feasible_volume(n: int, L: float) -> float:
    """Volume of sorted n-tuples in [0, L] with unit gaps (by nested quadrature)."""
    if n == 0:
        return 1.0
    if L < n - 1:
        return 0.0
    ranges = [lambda *outer, k=k: ((outer[0] + 1.0) if outer else 0.0, L - (n - 1 - k)) for k in range(n)]
    val, _ = integrate.nquad(lambda *x: 1.0, ranges[::-1])
    return val


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--length", type=float, default=3.0)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--lam", type=float, default=0.0)
    ap.add_argument("--sweeps", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    L = args.length
    n_max = int(math.ceil(L)) if L > 0 else 0  # n rods need L > n - 1
    w = np.array([feasible_volume(n, L) * math.exp(-args.beta * args.lam * n) for n in range(n_max + 1)])
    ref = w / w.sum()
    s = new_chain(Configuration(BoxRegion(1, (0.0,), (L,)), hard_rods(R=1.5)), args.seed)
    counts = []
    run(s, GibbsParams(args.beta, args.lam), MoveWeights(sigma=0.5), args.sweeps, 1,
        lambda x: counts.append(x.n))
    counts = np.asarray(counts)
    print(" N   reference   sampled     stderr     z")
    for n, p in enumerate(ref):
        m, se = batch_means((counts == n).astype(float), 50)
        z = (m - p) / se if se > 0 else float("nan")
        print(f"{n:2d}  {p:9.5f}  {m:9.5f}  {se:9.5f}  {z:+.2f}")


if __name__ == "__main__":
    main()
