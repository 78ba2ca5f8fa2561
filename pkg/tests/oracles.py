"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy import integrate


def rod_volume(n: int, length: float) -> float:
    """Lebesgue measure of ordered n-tuples in [0, length] with all gaps > 1, by quadrature."""
    if n == 0:
        return 1.0
    # sorted positions x1 < x2 < ... with x_{k+1} > x_k + 1; multiply by n! for order
    def ranges(k):
        def rng(*outer):
            # outer = (x_{k-1}, ..., x_1) in nquad's convention (inner variables first)
            lo = 0.0 if not outer else outer[0] + 1.0
            return (lo, max(lo, length - (n - 1 - k)))
        return rng

    if n == 1:
        return length
    funcs = [ranges(k) for k in range(n)][::-1]
    val, _ = integrate.nquad(lambda *x: 1.0, funcs)
    return val * math.factorial(n)


def rod_count_distribution(length: float, beta: float = 1.0, lam: float = 0.0, n_max: int = 8):
    """P(N = n) for hard rods of unit diameter in a segment, zero tail."""
    w = []
    for n in range(n_max + 1):
        if n > 1 and (n - 1) >= length:
            break
        w.append(rod_volume(n, length) / math.factorial(n) * math.exp(-beta * lam * n))
    w = np.asarray(w)
    return w / w.sum()


def rod_partition(length: float, beta: float = 1.0, lam: float = 0.0) -> float:
    """Z against the unit Poisson reference on the segment."""
    tot = 0.0
    n = 0
    while n <= 1 or (n - 1) < length:
        tot += rod_volume(n, length) / math.factorial(n) * math.exp(-beta * lam * n)
        n += 1
    return math.exp(-length) * tot
