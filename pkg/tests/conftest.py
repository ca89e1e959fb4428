import numpy as np
import pytest


def bisect_oracle(g, lo, hi, iters=200):
    """Plain scalar bisection; kept separate from the package's root finder."""
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fine_density_measure(antiderivative, n=10_000):
    """Step measure whose cell masses are exact integrals of a density."""
    from ulam.measures import StepMeasure
    from ulam.partitions import uniform_partition

    part = uniform_partition(n)
    b = part.breakpoints
    masses = antiderivative(b[1:]) - antiderivative(b[:-1])
    return StepMeasure(0.0, part, masses / part.widths)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
