"""Monotone step measures: an atom at the origin plus a step density.

Every probability measure with ``mu(A) >= mu((A + x) & [0, 1])`` is an atom
at 0 plus a non-increasing density, so step densities on a partition plus
an atom weight cover everything the pipeline produces.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .interval_maps import PreconditionError
from .partitions import Partition, uniform_partition


@dataclass(frozen=True, eq=False)
class StepMeasure:
    atom0: float
    partition: Partition
    densities: np.ndarray

    def __post_init__(self):
        f = np.array(self.densities, dtype=float)
        if f.shape != (self.partition.n,):
            raise ValueError(f"expected {self.partition.n} densities, got {f.shape}")
        if np.any(f < 0) or self.atom0 < 0:
            raise ValueError("densities and atom weight must be nonnegative")
        f.setflags(write=False)
        object.__setattr__(self, "densities", f)
        object.__setattr__(self, "atom0", float(self.atom0))

    @property
    def masses(self):
        return self.densities * self.partition.widths

    @property
    def total(self):
        return self.atom0 + float(self.masses.sum())

    def continuous_cdf(self, x):
        """Mass of the density part on ``[0, x]``; piecewise linear in ``x``."""
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        return np.interp(x, self.partition.breakpoints, cum)

    def to_json(self):
        return {"atom0": self.atom0,
                "breakpoints": self.partition.breakpoints.tolist(),
                "densities": self.densities.tolist()}

    @classmethod
    def from_json(cls, data):
        return cls(data["atom0"], Partition.from_json(data["breakpoints"]),
                   np.asarray(data["densities"], dtype=float))

    @classmethod
    def from_masses(cls, masses, partition, atom0=0.0):
        return cls(atom0, partition, np.asarray(masses, dtype=float) / partition.widths)


def lebesgue(partition=None):
    partition = partition or uniform_partition(1)
    return StepMeasure(0.0, partition, np.ones(partition.n))


def dirac0(partition=None):
    partition = partition or uniform_partition(1)
    return StepMeasure(1.0, partition, np.zeros(partition.n))


@dataclass(frozen=True)
class IntervalPair:
    """Intervals with ``inf A <= inf B`` and ``sup A <= sup B``."""

    A: tuple
    B: tuple

    def __post_init__(self):
        for name, (lo, hi) in (("A", self.A), ("B", self.B)):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"{name}={(lo, hi)} is not a subinterval of [0, 1]")

    @property
    def ordered(self):
        return self.A[0] <= self.B[0] and self.A[1] <= self.B[1]


def measure_of_interval(mu, interval):
    """``mu([lo, hi])``: atom if ``0`` is in the interval, plus clipped density mass."""
    lo, hi = (float(v) for v in interval)
    if hi < lo:
        return 0.0
    atom = mu.atom0 if lo <= 0.0 else 0.0
    return atom + float(mu.continuous_cdf(hi) - mu.continuous_cdf(lo))


def avg_density(mu, interval):
    """``mu(I) / |I|``, or 0 for a degenerate interval."""
    length = float(interval[1]) - float(interval[0])
    if length <= 0.0:
        return 0.0
    return measure_of_interval(mu, interval) / length


class MonotonicityCheck(NamedTuple):
    ok: bool
    witness: Optional[int]  # 0-based i with f[i+1] > f[i] + tol

    def __bool__(self):
        return self.ok


def _first_increase(values, tol):
    bad = np.flatnonzero(np.diff(values) > tol)
    return int(bad[0]) if bad.size else None


def is_monotonic(mu, tol=0.0):
    """Non-increasing density check.

    The densities and the per-cell slopes of ``x -> mu([0, x])`` on ``(0, 1]``
    are both checked; they agree up to rounding.
    """
    w = _first_increase(mu.densities, tol)
    if w is None:
        cum = mu.continuous_cdf(mu.partition.breakpoints)
        slopes = np.diff(cum) / mu.partition.widths
        w = _first_increase(slopes, tol)
    return MonotonicityCheck(w is None, w)


def check_key_inequality(mu, pair, tol=1e-12):
    """Average density over ``A`` dominates that over ``B`` for ordered pairs."""
    if not pair.ordered:
        raise PreconditionError(f"intervals {pair.A}, {pair.B} are not ordered")
    if not is_monotonic(mu, tol=tol):
        raise PreconditionError("measure is not monotonic")
    return avg_density(mu, pair.A) >= avg_density(mu, pair.B) - tol


def random_monotonic(seed, n_cells, atom_prob=0.5, partition=None):
    """Reproducible random monotonic step measure."""
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    partition = partition or uniform_partition(n_cells)
    if partition.n != n_cells:
        raise ValueError("partition size does not match n_cells")
    rng = np.random.default_rng(seed)
    atom0 = rng.uniform(0.0, 0.9) if rng.random() < atom_prob else 0.0
    increments = rng.exponential(1.0, size=n_cells)
    f = np.cumsum(increments[::-1])[::-1]
    f *= (1.0 - atom0) / float(np.dot(f, partition.widths))
    return StepMeasure(atom0, partition, f)


def random_ordered_pair(rng):
    """Random nondegenerate intervals satisfying ``A <= B``."""
    a_lo, b_lo = np.sort(rng.uniform(0.0, 1.0, 2))
    if rng.random() < 0.2:
        a_lo = 0.0
    a_hi = rng.uniform(a_lo, 1.0)
    b_hi = rng.uniform(max(a_hi, b_lo), 1.0)
    if a_hi <= a_lo or b_hi <= b_lo:
        return random_ordered_pair(rng)
    return IntervalPair((float(a_lo), float(a_hi)), (float(b_lo), float(b_hi)))


def _interval_masses(mu, lo, hi):
    """Vectorized continuous-part mass of ``[lo_k, hi_k]``."""
    return mu.continuous_cdf(hi) - mu.continuous_cdf(lo)


def project(mu, target):
    """Conditional expectation onto step densities over ``target``.

    The result is absolutely continuous: the atom is spread over the first
    cell.
    """
    b = target.breakpoints
    masses = _interval_masses(mu, b[:-1], b[1:])
    masses[0] += mu.atom0
    return StepMeasure(0.0, target, masses / target.widths)


def pushforward(tmap, mu, output):
    """Transfer-operator image of ``mu`` discretized onto ``output`` cells.

    Preimages of output cells under each monotone branch are intervals, so
    the cell masses are exact up to root-finding tolerance. An atom at a
    fixed origin stays an atom; anywhere else it becomes cell mass.
    """
    b = output.breakpoints
    masses = np.zeros(output.n)
    for br in tmap.branches:
        lo_img, hi_img = br.image
        y = np.clip(b, lo_img, hi_img)
        x = br.inverse(y)
        left, right = (x[:-1], x[1:]) if br.increasing else (x[1:], x[:-1])
        hit = (np.minimum(b[1:], hi_img) - np.maximum(b[:-1], lo_img)) > 0
        masses += np.where(hit, _interval_masses(mu, left, right), 0.0)
    atom0 = 0.0
    if mu.atom0 > 0.0:
        t0 = float(tmap(0.0))
        if t0 == 0.0:
            atom0 = mu.atom0
        else:
            masses[output.locate(t0)] += mu.atom0
    return StepMeasure(atom0, output, masses / output.widths)
