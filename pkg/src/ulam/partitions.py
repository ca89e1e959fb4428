"""Interval partitions of [0, 1] for the Ulam scheme.

Cells are stored 0-based: ``cell 0`` is the cell containing the origin.
Files written by the CLI number cells from 1.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Partition:
    """Ordered breakpoints ``0 = b_0 < b_1 < ... < b_n = 1``."""

    breakpoints: np.ndarray

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        b.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)

    @property
    def n(self):
        return self.breakpoints.size - 1

    @property
    def widths(self):
        return np.diff(self.breakpoints)

    @property
    def delta(self):
        """Diameter: the largest cell length."""
        return float(self.widths.max())

    @property
    def ratio_K(self):
        w = self.widths
        return float(w.max() / w.min())

    def cell(self, i):
        return float(self.breakpoints[i]), float(self.breakpoints[i + 1])

    def locate(self, x):
        """0-based index ``i`` with ``b_i <= x < b_{i+1}``; the last cell is closed."""
        x_arr = np.asarray(x, dtype=float)
        if np.any((x_arr < 0.0) | (x_arr > 1.0)) or np.any(np.isnan(x_arr)):
            raise ValueError(f"point outside [0, 1]: {x}")
        idx = np.searchsorted(self.breakpoints, x_arr, side="right") - 1
        idx = np.minimum(idx, self.n - 1)
        return int(idx) if idx.ndim == 0 else idx

    def refine(self, k):
        """Split every cell into ``k`` equal sub-cells."""
        if k < 1:
            raise ValueError("refinement factor must be >= 1")
        b = self.breakpoints
        steps = np.arange(k) / k
        inner = (b[:-1, None] + np.outer(self.widths, steps)).ravel()
        return Partition(np.append(inner, 1.0))

    def to_json(self):
        return {"breakpoints": self.breakpoints.tolist()}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, dict):
            data = data["breakpoints"]
        return cls(np.asarray(data, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints)

    def __hash__(self):
        return hash(self.breakpoints.tobytes())

    def __repr__(self):
        return f"Partition(n={self.n}, delta={self.delta:.3g}, K={self.ratio_K:.3g})"


def uniform_partition(n):
    if n < 1:
        raise ValueError("number of cells must be >= 1")
    return Partition(np.arange(n + 1) / n)


def quasi_uniform_partition(n, K, seed):
    """Random partition with cell-length ratio bounded by ``K``.

    Lengths are drawn uniformly from ``[1/(n sqrt K), sqrt K / n]`` and
    normalized; the ratio bound survives normalization.
    """
    if n < 1:
        raise ValueError("number of cells must be >= 1")
    if K < 1:
        raise ValueError("ratio bound K must be >= 1")
    if K == 1:
        return uniform_partition(n)
    rng = np.random.default_rng(seed)
    root = np.sqrt(K)
    lengths = rng.uniform(1.0 / (n * root), root / n, size=n)
    lengths /= lengths.sum()
    b = np.concatenate(([0.0], np.cumsum(lengths)))
    b[-1] = 1.0
    p = Partition(b)
    if p.ratio_K > K:
        # cumsum rounding only; pull back the extreme draws
        lengths = np.clip(lengths, lengths.max() / K * (1 + 1e-12), None)
        lengths /= lengths.sum()
        b = np.concatenate(([0.0], np.cumsum(lengths)))
        b[-1] = 1.0
        p = Partition(b)
    return p
