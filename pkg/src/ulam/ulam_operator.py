"""Ulam transition matrices ``p_ij = m(D_i & T^-1 D_j) / m(D_i)``."""

from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.sparse as sp

from ._rootfind import bisect_root
from .interval_maps import PreconditionError, mp_map
from .partitions import Partition

log = logging.getLogger(__name__)

ROW_SUM_ERROR = 1e-8


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class UlamMatrix:
    """Sparse row-stochastic matrix over the cells of ``partition``.

    ``row_residual`` is the largest deviation of a row sum from 1 before the
    rows were rescaled to sum to 1 exactly.
    """

    matrix: sp.csr_matrix
    partition: Partition
    map_name: str = "custom"
    params: dict = field(default_factory=dict)
    row_residual: float = 0.0

    @property
    def n(self):
        return self.matrix.shape[0]

    def row(self, i):
        """``[(j, p_ij), ...]`` for row ``i`` (0-based)."""
        lo, hi = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def rows(self):
        return [self.row(i) for i in range(self.n)]

    def to_json(self):
        """JSON container with 1-based column indices."""
        return {
            "n": self.n,
            "map": self.map_name,
            "params": dict(self.params),
            "partition": self.partition.breakpoints.tolist(),
            "row_residual": self.row_residual,
            "rows": [[[j + 1, p] for j, p in self.row(i)] for i in range(self.n)],
        }

    @classmethod
    def from_json(cls, data):
        partition = Partition.from_json(data["partition"])
        n = int(data["n"])
        rows, cols, vals = [], [], []
        for i, entries in enumerate(data["rows"]):
            for j, p in entries:
                rows.append(i)
                cols.append(int(j) - 1)
                vals.append(float(p))
        m = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(m, partition, data.get("map", "custom"), dict(data.get("params", {})),
                   float(data.get("row_residual", 0.0)))

    def to_triplets(self):
        """Plain-text ``i j p`` lines, 1-based."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(f"{coo.row[k] + 1} {coo.col[k] + 1} {float(coo.data[k])!r}\n" for k in order)


def _column_preimages(branch, b):
    """Per output cell j, the preimage interval of ``[b_j, b_{j+1}]`` in the branch."""
    x = branch.inverse(np.clip(b, *branch.image))
    if branch.increasing:
        return x[:-1], x[1:]
    return x[1:], x[:-1]


def build_matrix(tmap, partition):
    """Assemble the Ulam matrix of ``tmap`` on ``partition``.

    Works column by column: the preimage of each cell under each branch is
    one interval, clipped against the row cells it overlaps.
    """
    b = partition.breakpoints
    n = partition.n
    widths = partition.widths
    all_i, all_j, all_p = [], [], []
    for br in tmap.branches:
        lo, hi = _column_preimages(br, b)
        cols = np.flatnonzero(hi > lo)
        lo, hi = lo[cols], hi[cols]
        first = np.clip(np.searchsorted(b, lo, side="right") - 1, 0, n - 1)
        last = np.clip(np.searchsorted(b, hi, side="left") - 1, 0, n - 1)
        last = np.maximum(last, first)
        counts = last - first + 1
        j = np.repeat(cols, counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        i = np.repeat(first, counts) + offsets
        overlap = (np.minimum(np.repeat(hi, counts), b[i + 1])
                   - np.maximum(np.repeat(lo, counts), b[i]))
        keep = overlap > 0
        all_i.append(i[keep])
        all_j.append(j[keep])
        all_p.append(overlap[keep] / widths[i[keep]])
    m = sp.coo_matrix(
        (np.concatenate(all_p), (np.concatenate(all_i), np.concatenate(all_j))),
        shape=(n, n),
    ).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    sums = np.asarray(m.sum(axis=1)).ravel()
    residual = float(np.max(np.abs(sums - 1.0)))
    if residual > ROW_SUM_ERROR:
        worst = int(np.argmax(np.abs(sums - 1.0)))
        raise AssemblyError(f"row {worst + 1} sums to {sums[worst]!r}; branch inversion is off")
    log.debug("assembled %s n=%d nnz=%d, max row-sum residual %.3g",
              tmap.name, n, m.nnz, residual)
    m = sp.csr_matrix(sp.diags(1.0 / sums) @ m)
    m.sort_indices()
    return UlamMatrix(m, partition, tmap.name, dict(tmap.params), residual)


def apply(P, w, direction="left"):
    """``w P`` (left, acting on measures) or ``P w`` (right, acting on functions)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (P.n,):
        raise ValueError(f"weight vector has shape {w.shape}, expected ({P.n},)")
    if direction == "left":
        return P.matrix.T @ w
    if direction == "right":
        return P.matrix @ w
    raise ValueError(f"direction must be 'left' or 'right', not {direction!r}")


@dataclass(frozen=True)
class FirstRowDiagnostics:
    alpha: float
    delta: float
    z1: float
    z2: float
    p11: float
    p12: float
    bounds: tuple  # (2**(-1-alpha) |D_1|**alpha, |D_1|**alpha)
    delta_bounds: tuple  # same with |D_1| replaced by the diameter
    matrix_p11: float = float("nan")
    matrix_p12: float = float("nan")
    matrix_tail: float = float("nan")  # sum of p_1j over j > 2

    @property
    def within_bounds(self):
        return self.bounds[0] <= self.p12 <= self.bounds[1]


def first_row_diagnostics(alpha, partition, matrix=None, check_tol=1e-10):
    """Closed-form first-row probabilities for the Manneville-Pomeau map.

    ``z1`` solves ``z + z**(1+alpha) = |D_1|`` and ``z2`` solves
    ``z + z**(1+alpha) = min(|D_1| + |D_1|**(1+alpha), |D_1| + |D_2|)``;
    then ``p11 = z1/|D_1|`` and ``p12 = (z2 - z1)/|D_1|``. Requires
    ``|D_1|**(1+alpha) <= |D_2|`` so that the first cell maps into the first
    two.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    w = partition.widths
    if w.size < 2:
        raise PreconditionError("delta not small enough: partition has a single cell")
    d1, d2 = float(w[0]), float(w[1])
    if d1 ** (1 + alpha) > d2:
        raise PreconditionError(
            f"delta not small enough: |D_1|^(1+alpha)={d1 ** (1 + alpha):.6g} > |D_2|={d2:.6g}")

    def solve(rhs):
        return bisect_root(lambda z: z + z ** (1.0 + alpha) - rhs, 0.0, rhs)

    z1 = solve(d1)
    z2 = solve(min(d1 + d1 ** (1 + alpha), d1 + d2))
    p11 = z1 / d1
    p12 = (z2 - z1) / d1
    lower = 2.0 ** (-1 - alpha)
    delta = partition.delta
    if matrix is None:
        matrix = build_matrix(mp_map(alpha), partition)
    row = dict(matrix.row(0))
    m11, m12 = row.get(0, 0.0), row.get(1, 0.0)
    tail = float(sum(p for j, p in row.items() if j > 1))
    if abs(m11 - p11) > check_tol or abs(m12 - p12) > check_tol:
        raise AssemblyError(f"first row mismatch: matrix ({m11!r}, {m12!r}) "
                            f"vs closed form ({p11!r}, {p12!r})")
    return FirstRowDiagnostics(
        alpha=float(alpha), delta=delta, z1=z1, z2=z2, p11=p11, p12=p12,
        bounds=(lower * d1 ** alpha, d1 ** alpha),
        delta_bounds=(lower * delta ** alpha, delta ** alpha),
        matrix_p11=m11, matrix_p12=m12, matrix_tail=tail,
    )
