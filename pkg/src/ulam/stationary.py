"""Stationary distributions of Ulam chains and the discrete SRB measure."""

from dataclasses import dataclass
import logging
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.sparse.linalg import LinearOperator, gmres, spilu, spsolve

from .measures import StepMeasure, measure_of_interval
from .partitions import Partition

log = logging.getLogger(__name__)

DENSE_POWER_LIMIT = 4096
DIRECT_LU_LIMIT = 8192


class ConvergenceError(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class ErgodicityReport(NamedTuple):
    unique: bool
    n_positive_power: Optional[int]
    closed_classes: int
    period: Optional[int]


@dataclass
class StationaryResult:
    pi: np.ndarray
    residual: float
    iterations: int
    unique: bool
    n_positive_power: Optional[int] = None
    method: str = "direct"

    def to_json(self):
        return {"pi": self.pi.tolist(), "residual": self.residual,
                "iterations": self.iterations, "unique": self.unique,
                "n_delta": self.n_positive_power, "method": self.method}


def _support_graph(P):
    m = P.matrix if hasattr(P, "matrix") else sp.csr_matrix(P)
    g = m.copy()
    g.data = (g.data > 0).astype(np.int8)
    g.eliminate_zeros()
    return g


def _closed_classes(g):
    ncomp, labels = connected_components(g, directed=True, connection="strong")
    coo = g.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_ = np.zeros(ncomp, dtype=bool)
    open_[labels[coo.row[leaving]]] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not open_[c]]


def _period(g, states):
    """gcd of cycle lengths inside a strongly connected class."""
    sub = g[states][:, states].tocsr()
    order, pred = breadth_first_order(sub, 0, directed=True, return_predecessors=True)
    level = np.zeros(len(states), dtype=np.int64)
    for u in order[1:]:
        level[u] = level[pred[u]] + 1
    coo = sub.tocoo()
    d = int(np.gcd.reduce(np.abs(level[coo.row] + 1 - level[coo.col])))
    return d or None


def _first_positive_power(g, n_max):
    n = g.shape[0]
    if n > DENSE_POWER_LIMIT:
        return None
    gt = g.T.tocsr().astype(np.float32)
    reach = np.eye(n, dtype=np.float32)
    prev = None
    for k in range(1, n_max + 1):
        # row i of reach = states reachable from i in exactly k steps
        reach = (gt @ reach.T).T > 0
        if reach.all():
            return k
        if prev is not None and np.array_equal(reach, prev):
            return None
        prev = reach
        reach = reach.astype(np.float32)
    return None


def check_unique_ergodicity(P, n_max=64):
    """Certify a unique stationary distribution.

    First looks for an entrywise-positive power ``P**k`` with ``k <= n_max``
    (boolean powers; skipped above ``DENSE_POWER_LIMIT`` states). Failing
    that, the chain has a unique stationary law iff its support digraph has
    exactly one closed communicating class.
    """
    g = _support_graph(P)
    k = _first_positive_power(g, n_max)
    if k is not None:
        return ErgodicityReport(True, k, 1, 1)
    closed = _closed_classes(g)
    period = _period(g, closed[0]) if len(closed) == 1 else None
    return ErgodicityReport(len(closed) == 1, None, len(closed), period)


def residual(P, pi):
    return float(np.abs(P.matrix.T @ pi - pi).sum())


def _solve_pinned(a, rhs):
    if a.shape[0] <= DIRECT_LU_LIMIT:
        return spsolve(a, rhs)
    # exact LU fills in badly on large chains; ILU-preconditioned GMRES does not
    ilu = spilu(a, drop_tol=1e-6, fill_factor=10)
    pre = LinearOperator(a.shape, ilu.solve)
    x, info = gmres(a, rhs, M=pre, rtol=1e-12, atol=0.0, restart=50, maxiter=50)
    if info != 0:
        log.info("GMRES did not converge (info=%d); falling back to sparse LU", info)
        return spsolve(a, rhs)
    return x


def _direct(P, states):
    """Solve on one closed class, pinning the weight of a reference state.

    With ``pi_r = 1`` the remaining equations form the nonsingular M-matrix
    system ``(I - P_SS)^T x = P_rS^T``, whose solution is nonnegative.
    """
    m = P.matrix
    n = m.shape[0]
    pi = np.zeros(n)
    if states.size == 1:
        pi[states[0]] = 1.0
        return pi
    sub = m[states][:, states].tocsc()
    # pin the state with the largest self-transition: the chain lingers there
    ref = int(np.argmax(sub.diagonal()))
    rest = np.delete(np.arange(states.size), ref)
    a = sp.identity(rest.size, format="csc") - sub[rest][:, rest]
    rhs = sub[ref, rest].toarray().ravel()
    x = _solve_pinned(a.T.tocsc(), rhs)
    local = np.empty(states.size)
    local[ref] = 1.0
    local[rest] = np.maximum(x, 0.0)
    pi[states] = local / local.sum()
    return pi


def stationary_distribution(P, tol=1e-13, max_iter=10**6, method="direct",
                            cesaro=False, n_max=64, polish=3):
    """Stationary distribution ``pi = pi P`` of the Ulam chain.

    ``method="direct"`` solves the linear system on the closed class;
    ``method="power"`` iterates ``pi <- pi P`` from the uniform vector,
    optionally averaging iterates (``cesaro=True``). Either way the L1
    residual ``|pi P - pi|`` is reported; a power run that does not reach
    ``tol`` raises :class:`ConvergenceError` carrying the last iterate.
    """
    erg = check_unique_ergodicity(P, n_max=n_max)
    if not erg.unique:
        log.warning("chain has %d closed classes; stationary vector is not unique",
                    erg.closed_classes)
    if method == "direct":
        g = _support_graph(P)
        closed = _closed_classes(g)
        pi = _direct(P, closed[0])
        its = 0
        for _ in range(polish):
            nxt = P.matrix.T @ pi
            nxt /= nxt.sum()
            if residual(P, nxt) >= residual(P, pi):
                break
            pi, its = nxt, its + 1
        res = residual(P, pi)
        result = StationaryResult(pi, res, its, erg.unique, erg.n_positive_power, "direct")
        if res > tol:
            log.warning("direct solve residual %.3g above tolerance %.3g", res, tol)
        return result
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    pt = P.matrix.T.tocsr()
    x = np.full(P.n, 1.0 / P.n)
    avg = x.copy()
    res = np.inf
    for it in range(1, max_iter + 1):
        x = pt @ x
        x /= x.sum()
        if cesaro:
            avg += (x - avg) / (it + 1)
            cur = avg
        else:
            cur = x
        if it % 16 == 0 or it == max_iter:
            res = residual(P, cur)
            if res < tol:
                break
    result = StationaryResult(cur / cur.sum(), res, it, erg.unique,
                              erg.n_positive_power, "power")
    if res >= tol:
        raise ConvergenceError(
            f"power iteration stopped at {it} steps with residual {res:.3g}", result)
    return result


@dataclass(frozen=True, eq=False)
class DiscreteSRB:
    """Step measure with ``mu(D_i) = pi_i``, i.e. density ``pi_i / |D_i|``."""

    partition: Partition
    pi: np.ndarray

    @property
    def densities(self):
        return self.pi / self.partition.widths

    def as_measure(self):
        return StepMeasure(0.0, self.partition, self.densities)

    def mass(self, interval):
        return measure_of_interval(self.as_measure(), interval)


def srb_from_pi(pi, partition):
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (partition.n,):
        raise ValueError("pi does not match the partition")
    if abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError(f"pi sums to {pi.sum()!r}, not 1")
    return DiscreteSRB(partition, pi)


def tail_mass(srb, z):
    """``mu([z, 1])``."""
    if not 0.0 < z <= 1.0:
        raise ValueError("z must lie in (0, 1]")
    return srb.mass((z, 1.0))
