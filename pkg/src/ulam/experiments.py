"""Resolution sweeps and scenario runs over Ulam approximations."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
import csv
import io
import json
import logging
import math
import os
from typing import Optional

import numpy as np
from scipy import stats

from .interval_maps import PreconditionError, counterexample_map, mp_map
from .measures import is_monotonic
from .partitions import quasi_uniform_partition, uniform_partition
from .stationary import srb_from_pi, stationary_distribution, tail_mass
from .ulam_operator import build_matrix, first_row_diagnostics

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("alpha", "n_cells", "delta", "K", "pi1", "pi1_over_delta",
                 "pi1_over_delta_pow", "tail_z", "tail_mass", "p11", "p12",
                 "p12_lo", "p12_hi", "residual", "unique")


@dataclass
class SweepRecord:
    alpha: float
    n_cells: int
    delta: float
    K: float
    pi1: float = math.nan
    pi1_over_delta: float = math.nan
    pi1_over_delta_pow: float = math.nan
    tail_z: float = math.nan
    tail_mass: float = math.nan
    p11: float = math.nan
    p12: float = math.nan
    p12_lo: float = math.nan
    p12_hi: float = math.nan
    residual: float = math.nan
    unique: bool = False
    srb_monotone: bool = False
    error: Optional[str] = None
    pi: Optional[np.ndarray] = None

    @property
    def ok(self):
        return self.error is None

    def row(self):
        return {name: getattr(self, name) for name in SWEEP_COLUMNS}

    def to_json(self):
        return {k: v for k, v in asdict(self).items() if k != "pi"}


def _partition(kind, n, K, seed):
    if kind == "uniform":
        return uniform_partition(n)
    if kind == "quasi":
        return quasi_uniform_partition(n, K, seed)
    raise ValueError(f"unknown partition kind {kind!r}")


def sweep_record(alpha, n, partition_kind="uniform", K=1.0, seed=0, z=0.1, tol=1e-13,
                 keep_pi=False, tmap=None):
    """Build, solve and summarize one ``(alpha, n)`` configuration."""
    part = _partition(partition_kind, n, K, seed)
    rec = SweepRecord(alpha=float(alpha), n_cells=n, delta=part.delta, K=part.ratio_K,
                      tail_z=float(z))
    tmap = tmap or mp_map(alpha)
    P = build_matrix(tmap, part)
    res = stationary_distribution(P, tol=tol)
    srb = srb_from_pi(res.pi, part)
    pi1 = float(res.pi[0])
    rec.pi1 = pi1
    rec.pi1_over_delta = pi1 / part.delta
    rec.pi1_over_delta_pow = pi1 / part.delta ** (1.0 - alpha)
    rec.tail_mass = tail_mass(srb, z)
    rec.residual = res.residual
    rec.unique = bool(res.unique)
    rec.srb_monotone = bool(is_monotonic(srb.as_measure(), tol=1e-10))
    if keep_pi:
        rec.pi = res.pi
    row0 = dict(P.row(0))
    rec.p11 = row0.get(0, 0.0)
    rec.p12 = row0.get(1, 0.0)
    problems = []
    try:
        diag = first_row_diagnostics(alpha, part, matrix=P)
        rec.p12_lo, rec.p12_hi = diag.bounds
    except PreconditionError as exc:
        problems.append(str(exc))
    if not rec.unique:
        problems.append("stationary distribution is not unique")
    if res.residual > tol:
        problems.append(f"residual {res.residual:.3g} above {tol:.3g}")
    rec.error = "; ".join(problems) or None
    return rec


def _workers():
    try:
        return max(1, int(os.environ.get("ULAM_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(alpha, cell_counts, partition_kind="uniform", K=1.0, seed=0, z=0.1,
              tol=1e-13, keep_pi=False):
    """One :class:`SweepRecord` per resolution, in input order.

    Failures are recorded on the record rather than raised.
    """
    cell_counts = list(cell_counts)
    if any(b <= a for a, b in zip(cell_counts, cell_counts[1:])):
        raise ValueError("cell counts must be strictly increasing")
    if not 0.0 < z <= 1.0:
        raise ValueError("z must lie in (0, 1]")

    def one(n):
        try:
            return sweep_record(alpha, n, partition_kind, K, seed, z, tol, keep_pi)
        except Exception as exc:  # recorded, not raised
            log.exception("sweep entry n=%d failed", n)
            return SweepRecord(alpha=float(alpha), n_cells=n, delta=math.nan, K=K,
                               error=f"{type(exc).__name__}: {exc}")

    workers = _workers()
    if workers == 1:
        return [one(n) for n in cell_counts]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, cell_counts))


def fit_scaling_exponent(records):
    """Least-squares fit of ``log pi1`` against ``log delta``.

    Returns ``(slope, intercept, r_squared)``.
    """
    pts = [(r.delta, r.pi1) for r in records
           if r.pi1 > 0 and r.delta > 0 and math.isfinite(r.pi1)]
    if len(pts) < 3:
        raise ValueError("need at least 3 records with positive pi1")
    x = np.log([d for d, _ in pts])
    y = np.log([p for _, p in pts])
    if np.ptp(x) < 1e-12:
        raise ValueError("delta values have no spread")
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def write_csv(rows, columns, config=None):
    """CSV text; ``config`` goes on a leading ``#`` comment line."""
    buf = io.StringIO()
    if config is not None:
        buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def sweep_csv(records, config=None):
    return write_csv((r.row() for r in records), SWEEP_COLUMNS, config)


@dataclass
class CounterexampleRecord:
    n_cells: int
    window: float
    mass_near_half: float
    pi_argmax_cell: int  # 1-based
    mass_near_zero: float
    residual: float
    unique: bool

    def to_json(self):
        return asdict(self)


COUNTEREXAMPLE_COLUMNS = tuple(f.name for f in fields(CounterexampleRecord))


def run_counterexample(cell_counts, window=1 / 24, aligned=True):
    """Window mass around the fixed point 1/2 for uniform Ulam approximations.

    With ``aligned=True`` every ``n`` must be a multiple of 12 so that the
    map's breakpoints 5/12 and 1/2 are partition breakpoints.
    """
    tmap = counterexample_map()
    if tmap(0.5) != 0.5:
        raise AssertionError("1/2 is not a fixed point of the counterexample map")
    out = []
    for n in cell_counts:
        if aligned and n % 12:
            raise ValueError(f"n={n} is not a multiple of 12 (pass aligned=False to allow)")
        part = uniform_partition(n)
        P = build_matrix(tmap, part)
        res = stationary_distribution(P)
        srb = srb_from_pi(res.pi, part)
        out.append(CounterexampleRecord(
            n_cells=n, window=float(window),
            mass_near_half=srb.mass((0.5 - window, 0.5 + window)),
            pi_argmax_cell=int(np.argmax(res.pi)) + 1,
            mass_near_zero=srb.mass((0.0, window)),
            residual=res.residual, unique=bool(res.unique)))
    return out


def counterexample_orbits(n_starts=10_000, steps=1_000, seed=0):
    """Largest distance to 1/2 after iterating random starts; orbit oracle."""
    tmap = counterexample_map()
    x = np.random.default_rng(seed).uniform(0.0, 1.0, n_starts)
    for _ in range(steps):
        x = tmap(x)
    return float(np.max(np.abs(x - 0.5)))


def counterexample_csv(records, config=None):
    return write_csv((r.to_json() for r in records), COUNTEREXAMPLE_COLUMNS, config)
