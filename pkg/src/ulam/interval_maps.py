"""Piecewise-monotone maps of [0, 1] and their branch-wise inverses.

A map is an ordered tuple of :class:`Branch` objects. Each branch owns the
half-open domain ``[a, b)``; the last branch also owns ``x = 1``.
"""

from dataclasses import dataclass, field
import json
import math

import numpy as np

from ._rootfind import ABS_TOL, bisect_monotone, bisect_root


class PreconditionError(ValueError):
    """Raised when an operation's stated precondition does not hold."""


@dataclass(frozen=True)
class Branch:
    """One monotone piece of an interval map.

    ``kind`` and ``coefficients`` describe the forward formula:

    * ``"affine"``: ``c0 + c1*x``
    * ``"power"``:  ``c0 + c1*x + c2*x**p`` with coefficients ``[c0, c1, c2, p]``
    """

    domain: tuple
    kind: str
    coefficients: tuple
    increasing: bool = field(init=False)
    image: tuple = field(init=False)

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        if not 0.0 <= a < b <= 1.0:
            raise ValueError(f"bad branch domain {self.domain}")
        object.__setattr__(self, "domain", (a, b))
        coeffs = tuple(float(c) for c in self.coefficients)
        expected = {"affine": 2, "power": 4}
        if self.kind not in expected:
            raise ValueError(f"unknown branch kind {self.kind!r}")
        if len(coeffs) != expected[self.kind]:
            raise ValueError(f"{self.kind} branch needs {expected[self.kind]} coefficients")
        object.__setattr__(self, "coefficients", coeffs)
        fa, fb = float(self.forward(a)), float(self.forward(b))
        if fa == fb:
            raise ValueError("branch is not strictly monotone")
        object.__setattr__(self, "increasing", fb > fa)
        object.__setattr__(self, "image", (min(fa, fb), max(fa, fb)))

    def forward(self, x):
        c = self.coefficients
        if self.kind == "affine":
            return c[0] + c[1] * x
        return c[0] + c[1] * x + c[2] * np.power(x, c[3])

    def inverse(self, y, tol=ABS_TOL):
        """Preimage of ``y`` (clamped to the image) inside the domain.

        Image endpoints map to domain endpoints exactly, so preimages of a
        tiling of the image tile the domain without gaps.
        """
        scalar = np.ndim(y) == 0
        y = np.clip(np.atleast_1d(np.asarray(y, dtype=float)), *self.image)
        a, b = self.domain
        if self.kind == "affine":
            c0, c1 = self.coefficients
            x = np.clip((y - c0) / c1, a, b)
        else:
            x = bisect_monotone(self.forward, y, a, b, self.increasing, tol=tol)
        lo_end, hi_end = (a, b) if self.increasing else (b, a)
        x = np.where(y == self.image[0], lo_end, x)
        x = np.where(y == self.image[1], hi_end, x)
        return float(x[0]) if scalar else x

    def contains(self, y, collar=ABS_TOL):
        # collar absorbs rounding of forward() at the domain endpoints
        return self.image[0] - collar <= y <= self.image[1] + collar

    def to_json(self):
        return {"domain": list(self.domain), "kind": self.kind,
                "coefficients": list(self.coefficients)}


@dataclass(frozen=True)
class IntervalMap:
    branches: tuple
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        branches = tuple(self.branches)
        if not branches:
            raise ValueError("a map needs at least one branch")
        if branches[0].domain[0] != 0.0 or branches[-1].domain[1] != 1.0:
            raise ValueError("branch domains must cover [0, 1]")
        for left, right in zip(branches, branches[1:]):
            if left.domain[1] != right.domain[0]:
                raise ValueError("branch domains must be contiguous and ordered")
        object.__setattr__(self, "branches", branches)

    @property
    def starts(self):
        return np.array([br.domain[0] for br in self.branches])

    def branch_of(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any((x_arr < 0.0) | (x_arr > 1.0)) or np.any(np.isnan(x_arr)):
            raise ValueError(f"point outside [0, 1]: {x}")
        idx = np.searchsorted(self.starts, x_arr, side="right") - 1
        return int(idx) if idx.ndim == 0 else idx

    def __call__(self, x):
        idx = self.branch_of(x)
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 0:
            return float(self.branches[idx].forward(x_arr))
        out = np.empty_like(x_arr)
        for k, br in enumerate(self.branches):
            mask = idx == k
            out[mask] = br.forward(x_arr[mask])
        return out

    def to_json(self):
        return {"name": self.name, "params": dict(self.params),
                "branches": [br.to_json() for br in self.branches]}


def evaluate(tmap, x):
    """Forward value of the branch owning ``x``."""
    return tmap(x)


def mp_constant(alpha):
    """Right endpoint of the first branch: the root of ``c + c**(1+alpha) = 1``."""
    return bisect_root(lambda c: c + c ** (1.0 + alpha) - 1.0, 0.0, 1.0)


def mp_map(alpha):
    """Manneville-Pomeau map ``x + x**(1+alpha) (mod 1)``."""
    if not alpha >= 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    alpha = float(alpha)
    c = mp_constant(alpha)
    if alpha == 0.0:
        b1 = Branch((0.0, 0.5), "affine", (0.0, 2.0))
        b2 = Branch((0.5, 1.0), "affine", (-1.0, 2.0))
    else:
        b1 = Branch((0.0, c), "power", (0.0, 1.0, 1.0, 1.0 + alpha))
        b2 = Branch((c, 1.0), "power", (-1.0, 1.0, 1.0, 1.0 + alpha))
        # the mod-1 images are exactly [0, 1]; don't inherit rounding at c
        object.__setattr__(b1, "image", (0.0, 1.0))
        object.__setattr__(b2, "image", (0.0, 1.0))
    return IntervalMap((b1, b2), name="mp", params={"alpha": alpha, "c_alpha": c})


def counterexample_map():
    """Uniquely ergodic map whose uniform Ulam approximations misbehave."""
    return IntervalMap(
        (
            Branch((0.0, 5 / 12), "affine", (0.5, 0.25)),
            Branch((5 / 12, 0.5), "affine", (1.0, -2.0)),
            Branch((0.5, 1.0), "affine", (0.25, 0.5)),
        ),
        name="counterexample",
    )


def identity_map():
    return IntervalMap((Branch((0.0, 1.0), "affine", (0.0, 1.0)),), name="identity")


def map_from_json(data):
    """Build a map from ``{"branches": [{domain, kind, coefficients}, ...]}``.

    A bare list of branch records is accepted as well.
    """
    if isinstance(data, list):
        data = {"branches": data}
    branches = [Branch(tuple(b["domain"]), b["kind"], tuple(b["coefficients"]))
                for b in data["branches"]]
    return IntervalMap(tuple(branches), name=data.get("name", "custom"),
                       params=dict(data.get("params", {})))


def load_map(path):
    with open(path) as fh:
        return map_from_json(json.load(fh))


def branch_preimage(tmap, branch_index, y, tol=ABS_TOL):
    """Unique ``x`` in the branch domain with ``forward(x) = y``, or ``None``."""
    br = tmap.branches[branch_index]
    if not br.contains(y):
        return None
    return br.inverse(float(y), tol=tol)


def preimage_of_interval(tmap, branch_index, target, tol=ABS_TOL):
    """``{x in domain : forward(x) in target}`` as ``(lo, hi)``, or ``None``.

    Returns ``None`` when the target misses the branch image or touches it
    in a single point.
    """
    br = tmap.branches[branch_index]
    t_lo, t_hi = (float(v) for v in target)
    lo = max(t_lo, br.image[0])
    hi = min(t_hi, br.image[1])
    if hi <= lo:
        return None
    x_lo, x_hi = br.inverse(np.array([lo, hi]), tol=tol)
    if not br.increasing:
        x_lo, x_hi = x_hi, x_lo
    return float(x_lo), float(x_hi)


def max_slope(tmap, samples=1025):
    """Largest sampled difference quotient over all branches."""
    best = 0.0
    for br in tmap.branches:
        x = np.linspace(*br.domain, samples)
        best = max(best, float(np.max(np.abs(np.diff(br.forward(x)) / np.diff(x)))))
    return best


@dataclass
class FamilyReport:
    is_piecewise_convex: list
    origin_in_each_image: list
    is_increasing: list
    noncontracting: bool = True
    branch_count_bound: int = 0
    local_exponent_fit: tuple = (math.nan, math.nan)
    local_form_ok: bool = True
    violations: list = field(default_factory=list)

    @property
    def in_family_T(self):
        return (all(self.is_piecewise_convex) and all(self.origin_in_each_image)
                and all(self.is_increasing))

    @property
    def passed(self):
        return self.in_family_T and self.noncontracting and self.local_form_ok


def verify_family_T(tmap, samples=1025):
    """Sample-based check of branch convexity and ``0 in T(X_i)``."""
    if samples < 3:
        raise ValueError("need at least 3 samples per branch")
    convex, origin, increasing, witnesses = [], [], [], []
    for k, br in enumerate(tmap.branches):
        x = np.linspace(*br.domain, samples)
        second = np.diff(br.forward(x), 2)
        bad = np.flatnonzero(second < -1e-12)
        convex.append(bad.size == 0)
        if bad.size:
            witnesses.append({"check": "convex", "branch": k, "x": float(x[bad[0] + 1]),
                              "second_difference": float(second[bad[0]])})
        has_origin = br.image[0] <= 1e-15
        origin.append(has_origin)
        if not has_origin:
            witnesses.append({"check": "origin_in_image", "branch": k,
                              "image": list(br.image)})
        increasing.append(br.increasing)
        if not br.increasing:
            witnesses.append({"check": "increasing", "branch": k, "x": br.domain[0]})
    return FamilyReport(convex, origin, increasing,
                        branch_count_bound=len(tmap.branches), violations=witnesses)


def fit_local_form(tmap, alpha, k_range=range(10, 41)):
    """Estimate ``C`` in ``T(x) = x + C x**(1+alpha) + o(...)`` near 0.

    Evaluates ``(T(x) - x) / x**(1+alpha)`` on ``x = 2**-k``. Scales where
    the increment drowns in rounding of ``x`` are skipped. Returns
    ``(C_estimate, ratios, xs)``.
    """
    br = tmap.branches[0]
    xs, ratios = [], []
    for k in k_range:
        x = 2.0 ** -k
        if x >= br.domain[1]:
            continue
        inc = float(br.forward(x)) - x
        if abs(inc) < 2.0 ** -30 * x:
            continue
        xs.append(x)
        ratios.append(inc / x ** (1.0 + alpha))
    if not ratios:
        return math.nan, np.array([]), np.array([])
    ratios = np.array(ratios)
    return float(np.median(ratios[-5:])), ratios, np.array(xs)


def verify_theorem4_conditions(tmap, alpha, C, samples=1025, strict=True):
    """Check the local form, noncontraction and finite-preimage conditions.

    With ``strict=True`` a map outside the piecewise-convex family raises
    :class:`PreconditionError`; with ``strict=False`` the remaining checks
    run anyway and the family failures stay in the report.
    """
    report = verify_family_T(tmap, samples)
    if strict and not report.in_family_T:
        raise PreconditionError(f"map {tmap.name!r} is not in the convex family: "
                                f"{report.violations}")
    for k, br in enumerate(tmap.branches):
        x = np.linspace(*br.domain, samples)
        q = np.abs(np.diff(br.forward(x)) / np.diff(x))
        bad = np.flatnonzero(q < 1.0 - 1e-10)
        if bad.size:
            report.noncontracting = False
            report.violations.append({"check": "noncontracting", "branch": k,
                                      "x": float(x[bad[0]]), "slope": float(q[bad[0]])})
    report.branch_count_bound = len(tmap.branches)

    c_fit, ratios, xs = fit_local_form(tmap, alpha)
    report.local_exponent_fit = (c_fit, float(alpha))
    tail = ratios[-5:]
    ok = (ratios.size > 0 and C > 0
          and bool(np.all(np.abs(tail - C) / C < 1e-3)))
    report.local_form_ok = ok
    if not ok:
        report.violations.append({"check": "local_form", "C_fit": c_fit, "C": C,
                                  "x": float(xs[-1]) if xs.size else None})
    return report
