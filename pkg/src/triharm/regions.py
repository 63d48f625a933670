"""Exact rational geometry of reciprocal-exponent space.

Points are triples t = (t1, t2, t3) of reciprocals 1/p_i.  The eight regions
R0..R7 partition the parameter set of the boundedness theorem, each carrying
its own regularity threshold (a strict lower bound on s/n).  Interpolation
plans reduce a point of R0, R4..R7 to endpoints in the base regions R1/R2/R3
(or to the one-finite-exponent pattern when the reciprocal sum is 1), as
exact convex combinations that preserve the reciprocal sum.

Everything here is Fraction arithmetic; no floats.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = [
    "ThresholdError",
    "RegionError",
    "ExponentPoint",
    "classify",
    "classify_extended",
    "required_regularity",
    "regularity_from_subsets",
    "InterpPlan",
    "BaseRegion",
    "plan_interpolation",
    "verify_plan",
    "plan_to_json",
]

HALF = Fraction(1, 2)
ONE = Fraction(1)


class RegionError(ValueError):
    """Point cannot be classified or used where a region is required."""


class ThresholdError(ValueError):
    """Requested regularity does not clear the applicable threshold."""


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise RegionError(f"exact rational required, got float {x}")
    return Fraction(x)


@dataclass(frozen=True)
class ExponentPoint:
    """Reciprocal exponents t_i = 1/p_i with t_i = 0 meaning p_i = infinity."""

    t: tuple
    n: int = 1

    def __post_init__(self):
        t = tuple(_frac(x) for x in self.t)
        if len(t) != 3 or any(x < 0 for x in t):
            raise RegionError(f"need three nonnegative rationals, got {self.t}")
        if self.n < 1:
            raise RegionError(f"dimension must be >= 1, got {self.n}")
        object.__setattr__(self, "t", t)

    @property
    def reciprocal_sum(self) -> Fraction:
        """1/p = t1 + t2 + t3."""
        return sum(self.t, Fraction(0))

    def replace(self, t) -> "ExponentPoint":
        return ExponentPoint(t=tuple(t), n=self.n)


def classify(pt: ExponentPoint) -> str:
    """The unique region R0..R7 containing the point, or 'none'.

    Boundary ownership follows the strict/non-strict inequalities of the
    region definitions exactly.
    """
    t1, t2, t3 = pt.t
    ts = pt.t
    if any(x == 0 for x in ts):
        return "none"
    for i in range(3):
        others = [ts[j] for j in range(3) if j != i]
        if ts[i] >= 1 and all(0 < x < HALF for x in others):
            return f"R{i + 1}"
    if (
        all(0 < x < 1 for x in ts)
        and all(ts[i] + ts[j] < Fraction(3, 2) for i, j in ((0, 1), (1, 2), (2, 0)))
        and 1 <= pt.reciprocal_sum < 2
    ):
        return "R0"
    if 0 < t3 < HALF and t1 >= HALF and t2 >= HALF and t1 + t2 >= Fraction(3, 2):
        return "R4"
    if 0 < t1 < HALF and t2 >= HALF and t3 >= HALF and t2 + t3 >= Fraction(3, 2):
        return "R5"
    if 0 < t2 < HALF and t1 >= HALF and t3 >= HALF and t1 + t3 >= Fraction(3, 2):
        return "R6"
    if all(x >= HALF for x in ts) and pt.reciprocal_sum >= 2:
        return "R7"
    return "none"


def classify_extended(pt: ExponentPoint) -> str:
    """classify, plus the one-finite-exponent patterns P1/P2/P3 used as plan
    endpoints when 1/p = 1 (one slot carries t >= 1, the others infinity)."""
    label = classify(pt)
    if label != "none":
        return label
    for i in range(3):
        others = [pt.t[j] for j in range(3) if j != i]
        if pt.t[i] >= 1 and all(x == 0 for x in others):
            return f"P{i + 1}"
    return "none"


def regularity_from_subsets(pt: ExponentPoint) -> Fraction:
    """Threshold on s/n from the general condition: the maximum over all
    subsets J of 1/p - 1/2 - sum_{j in J}(t_j - 1/2), floored at 3/2."""
    total = pt.reciprocal_sum
    best = Fraction(3, 2)
    for mask in itertools.product((False, True), repeat=3):
        val = total - HALF - sum(
            (tj - HALF) for tj, take in zip(pt.t, mask) if take
        )
        best = max(best, val)
    return best


def required_regularity(pt: ExponentPoint) -> Fraction:
    """Per-region strict lower bound on s/n, cross-checked against the
    subset form of the general condition (the two must agree exactly)."""
    label = classify_extended(pt)
    if label == "none":
        raise RegionError(f"point {pt.t} lies in no region")
    t1, t2, t3 = pt.t
    if label == "R0":
        thr = Fraction(3, 2)
    elif label in ("R1", "R2", "R3", "P1", "P2", "P3"):
        i = int(label[1]) - 1
        thr = pt.t[i] + HALF
    elif label == "R4":
        thr = t1 + t2
    elif label == "R5":
        thr = t2 + t3
    elif label == "R6":
        thr = t3 + t1
    else:  # R7
        thr = t1 + t2 + t3 - HALF
    check = regularity_from_subsets(pt)
    if check != thr:
        raise RegionError(
            f"threshold mismatch at {pt.t}: region form {thr}, subset form {check}"
        )
    return thr


@dataclass(frozen=True)
class BaseRegion:
    """Marker result: the point already lies in a base region R1/R2/R3."""

    label: str


@dataclass(frozen=True)
class InterpPlan:
    """Convex-combination schedule reducing a target point to base-region
    endpoints at fixed s and fixed reciprocal sum."""

    target: ExponentPoint
    region: str
    s: Fraction
    endpoints: tuple  # (ExponentPoint, region label, weight)
    aux: dict = field(default_factory=dict)


def _require_threshold(pt: ExponentPoint, s: Fraction) -> Fraction:
    thr = required_regularity(pt)
    if s <= thr * pt.n:
        raise ThresholdError(
            f"s = {s} does not exceed the {classify_extended(pt)} threshold "
            f"{thr}*n = {thr * pt.n}"
        )
    return thr


def _largest_dyadic_at_most(x: Fraction, k_min: int = 2) -> Fraction:
    if x <= 0:
        raise ThresholdError("no slack left for a dyadic epsilon")
    k = k_min
    while Fraction(1, 2**k) > x:
        k += 1
    return Fraction(1, 2**k)


def _dyadic_in_interval(lo: Fraction, hi: Fraction) -> Fraction:
    """Deterministic dyadic rational strictly inside (lo, hi)."""
    if not lo < hi:
        raise ThresholdError(f"empty interval ({lo}, {hi})")
    mid = (lo + hi) / 2
    for k in range(0, 80):
        den = 2**k
        m = math.floor(mid * den)
        for mm in (m, m + 1):
            cand = Fraction(mm, den)
            if lo < cand < hi:
                return cand
    raise ThresholdError(f"no dyadic rational found in ({lo}, {hi})")


def _pair_plan(pt: ExponentPoint, s: Fraction, a: int, b: int, c: int) -> InterpPlan:
    """Plan for the pair regions: slots a, b carry the heavy pair, c stays.

    Splits 1/p_a + 1/p_b = u + 1/2 with u >= 1, nudges by the largest
    slack-halving dyadic d, and lands the two endpoints in the base regions
    of slots a and b respectively.
    """
    n = pt.n
    thr = _require_threshold(pt, s)
    u = pt.t[a] + pt.t[b] - HALF
    slack = Fraction(s, n) - thr
    d = _largest_dyadic_at_most(min(Fraction(1, 4), slack / 2))
    v = u + d
    q_recip = HALF - d

    def point_with(big_slot, small_slot):
        t = list(pt.t)
        t[big_slot] = v
        t[small_slot] = q_recip
        return pt.replace(t)

    first = point_with(a, b)
    second = point_with(b, a)
    theta = (pt.t[b] - HALF + d) / (pt.t[a] + pt.t[b] - 1 + 2 * d)
    endpoints = (
        (first, f"R{a + 1}", 1 - theta),
        (second, f"R{b + 1}", theta),
    )
    return InterpPlan(
        target=pt,
        region=classify(pt),
        s=Fraction(s),
        endpoints=endpoints,
        aux={
            "p_tilde_recip": u,
            "epsilon_recip_shift": d,
            "q_recip": q_recip,
            "theta": theta,
        },
    )


def _hexagon_plan(pt: ExponentPoint, s: Fraction) -> InterpPlan:
    """R0 with 1 < 1/p < 2: six vertices, permutations of (1, a, b)."""
    _require_threshold(pt, s)
    tau = pt.reciprocal_sum
    lo = max(Fraction(0), tau - Fraction(3, 2))
    hi = min(min(pt.t), (tau - 1) / 2)
    b = _dyadic_in_interval(lo, hi)
    a = tau - 1 - b
    verts = [
        (pt.replace((1, a, b)), "R1"),
        (pt.replace((1, b, a)), "R1"),
        (pt.replace((b, 1, a)), "R2"),
        (pt.replace((a, 1, b)), "R2"),
        (pt.replace((a, b, 1)), "R3"),
        (pt.replace((b, a, 1)), "R3"),
    ]
    weights = _hexagon_weights(pt, [v for v, _ in verts], b)
    endpoints = tuple((v, lab, w) for (v, lab), w in zip(verts, weights))
    return InterpPlan(
        target=pt,
        region="R0",
        s=Fraction(s),
        endpoints=endpoints,
        aux={"a": a, "b": b},
    )


def _hexagon_weights(pt: ExponentPoint, verts, b: Fraction) -> list:
    """Strictly positive exact weights: a uniform dyadic floor rho on all six
    vertices plus a barycentric remainder inside one fan triangle."""
    tau = pt.reciprocal_sum
    for k in range(3, 60):
        rho = Fraction(1, 2**k)
        denom = 1 - 6 * rho
        resid = [(ti - 2 * rho * tau) / denom for ti in pt.t]
        if all(b < r < 1 for r in resid):
            break
    else:
        raise ThresholdError("could not place the residual point inside the hexagon")
    # order vertices around the hexagon and fan-triangulate from vertex 0
    cx = sum(v.t[0] for v in verts) / 6
    cy = sum(v.t[1] for v in verts) / 6
    order = sorted(
        range(6), key=lambda i: math.atan2(verts[i].t[1] - cy, verts[i].t[0] - cx)
    )
    weights = [Fraction(0)] * 6
    rx, ry = resid[0], resid[1]
    placed = False
    for i in range(1, 5):
        i0, i1, i2 = order[0], order[i], order[i + 1]
        x0, y0 = verts[i0].t[0], verts[i0].t[1]
        x1, y1 = verts[i1].t[0], verts[i1].t[1]
        x2, y2 = verts[i2].t[0], verts[i2].t[1]
        det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if det == 0:
            continue
        l1 = ((rx - x0) * (y2 - y0) - (ry - y0) * (x2 - x0)) / det
        l2 = ((ry - y0) * (x1 - x0) - (rx - x0) * (y1 - y0)) / det
        l0 = 1 - l1 - l2
        if l0 >= 0 and l1 >= 0 and l2 >= 0:
            weights[i0] += l0
            weights[i1] += l1
            weights[i2] += l2
            placed = True
            break
    if not placed:
        raise ThresholdError("residual point escaped the hexagon triangulation")
    return [rho + (1 - 6 * rho) * w for w in weights]


def _unit_sum_plan(pt: ExponentPoint, s: Fraction) -> InterpPlan:
    """R0 with 1/p = 1: the three one-finite-exponent endpoints."""
    _require_threshold(pt, s)
    endpoints = []
    for i in range(3):
        t = [Fraction(0)] * 3
        t[i] = ONE
        endpoints.append((pt.replace(t), f"P{i + 1}", pt.t[i]))
    return InterpPlan(
        target=pt, region="R0", s=Fraction(s), endpoints=tuple(endpoints), aux={}
    )


def _simplex_plan(pt: ExponentPoint, s: Fraction) -> InterpPlan:
    """R7: three endpoints, each concentrating 1/p0 = 1/p - 1 on one slot."""
    n = pt.n
    thr = _require_threshold(pt, s)
    tau = pt.reciprocal_sum
    slack = Fraction(s, n) - thr
    d = _largest_dyadic_at_most(min(Fraction(1, 4), slack / 2))
    v = tau - 1 + d
    w = (tau - v) / 2
    endpoints = []
    for i in range(3):
        t = [w] * 3
        t[i] = v
        theta = (pt.t[i] - w) / (v - w)
        endpoints.append((pt.replace(t), f"R{i + 1}", theta))
    return InterpPlan(
        target=pt,
        region="R7",
        s=Fraction(s),
        endpoints=tuple(endpoints),
        aux={"p0_recip": tau - 1, "epsilon_recip_shift": d, "q_recip": w},
    )


def plan_interpolation(pt: ExponentPoint, s) -> InterpPlan | BaseRegion:
    """Constructive reduction of (t, s) to base-region estimates.

    Base-region points return a BaseRegion marker; unclassifiable points
    raise RegionError; s at or below the threshold raises ThresholdError
    naming the violated bound.
    """
    s = _frac(s)
    label = classify(pt)
    if label == "none":
        raise RegionError(f"point {pt.t} lies in no region")
    if label in ("R1", "R2", "R3"):
        _require_threshold(pt, s)
        return BaseRegion(label)
    if label == "R4":
        return _pair_plan(pt, s, 0, 1, 2)
    if label == "R5":
        return _pair_plan(pt, s, 1, 2, 0)
    if label == "R6":
        return _pair_plan(pt, s, 0, 2, 1)
    if label == "R0":
        if pt.reciprocal_sum == 1:
            return _unit_sum_plan(pt, s)
        return _hexagon_plan(pt, s)
    return _simplex_plan(pt, s)


def verify_plan(plan: InterpPlan) -> tuple:
    """Independent re-check of every plan invariant in exact arithmetic.

    Returns (ok, diagnostics); diagnostics name each violation.
    """
    bad = []
    weights = [w for _, _, w in plan.endpoints]
    if sum(weights, Fraction(0)) != 1:
        bad.append("weights do not sum to one")
    if any(not (0 < w < 1) for w in weights):
        bad.append("weight outside (0,1)")
    for axis in range(3):
        combo = sum(
            (w * ep.t[axis] for ep, _, w in plan.endpoints), Fraction(0)
        )
        if combo != plan.target.t[axis]:
            bad.append("convexity identity violated")
            break
    for ep, label, _ in plan.endpoints:
        if classify_extended(ep) != label:
            bad.append(f"endpoint region mismatch: {tuple(map(str, ep.t))} not {label}")
        if ep.reciprocal_sum != plan.target.reciprocal_sum:
            bad.append("endpoint changes the reciprocal sum")
        try:
            thr = required_regularity(ep)
            if plan.s <= thr * ep.n:
                bad.append(f"endpoint threshold violated at {label}")
        except RegionError:
            bad.append(f"endpoint unclassifiable: {tuple(map(str, ep.t))}")
    return (not bad, bad)


def plan_to_json(plan: InterpPlan) -> str:
    def frac_str(x: Fraction) -> str:
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)

    return json.dumps(
        {
            "target": [frac_str(x) for x in plan.target.t],
            "n": plan.target.n,
            "region": plan.region,
            "s": frac_str(plan.s),
            "endpoints": [
                {
                    "t": [frac_str(x) for x in ep.t],
                    "region": label,
                    "weight": frac_str(w),
                }
                for ep, label, w in plan.endpoints
            ],
            "aux": {k: frac_str(v) for k, v in plan.aux.items()},
        },
        indent=2,
    )
