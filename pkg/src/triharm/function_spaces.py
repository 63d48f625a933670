"""Hardy quasi-norm estimators and their cross-characterization diagnostics.

Three estimators are provided: the smooth maximal function sup_l |phi_l * f|,
the annular square function, and the low-pass sup function.  On the whole
space they define equivalent quasi-norms; here every sup/sum is truncated to
the grid-resolvable range, so the estimators agree up to moderate constants
probed by hardy_equivalence_report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    DomainError,
    GridFunction,
    GridSpec,
    convolve,
    lp_norm,
    require_margin_decay,
)
from .lp_frame import LPFamily

__all__ = [
    "HardyProfile",
    "build_hardy_profile",
    "sequence_lpq_norm",
    "hardy_norm",
    "EquivalenceReport",
    "hardy_equivalence_report",
]


def _bump(u: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(-1/(1-u^2)) on |u| < 1, zero outside."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class HardyProfile:
    """Smooth kernel phi with supp in {|x| <= 1} and unit mass, plus the
    resolvable dilation range for phi_l = 2^(l n) phi(2^l .).

    Each sampled dilate is renormalized to unit discrete mass, so the
    maximal estimator sees a true approximate identity at every scale.
    """

    spec: GridSpec
    l_min: int
    l_max: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def l_range(self) -> range:
        return range(self.l_min, self.l_max + 1)

    def kernel(self, l: int) -> GridFunction:
        if l not in self.l_range:
            raise DomainError(f"dilation {l} outside resolvable [{self.l_min}, {self.l_max}]")
        if l not in self._cache:
            scale = 2.0**l
            grids = self.spec.point_grids()
            r = np.sqrt(sum((scale * g) ** 2 for g in grids))
            vals = scale**self.spec.dim * _bump(r)
            mass = vals.sum() * self.spec.spacing**self.spec.dim
            self._cache[l] = GridFunction(self.spec, vals / mass)
        return self._cache[l]


def build_hardy_profile(spec: GridSpec) -> HardyProfile:
    """Resolvable dilations: support radius 2^-l at least 4h (8 samples
    across) and at most L/4 (fits the box with room)."""
    l_max = math.floor(math.log2(1.0 / (4.0 * spec.spacing)))
    l_min = math.ceil(math.log2(4.0 / spec.length))
    if l_max < l_min:
        raise DomainError("grid cannot resolve any kernel dilation")
    return HardyProfile(spec=spec, l_min=l_min, l_max=l_max)


def sequence_lpq_norm(fs, p, q) -> float:
    """|| {f_j} ||_{L^p(l^q)} for a finite family of grid functions."""
    fs = list(fs)
    if not fs:
        return 0.0
    stack = np.stack([np.abs(f.values) for f in fs])
    if q == np.inf or q == "inf":
        g = stack.max(axis=0)
    else:
        q = float(q)
        if q <= 0:
            raise DomainError(f"q must be positive, got {q}")
        g = (stack**q).sum(axis=0) ** (1.0 / q)
    return lp_norm(GridFunction(fs[0].spec, g), p)


def hardy_norm(
    f: GridFunction,
    p: float,
    method: str = "maximal",
    profile: HardyProfile | None = None,
    fam: LPFamily | None = None,
    margin_tol: float | None = 1e-8,
) -> float:
    """Hardy quasi-norm estimator.

    method 'maximal' uses || sup_l |phi_l * f| ||_p, 'square' the
    L^p(l^2) norm of the annular pieces, 'gamma_sup' the L^p(l^inf) norm of
    the low-pass pieces.  Ranges are truncated to the resolvable scales.
    """
    if not (p > 0):
        raise DomainError(f"p must be positive, got {p}")
    if margin_tol is not None:
        require_margin_decay(f, margin_tol)
    if method == "maximal":
        if profile is None:
            profile = build_hardy_profile(f.spec)
        best = np.zeros(f.spec.shape)
        for l in profile.l_range:
            np.maximum(best, np.abs(convolve(f, profile.kernel(l)).values), out=best)
        return lp_norm(GridFunction(f.spec, best), p)
    if fam is None:
        raise DomainError(f"method {method!r} needs a Littlewood-Paley family")
    if method == "square":
        if not np.isfinite(p):
            raise DomainError("square-function norm requires p < inf")
        pieces = [fam.apply_profile(f, fam.psi_hat(j)) for j in fam.j_range]
        return sequence_lpq_norm(pieces, p, 2)
    if method == "gamma_sup":
        pieces = [fam.apply_profile(f, fam.theta_hat(j)) for j in fam.j_range]
        return sequence_lpq_norm(pieces, p, np.inf)
    raise DomainError(f"unknown method {method!r}")


@dataclass
class EquivalenceReport:
    rows: list  # (function_id, p, method, value)
    spreads: dict  # p -> max over corpus of (max method val / min method val)

    def to_csv(self) -> str:
        lines = ["function_id,p,method,value"]
        for fid, p, method, value in self.rows:
            lines.append(f"{fid},{p:.6g},{method},{value:.10g}")
        return "\n".join(lines) + "\n"

    def max_spread(self) -> float:
        return max(self.spreads.values()) if self.spreads else 1.0


def hardy_equivalence_report(
    corpus,
    ps=(0.5, 1.0, 2.0),
    profile: HardyProfile | None = None,
    fam: LPFamily | None = None,
    margin_tol: float | None = 1e-8,
) -> EquivalenceReport:
    """Evaluate all three estimators on each corpus element and report the
    worst pairwise ratio per exponent; zero functions are reported but
    skipped in the spread."""
    methods = ("maximal", "square", "gamma_sup")
    rows = []
    spreads = {}
    for p in ps:
        worst = 1.0
        for fid, f in enumerate(corpus):
            vals = []
            for method in methods:
                v = hardy_norm(
                    f, p, method, profile=profile, fam=fam, margin_tol=margin_tol
                )
                rows.append((fid, p, method, v))
                vals.append(v)
            if min(vals) > 0:
                worst = max(worst, max(vals) / min(vals))
        spreads[p] = worst
    return EquivalenceReport(rows=rows, spreads=spreads)
