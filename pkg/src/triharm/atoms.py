"""Generation and certification of Hardy-space atoms, with the numerical
decay checks of the filtered-atom estimates.

Atoms are generated, never extracted from arbitrary functions: a seeded
random smooth field supported strictly inside the cube is projected against
the polynomial space of degree <= M in the discrete L^2(Q) inner product
(killing all moments up to order M exactly at quadrature level) and rescaled
to half the allowed sup bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DomainError, GridFunction, GridSpec, lp_norm, moment
from .lp_frame import LPFamily
from .maximal import DyadicCube, cube_slices

__all__ = [
    "Atom",
    "default_moment_order",
    "make_atom",
    "validate_atom",
    "DecayReport",
    "decay_profile_check",
    "cancellation_constants",
]

DILATE_BASE = 10.0  # Q* side = 10 sqrt(n) l(Q), Q** and Q*** its powers


@dataclass(frozen=True)
class Atom:
    """Grid function certified as an H^p atom on a dyadic cube."""

    f: GridFunction
    cube: DyadicCube
    p: float
    moment_order: int
    seed: int

    @property
    def spec(self) -> GridSpec:
        return self.f.spec

    def dilate_factor(self, k: int) -> float:
        n = self.spec.dim
        return (DILATE_BASE * math.sqrt(n)) ** k

    def dilate_mask(self, k: int) -> np.ndarray:
        """Indicator of the concentric dilate Q^(*k) on the grid (clipped to
        the box)."""
        side = self.cube.side * self.dilate_factor(k)
        center = self.cube.center()
        grids = self.spec.point_grids()
        mask = np.ones(self.spec.shape, dtype=bool)
        for g, c in zip(grids, center):
            mask &= np.abs(g - c) <= side / 2.0
        return mask

    def sup_bound(self) -> float:
        return self.cube.volume ** (-1.0 / self.p)


def default_moment_order(dim: int, p: float) -> int:
    """[n/p - n]_+ plus headroom of 2."""
    return max(math.floor(dim / p - dim + 1e-12), 0) + 2


def _poly_basis(coords, max_order: int) -> np.ndarray:
    """Columns x^gamma, |gamma| <= max_order, on scaled cube coordinates."""
    dim = len(coords)
    cols = []
    if dim == 1:
        for a in range(max_order + 1):
            cols.append(coords[0] ** a)
    else:
        for a in range(max_order + 1):
            for b in range(max_order + 1 - a):
                cols.append(coords[0] ** a * coords[1] ** b)
    return np.stack(cols, axis=-1)


def make_atom(
    spec: GridSpec,
    cube: DyadicCube,
    p: float,
    moment_order: int | None = None,
    seed: int = 0,
    max_retries: int = 8,
) -> Atom:
    """Random H^p atom supported strictly inside `cube`.

    Rejects cubes with fewer than 16 samples per axis and moment orders
    above 6; retries with successive seeds if the projection annihilates
    the random draw.
    """
    if not (0 < p <= 1):
        raise DomainError(f"p must be in (0, 1], got {p}")
    M = default_moment_order(spec.dim, p) if moment_order is None else int(moment_order)
    min_m = max(math.floor(spec.dim / p - spec.dim + 1e-12), 0)
    if M < min_m:
        raise DomainError(f"moment order {M} below required [n/p - n]_+ = {min_m}")
    if M > 6:
        raise DomainError(f"moment order {M} above supported maximum 6")
    sl = cube_slices(spec, cube)
    b = sl[0].stop - sl[0].start
    if b < 16:
        raise DomainError(f"cube holds {b} samples per axis, need >= 16")

    center = cube.center()
    grids = spec.point_grids()
    local = [
        (g[sl] - c) / (cube.side / 2.0) for g, c in zip(grids, center)
    ]  # cube coords in [-1, 1)
    window = np.ones(local[0].shape)
    for u in local:
        inside = np.abs(u) < 1.0
        w = np.zeros_like(u)
        w[inside] = np.exp(-0.1 / (1.0 - u[inside] ** 2))
        window = window * w

    basis = _poly_basis(local, M)
    flat_basis = basis.reshape(-1, basis.shape[-1])
    qmat, _ = np.linalg.qr(flat_basis)

    for attempt in range(max_retries):
        rng = np.random.default_rng(seed + attempt)
        modes = np.zeros(local[0].shape)
        for _ in range(6):
            freq = rng.uniform(0.5, 3.0, size=spec.dim)
            phase = rng.uniform(0, 2 * np.pi, size=spec.dim)
            amp = rng.normal()
            term = amp * np.ones(local[0].shape)
            for u, fr, ph in zip(local, freq, phase):
                term = term * np.cos(np.pi * fr * u + ph)
            modes += term
        raw = (window * modes).ravel()
        raw = raw - qmat @ (qmat.T @ raw)
        peak = np.max(np.abs(raw))
        if peak > 1e-8 * np.max(np.abs(window)):
            vals = np.zeros(spec.shape, dtype=np.complex128)
            vals[sl] = raw.reshape(local[0].shape)
            vals *= cube.volume ** (-1.0 / p) / (2.0 * peak)
            return Atom(
                f=GridFunction(spec, vals),
                cube=cube,
                p=p,
                moment_order=M,
                seed=seed + attempt,
            )
    raise DomainError(f"projection annihilated {max_retries} random draws")


def validate_atom(atom: Atom, moment_tol: float = 1e-10) -> dict:
    """Certify support, size and vanishing moments; returns the check map."""
    spec = atom.spec
    sl = cube_slices(spec, atom.cube)
    outside = np.ones(spec.shape, dtype=bool)
    outside[sl] = False
    support_ok = bool(np.all(atom.f.values[outside] == 0))
    sup = float(np.max(np.abs(atom.f.values)))
    size_ok = sup <= atom.sup_bound() * (1 + 1e-12)

    mass = lp_norm(atom.f, 1)
    corner_scale = max(1.0, max(abs(c) for c in atom.cube.corner) + atom.cube.side)
    residuals = {}
    ok = True
    if spec.dim == 1:
        indices = [(a,) for a in range(atom.moment_order + 1)]
    else:
        indices = [
            (a, b)
            for a in range(atom.moment_order + 1)
            for b in range(atom.moment_order + 1 - a)
        ]
    for alpha in indices:
        resid = abs(moment(atom.f, alpha)) / (mass * corner_scale ** sum(alpha))
        residuals[alpha] = resid
        ok = ok and resid <= moment_tol
    return {
        "support": support_ok,
        "size": size_ok,
        "moments": ok,
        "moment_residuals": residuals,
        "sup": sup,
        "passed": support_ok and size_ok and ok,
    }


@dataclass
class DecayReport:
    """Per-level ratios of filtered-atom magnitudes to the predicted bound."""

    pointwise_lambda: dict  # j -> ratio
    pointwise_gamma: dict
    lr_lambda: dict  # (j, r) -> ratio
    lr_gamma: dict

    def spread(self, table: str = "pointwise_lambda") -> float:
        vals = [v for v in getattr(self, table).values() if v > 0]
        if not vals:
            return 1.0
        return max(vals) / min(vals)

    def max_ratio(self) -> float:
        tables = (self.pointwise_lambda, self.pointwise_gamma, self.lr_lambda, self.lr_gamma)
        return max(max(t.values(), default=0.0) for t in tables)


def _pointwise_bound(atom: Atom, j: int, l0: float) -> np.ndarray:
    spec = atom.spec
    n = spec.dim
    ell = atom.cube.side
    size = ell ** (-n / atom.p) * min(1.0, (2.0**j * ell) ** (atom.moment_order + n + 1))
    star = atom.dilate_mask(1)
    grids = spec.point_grids()
    r2 = sum((g - c) ** 2 for g, c in zip(grids, atom.cube.corner))
    bracket = 1.0 + 4.0 * np.pi**2 * 4.0**j * r2
    return size * (star + (~star) * bracket ** (-l0 / 2.0))


def decay_profile_check(fam: LPFamily, atom: Atom, l0: float = 4.0) -> DecayReport:
    """Sweep the family levels and compare |Lambda_j a|, |Gamma_j a| and
    their L^r norms (r in {1, 2, inf}) to the predicted size/decay bounds.
    Levels where the filtered atom vanishes report ratio 0."""
    if not (2.0 <= l0 <= 8.0):
        raise DomainError(f"decay exponent must be in [2, 8], got {l0}")
    n = atom.spec.dim
    ell = atom.cube.side
    M = atom.moment_order
    pw_l, pw_g, lr_l, lr_g = {}, {}, {}, {}
    for j in fam.j_range:
        bound = _pointwise_bound(atom, j, l0)
        for kind, store_pw, store_lr in (
            ("psi", pw_l, lr_l),
            ("theta", pw_g, lr_g),
        ):
            prof = fam.psi_hat(j) if kind == "psi" else fam.theta_hat(j)
            filt = fam.apply_profile(atom.f, prof)
            mag = np.abs(filt.values)
            if np.max(mag) == 0.0:
                store_pw[j] = 0.0
            else:
                store_pw[j] = float(np.max(mag / bound))
            for r in (1.0, 2.0, np.inf):
                rr = n / r if np.isfinite(r) else 0.0
                rhs = ell ** (-n / atom.p + rr) * min(
                    1.0, (2.0**j * ell) ** (M + n - rr + 1)
                )
                store_lr[(j, r)] = float(lp_norm(filt, r) / rhs)
    return DecayReport(
        pointwise_lambda=pw_l, pointwise_gamma=pw_g, lr_lambda=lr_l, lr_gamma=lr_g
    )


def cancellation_constants(profile, atom: Atom, eps_list=(0.0, 0.5, 1.0)) -> dict:
    """Fitted constants in the moment-cancellation convolution bound
    sup_x |phi_l * a| <= C_eps 2^(l(M+n+eps)) int |y - x_Q|^(M+eps) |a| dy,
    maximized over the profile's resolvable dilations."""
    from .grid import convolve

    spec = atom.spec
    n = spec.dim
    M = atom.moment_order
    grids = spec.point_grids()
    dist = np.sqrt(sum((g - c) ** 2 for g, c in zip(grids, atom.cube.corner)))
    out = {}
    for eps in eps_list:
        wmoment = float(
            spec.spacing**n * np.sum(dist ** (M + eps) * np.abs(atom.f.values))
        )
        worst = 0.0
        for l in profile.l_range:
            sup = float(np.max(np.abs(convolve(atom.f, profile.kernel(l)).values)))
            denom = 2.0 ** (l * (M + n + eps)) * wmoment
            worst = max(worst, sup / denom)
        out[eps] = worst
    return out
