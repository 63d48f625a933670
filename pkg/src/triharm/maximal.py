"""Hardy-Littlewood and shifted dyadic maximal operators over grid cubes.

The supremum in every operator ranges over grid-aligned dyadic cubes only
(sides h, 2h, ..., L/2 tiling the box), which matches the full maximal
function up to a dimensional constant.  Cubes are half-open with the lower
left corner convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DomainError, GridFunction, GridSpec, lp_norm

__all__ = [
    "DyadicCube",
    "grid_levels",
    "cube_slices",
    "hl_max",
    "shifted_dyadic_max",
    "GrowthReport",
    "log_growth_check",
]


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of side 2^-level with lower-left corner 2^-level * pos."""

    level: int
    pos: tuple

    def __post_init__(self):
        object.__setattr__(self, "pos", tuple(int(m) for m in self.pos))

    @property
    def side(self) -> float:
        return 2.0**-self.level

    @property
    def corner(self) -> tuple:
        return tuple(m * self.side for m in self.pos)

    @property
    def volume(self) -> float:
        return self.side ** len(self.pos)

    def shifted(self, shift) -> "DyadicCube":
        """Q(m) = Q + side * m."""
        return DyadicCube(self.level, tuple(p + int(s) for p, s in zip(self.pos, shift)))

    def center(self) -> tuple:
        return tuple(c + self.side / 2.0 for c in self.corner)


def grid_levels(spec: GridSpec) -> list:
    """Dyadic levels whose cubes are grid aligned and fit in the box:
    side between h and L/2."""
    k_h = round(math.log2(spec.spacing))
    k_top = round(math.log2(spec.length / 2.0))
    return list(range(-k_top, -k_h + 1))


def cube_slices(spec: GridSpec, cube: DyadicCube) -> tuple:
    """Index slices selecting the cube's samples; rejects unaligned cubes."""
    ratio = cube.side / spec.spacing
    b = round(ratio)
    if b < 1 or b != ratio:
        raise DomainError(f"cube side {cube.side} not aligned to spacing {spec.spacing}")
    out = []
    for c in cube.corner:
        start = (c + spec.length / 2.0) / spec.spacing
        i0 = round(start)
        if i0 != start or i0 < 0 or i0 + b > spec.n:
            raise DomainError(f"cube corner {cube.corner} outside the box grid")
        out.append(slice(i0, i0 + b))
    return tuple(out)


def _block_means(vals: np.ndarray, b: int, dim: int) -> np.ndarray:
    """Means over the tiling by cubes of b samples per axis, broadcast back."""
    n = vals.shape[0]
    if dim == 1:
        m = vals.reshape(n // b, b).mean(axis=1)
        return np.repeat(m, b)
    m = vals.reshape(n // b, b, n // b, b).mean(axis=(1, 3))
    return np.repeat(np.repeat(m, b, axis=0), b, axis=1)


def hl_max(f: GridFunction, r: float = 1.0) -> GridFunction:
    """M_r f = (M(|f|^r))^(1/r) over grid-aligned dyadic cubes."""
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    spec = f.spec
    vals = np.abs(f.values) ** r
    best = np.zeros_like(vals)
    b = 1
    while b <= spec.n // 2:
        np.maximum(best, _block_means(vals, b, spec.dim), out=best)
        b *= 2
    return GridFunction(spec, best ** (1.0 / r))


def shifted_dyadic_max(f: GridFunction, shift) -> GridFunction:
    """sup over dyadic cubes Q containing x of the mean of |f| over Q(shift),
    restricted to levels where the shifted cube stays inside the box.

    Points for which no level is admissible contribute 0; if no level is
    admissible anywhere the shift is rejected.
    """
    spec = f.spec
    shift = tuple(int(s) for s in np.atleast_1d(shift))
    if len(shift) != spec.dim:
        raise DomainError(f"shift {shift} has wrong dimension for dim={spec.dim}")
    vals = np.abs(f.values)
    best = np.zeros_like(vals)
    any_admissible = False
    b = 1
    while b <= spec.n // 2:
        ncubes = spec.n // b
        means = vals.reshape((ncubes, b) * spec.dim if spec.dim == 1 else (ncubes, b, ncubes, b))
        if spec.dim == 1:
            means = means.mean(axis=1)
        else:
            means = means.mean(axis=(1, 3))
        idx = [np.arange(ncubes) + s for s in shift]
        ok = [(ix >= 0) & (ix < ncubes) for ix in idx]
        if all(o.any() for o in ok):
            any_admissible = True
            if spec.dim == 1:
                got = np.zeros(ncubes)
                got[ok[0]] = means[idx[0][ok[0]]]
                contrib = np.where(ok[0], got, 0.0)
                contrib = np.repeat(contrib, b)
                mask = np.repeat(ok[0], b)
            else:
                got = np.zeros((ncubes, ncubes))
                okg = np.outer(ok[0], ok[1])
                ii = np.clip(idx[0], 0, ncubes - 1)
                jj = np.clip(idx[1], 0, ncubes - 1)
                got = means[np.ix_(ii, jj)] * okg
                contrib = np.repeat(np.repeat(got, b, axis=0), b, axis=1)
                mask = np.repeat(np.repeat(okg, b, axis=0), b, axis=1)
            np.maximum(best, np.where(mask, contrib, 0.0), out=best)
        b *= 2
    if not any_admissible:
        raise DomainError(f"shift {shift} leaves no admissible level in the box")
    return GridFunction(spec, best)


@dataclass
class GrowthReport:
    """Norm-growth table for the shifted dyadic maximal operator."""

    p: float
    rows: list  # (shift_norm, p, ratio, fitted_bound)
    fitted_c: float

    def to_csv(self) -> str:
        lines = ["shift_norm,p,ratio,fitted_bound"]
        for shift_norm, p, ratio, bound in self.rows:
            lines.append(f"{shift_norm:.6g},{p:.6g},{ratio:.10g},{bound:.10g}")
        return "\n".join(lines) + "\n"


def log_growth_check(p: float, shifts, corpus) -> GrowthReport:
    """Ratios ||M_dyad^m f||_p / ||f||_p against (log(10+|m|))^(n/p).

    fitted_c is the smallest constant making
    ratio <= fitted_c * (log(10+|m|))^(n/p) hold over the whole corpus.
    """
    if p <= 1:
        raise DomainError(f"log growth check needs p > 1, got {p}")
    rows = []
    fitted_c = 0.0
    for shift in shifts:
        shift = tuple(int(s) for s in np.atleast_1d(shift))
        mag = float(np.linalg.norm(shift))
        worst = 0.0
        dim = None
        for f in corpus:
            dim = f.spec.dim
            denom = lp_norm(f, p)
            if denom == 0.0:
                continue
            ratio = lp_norm(shifted_dyadic_max(f, shift), p) / denom
            worst = max(worst, ratio)
        envelope = math.log(10.0 + mag) ** (dim / p)
        rows.append((mag, p, worst, envelope))
        fitted_c = max(fitted_c, worst / envelope)
    return GrowthReport(p=p, rows=rows, fitted_c=fitted_c)
