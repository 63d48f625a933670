"""Frame analysis/synthesis over dyadic cubes and the f^{p,q} sequence norms.

A level-j annular piece is analyzed by pairing with translates of the tilde
kernel over a corner lattice of dyadic cubes.  The cube side for level j is
2^(-j-3): the sampling period in frequency is then 2^(j+3), which clears the
combined radius of the synthesis window (2^(j+1)) and the analyzed data
(2^(j+2)), so synthesis after analysis reproduces Lambda_j f and Gamma_j f
exactly on the lattice rather than approximately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    DomainError,
    GridFunction,
    SpectralFunction,
    forward_transform,
    inverse_transform,
    lp_norm,
)
from .lp_frame import LPFamily
from .maximal import DyadicCube

__all__ = [
    "CUBE_OFFSET",
    "CoeffSeq",
    "analyzable_levels",
    "cube_level_for",
    "analyze",
    "synthesize",
    "fpq_norm",
    "coeffs_to_json",
    "coeffs_from_json",
]

CUBE_OFFSET = 3


@dataclass
class CoeffSeq:
    """Map from dyadic cubes to complex frame coefficients b_Q."""

    spec: object
    entries: dict = field(default_factory=dict)

    def levels(self) -> list:
        return sorted({q.level for q in self.entries})

    def __len__(self) -> int:
        return len(self.entries)

    def scaled(self, c: complex) -> "CoeffSeq":
        return CoeffSeq(self.spec, {q: c * b for q, b in self.entries.items()})

    def merged(self, other: "CoeffSeq") -> "CoeffSeq":
        if other.spec != self.spec:
            raise DomainError("cannot merge coefficient maps on different grids")
        out = dict(self.entries)
        for q, b in other.entries.items():
            out[q] = out.get(q, 0.0) + b
        return CoeffSeq(self.spec, out)


def cube_level_for(j: int) -> int:
    """Dyadic-cube level paired with annular level j."""
    return j + CUBE_OFFSET


def analyzable_levels(fam: LPFamily) -> list:
    """Annular levels j whose cube lattice fits the grid: cube side between
    4h and L/4, with j in the family's range."""
    spec = fam.spec
    out = []
    for j in fam.j_range:
        side = 2.0 ** -cube_level_for(j)
        if 4 * spec.spacing <= side <= spec.length / 4.0:
            out.append(j)
    return out


def _corner_stride(fam: LPFamily, j: int) -> int:
    spec = fam.spec
    side = 2.0 ** -cube_level_for(j)
    stride = side / spec.spacing
    if stride != round(stride) or stride < 4 or side > spec.length / 4.0:
        raise DomainError(f"level {j} not analyzable on this grid")
    if j not in fam.j_range:
        raise DomainError(f"level {j} outside family range")
    return round(stride)


def _tilde_profile(fam: LPFamily, j: int, kind: str) -> np.ndarray:
    if kind == "psi":
        return fam.tilde_psi_hat(j)
    if kind == "theta":
        return fam.tilde_theta_hat(j)
    raise DomainError(f"kind must be 'psi' or 'theta', got {kind!r}")


def _main_profile(fam: LPFamily, j: int, kind: str) -> np.ndarray:
    return fam.psi_hat(j) if kind == "psi" else fam.theta_hat(j)


def analyze(fam: LPFamily, f: GridFunction, j: int, kind: str = "psi") -> CoeffSeq:
    """Frame coefficients b_Q = <f, tilde^Q> over the level-j cube lattice.

    tilde^Q(x) = |Q|^(1/2) * tilde_kernel_j(x - x_Q), paired with the
    conjugating Riemann-sum inner product.
    """
    spec = f.spec
    stride = _corner_stride(fam, j)
    profile = _tilde_profile(fam, j, kind)
    F = forward_transform(f)
    # <f, k(. - y)> over all y at once: spectrum f^ * conj(k^)
    paired = inverse_transform(
        SpectralFunction(spec, F.values * np.conj(profile))
    ).values
    jc = cube_level_for(j)
    side = 2.0**-jc
    vol_sqrt = side ** (spec.dim / 2.0)
    base = round(-spec.length / 2.0 / side)  # integer corner index of the box edge
    entries = {}
    if spec.dim == 1:
        for i in range(0, spec.n, stride):
            cube = DyadicCube(jc, (base + i // stride,))
            entries[cube] = complex(paired[i]) * vol_sqrt
    else:
        for i in range(0, spec.n, stride):
            for k in range(0, spec.n, stride):
                cube = DyadicCube(jc, (base + i // stride, base + k // stride))
                entries[cube] = complex(paired[i, k]) * vol_sqrt
    return CoeffSeq(spec, entries)


def synthesize(fam: LPFamily, coeffs: CoeffSeq, j: int, kind: str = "psi") -> GridFunction:
    """Sum_Q b_Q kernel^Q with kernel^Q(x) = |Q|^(1/2) kernel_j(x - x_Q)."""
    spec = coeffs.spec
    stride = _corner_stride(fam, j)
    jc = cube_level_for(j)
    side = 2.0**-jc
    vol_sqrt = side ** (spec.dim / 2.0)
    base = round(-spec.length / 2.0 / side)
    deltas = np.zeros(spec.shape, dtype=np.complex128)
    w = spec.spacing**spec.dim
    for cube, b in coeffs.entries.items():
        if cube.level != jc:
            continue
        idx = tuple((m - base) * stride for m in cube.pos)
        if any(i < 0 or i >= spec.n for i in idx):
            raise DomainError(f"cube {cube} outside the box")
        deltas[idx] += b * vol_sqrt / w
    D = forward_transform(GridFunction(spec, deltas))
    profile = _main_profile(fam, j, kind)
    return inverse_transform(SpectralFunction(spec, D.values * profile))


def _indicator_values(spec, coeffs: CoeffSeq, level: int) -> np.ndarray:
    """Per-point value |b_Q| |Q|^(-1/2) of the level's containing cube."""
    side = 2.0**-level
    stride = side / spec.spacing
    if stride != round(stride) or round(stride) < 1:
        raise DomainError(f"cube level {level} not grid aligned")
    stride = round(stride)
    base = round(-spec.length / 2.0 / side)
    vol = side**spec.dim
    out = np.zeros(spec.shape)
    for cube, b in coeffs.entries.items():
        if cube.level != level:
            continue
        idx = tuple((m - base) * stride for m in cube.pos)
        if any(i < 0 or i + stride > spec.n for i in idx):
            raise DomainError(f"cube {cube} outside the box")
        sl = tuple(slice(i, i + stride) for i in idx)
        out[sl] = abs(b) / math.sqrt(vol)
    return out


def fpq_norm(coeffs: CoeffSeq, p: float, q) -> float:
    """Sequence norm ||b||_{f^{p,q}} = || l^q of |b_Q||Q|^(-1/2) chi_Q ||_{L^p}."""
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    spec = coeffs.spec
    levels = coeffs.levels()
    if not levels:
        return 0.0
    stack = np.stack([_indicator_values(spec, coeffs, lv) for lv in levels])
    if q == np.inf or q == "inf":
        g = stack.max(axis=0)
    else:
        q = float(q)
        if q <= 0:
            raise DomainError(f"q must be positive, got {q}")
        g = (stack**q).sum(axis=0) ** (1.0 / q)
    return lp_norm(GridFunction(spec, g), p)


def coeffs_to_json(coeffs: CoeffSeq) -> str:
    rows = [
        [q.level, list(q.pos), b.real, b.imag]
        for q, b in sorted(coeffs.entries.items(), key=lambda t: (t[0].level, t[0].pos))
    ]
    return json.dumps(
        {
            "dim": coeffs.spec.dim,
            "n": coeffs.spec.n,
            "length": coeffs.spec.length,
            "coeffs": rows,
        }
    )


def coeffs_from_json(text: str):
    from .grid import GridSpec

    obj = json.loads(text)
    spec = GridSpec(dim=obj["dim"], n=obj["n"], length=obj["length"])
    entries = {
        DyadicCube(level, tuple(pos)): complex(re, im)
        for level, pos, re, im in obj["coeffs"]
    }
    return CoeffSeq(spec, entries)
