"""Dyadic Littlewood-Paley families and m-fold annular partitions.

The low-pass profile is the canonical smooth cutoff built from
S(t) = exp(-1/t): it equals 1 exactly for |xi| <= 1 and 0 exactly for
|xi| >= 2, so all support statements below hold exactly on the lattice,
not just up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    DomainError,
    GridFunction,
    GridSpec,
    SpectralFunction,
    forward_transform,
    inverse_transform,
)

__all__ = [
    "smooth_step",
    "lowpass_profile",
    "annulus_profile",
    "LPFamily",
    "build_lp_family",
    "gamma_j",
    "lambda_j",
    "tilde_gamma_j",
    "tilde_lambda_j",
    "AnnularPartition",
    "build_annular_partition",
]


def smooth_step(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, 0 otherwise; C-infinity glue function."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def lowpass_profile(r) -> np.ndarray:
    """Radial low-pass cutoff: 1 for r <= 1, 0 for r >= 2, smooth between."""
    r = np.abs(np.asarray(r, dtype=np.float64))
    a = smooth_step(2.0 - r)
    b = smooth_step(r - 1.0)
    return a / (a + b + (a + b == 0))


def annulus_profile(r) -> np.ndarray:
    """Radial annular bump supported in 1/2 <= r <= 2 whose dyadic dilates
    sum to one away from the origin."""
    r = np.asarray(r, dtype=np.float64)
    return lowpass_profile(r) - lowpass_profile(2.0 * r)


def _log2_exact(x: float) -> int:
    e = math.log2(x)
    k = round(e)
    if 2.0**k != x:
        raise DomainError(f"{x} is not a power of two")
    return k


@dataclass(frozen=True)
class LPFamily:
    """Frequency-side family theta_j, psi_j and tilde variants on a grid.

    j_range covers the dyadic shells that sit fully inside the frequency
    lattice; profile evaluation outside the range is still exact (it is a
    closed formula) and is used internally, but the public convolution
    operators reject out-of-range levels.
    """

    spec: GridSpec
    j_min: int
    j_max: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def j_range(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def _radius(self) -> np.ndarray:
        if "radius" not in self._cache:
            self._cache["radius"] = self.spec.freq_radius()
        return self._cache["radius"]

    def theta_hat(self, j: int) -> np.ndarray:
        """theta_j^(xi) = lowpass(|xi| / 2^j) on the lattice."""
        key = ("theta", j)
        if key not in self._cache:
            self._cache[key] = lowpass_profile(self._radius() / 2.0**j)
        return self._cache[key]

    def psi_hat(self, j: int) -> np.ndarray:
        """psi_j^ = theta_j^ - theta_{j-1}^, supported in [2^(j-1), 2^(j+1)]."""
        key = ("psi", j)
        if key not in self._cache:
            self._cache[key] = self.theta_hat(j) - self.theta_hat(j - 1)
        return self._cache[key]

    def tilde_psi_hat(self, j: int) -> np.ndarray:
        """psi~_j = psi_{j-1} + psi_j + psi_{j+1}; reproduces psi_j exactly."""
        key = ("tpsi", j)
        if key not in self._cache:
            self._cache[key] = (
                self.psi_hat(j - 1) + self.psi_hat(j) + self.psi_hat(j + 1)
            )
        return self._cache[key]

    def tilde_theta_hat(self, j: int) -> np.ndarray:
        """theta~_j = theta_{j+1}; reproduces theta_j exactly."""
        return self.theta_hat(j + 1)

    def kernel(self, kind: str, j: int) -> GridFunction:
        """Physical-space kernel of one family member (psi_j, theta_j, ...)."""
        profiles = {
            "psi": self.psi_hat,
            "theta": self.theta_hat,
            "tilde_psi": self.tilde_psi_hat,
            "tilde_theta": self.tilde_theta_hat,
        }
        return inverse_transform(SpectralFunction(self.spec, profiles[kind](j)))

    def profile_spectral(self, kind: str, j: int) -> SpectralFunction:
        profiles = {
            "psi": self.psi_hat,
            "theta": self.theta_hat,
            "tilde_psi": self.tilde_psi_hat,
            "tilde_theta": self.tilde_theta_hat,
        }
        return SpectralFunction(self.spec, profiles[kind](j))

    def apply_profile(self, f: GridFunction, profile: np.ndarray) -> GridFunction:
        F = forward_transform(f)
        return inverse_transform(SpectralFunction(self.spec, F.values * profile))

    def _check_level(self, j: int) -> None:
        if j not in self.j_range:
            raise DomainError(
                f"level {j} outside resolvable range [{self.j_min}, {self.j_max}]"
            )


def build_lp_family(spec: GridSpec, min_shells: int = 4) -> LPFamily:
    """Construct the Littlewood-Paley family with the resolvable j_range.

    j_min keeps the innermost shell above the lattice spacing 1/L and j_max
    keeps the outermost support 2^(j+1) at or below the Nyquist frequency.
    Rejects grids carrying fewer than min_shells full shells.
    """
    kp = _log2_exact(spec.length)
    k = _log2_exact(float(spec.n))
    j_min = 1 - kp
    j_max = k - kp - 2
    if j_max - j_min + 1 < min_shells:
        raise DomainError(
            f"grid resolves only {j_max - j_min + 1} dyadic shells, "
            f"need at least {min_shells}"
        )
    return LPFamily(spec=spec, j_min=j_min, j_max=j_max)


def gamma_j(fam: LPFamily, f: GridFunction, j: int) -> GridFunction:
    """Low-pass piece Gamma_j f = theta_j * f."""
    fam._check_level(j)
    return fam.apply_profile(f, fam.theta_hat(j))


def lambda_j(fam: LPFamily, f: GridFunction, j: int) -> GridFunction:
    """Annular piece Lambda_j f = psi_j * f."""
    fam._check_level(j)
    return fam.apply_profile(f, fam.psi_hat(j))


def tilde_lambda_j(fam: LPFamily, f: GridFunction, j: int) -> GridFunction:
    fam._check_level(j)
    return fam.apply_profile(f, fam.tilde_psi_hat(j))


def tilde_gamma_j(fam: LPFamily, f: GridFunction, j: int) -> GridFunction:
    fam._check_level(j)
    return fam.apply_profile(f, fam.tilde_theta_hat(j))


@dataclass(frozen=True)
class AnnularPartition:
    """Radial annular partition of unity on the m-fold frequency lattice.

    Psi^ is the annulus_profile of |(xi_1, ..., xi_m)|; Theta^ is the sum of
    its five dyadic dilates 2^-2..2^2, identically one on 2^-2 <= |.| <= 2^2
    and supported in 2^-3 <= |.| <= 2^3.
    """

    m: int
    spec: GridSpec
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def _radius(self) -> np.ndarray:
        if "radius" not in self._cache:
            ax = self.spec.axis_freqs()
            grids = np.meshgrid(*([ax] * (self.m * self.spec.dim)), indexing="ij")
            self._cache["radius"] = np.sqrt(sum(g * g for g in grids))
        return self._cache["radius"]

    def max_radius(self) -> float:
        return float(np.max(self._radius()))

    def psi_hat_shell(self, j: int) -> np.ndarray:
        """Psi^(xi_vec / 2^j) on the m-fold lattice."""
        key = ("psi", j)
        if key not in self._cache:
            self._cache[key] = annulus_profile(self._radius() / 2.0**j)
        return self._cache[key]

    def theta_hat_shell(self, j: int) -> np.ndarray:
        """Theta^(xi_vec / 2^j) on the m-fold lattice."""
        key = ("theta", j)
        if key not in self._cache:
            r = self._radius() / 2.0**j
            self._cache[key] = lowpass_profile(r / 4.0) - lowpass_profile(8.0 * r)
        return self._cache[key]

    def psi_hat_at(self, radius) -> np.ndarray:
        return annulus_profile(radius)

    def theta_hat_at(self, radius) -> np.ndarray:
        r = np.asarray(radius, dtype=np.float64)
        return lowpass_profile(r / 4.0) - lowpass_profile(8.0 * r)

    def shell_resolvable(self, j: int) -> bool:
        """A shell is resolvable when its support meets the lattice."""
        lo = 2.0 ** (j - 3)
        hi = 2.0 ** (j + 3)
        return lo <= self.max_radius() and hi >= 1.0 / self.spec.length

    def require_shell(self, j: int) -> None:
        if not self.shell_resolvable(j):
            raise DomainError(f"shell {j} not resolvable on this lattice")


def build_annular_partition(spec: GridSpec, m: int) -> AnnularPartition:
    if m not in (1, 2, 3):
        raise DomainError(f"m must be 1, 2 or 3, got {m}")
    return AnnularPartition(m=m, spec=spec)
