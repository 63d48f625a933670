"""Computable stand-ins for the dense test class of moment-free Schwartz
functions: random band-limited fields with a spectral hole at the origin and
fast decay inside the box margin.

A surrogate starts from seeded random spectral data on a range of dyadic
shells (well inside the resolvable band and clear of the origin), is
windowed in space to meet the margin guard, and is then re-projected onto
the band.  Window and band projection are iterated; the final step is the
projection, so the band support is exact on the lattice while the margin
leakage stays at roundoff scale.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    DomainError,
    GridFunction,
    GridSpec,
    SpectralFunction,
    forward_transform,
    inverse_transform,
)
from .lp_frame import LPFamily, lowpass_profile

__all__ = [
    "hermitian_symmetrize",
    "spatial_window",
    "band_mask",
    "make_surrogate",
    "surrogate_band",
    "dilate_spectrum",
]


def hermitian_symmetrize(spec: GridSpec, vals: np.ndarray) -> np.ndarray:
    """Project spectral data onto the Hermitian subspace (real functions).

    The mirror of centered index i is (N - i) mod N; the unpaired edge bin
    maps to itself and keeps only its real part.
    """
    flipped = vals
    for axis in range(spec.dim):
        idx = (spec.n - np.arange(spec.n)) % spec.n
        flipped = np.take(flipped, idx, axis=axis)
    return 0.5 * (vals + np.conj(flipped))


def spatial_window(spec: GridSpec, flat: float = 0.7, zero: float = 0.9) -> np.ndarray:
    """Smooth window equal to 1 for |x| <= flat*L/2 and 0 for |x| >= zero*L/2."""
    grids = spec.point_grids()
    half = spec.length / 2.0
    w = np.ones(spec.shape)
    for g in grids:
        u = (np.abs(g) / half - flat) / (zero - flat)
        ramp = np.clip(u, 0.0, 1.0)
        inside = ramp < 1.0
        prof = np.zeros(spec.shape)
        prof[inside] = lowpass_profile(1.0 + ramp[inside])
        w = w * prof
    return w


def surrogate_band(fam: LPFamily) -> tuple:
    """Shell range [j_min+2, j_max-2] used for surrogate content, clamped to
    at least one shell."""
    lo = fam.j_min + 2
    hi = fam.j_max - 2
    if lo > hi:
        lo = hi = min(fam.j_max, max(fam.j_min, (fam.j_min + fam.j_max) // 2))
    return lo, hi


def band_mask(spec: GridSpec, lo_radius: float, hi_radius: float) -> np.ndarray:
    r = spec.freq_radius()
    return (r >= lo_radius) & (r <= hi_radius)


def _band_basis(spec: GridSpec, mask: np.ndarray) -> np.ndarray:
    """Real orthogonal basis (columns) of the real-valued functions whose
    spectrum is supported on the masked lattice set."""
    n = spec.n
    flat_mask = mask.ravel()
    idx_all = np.arange(flat_mask.size)
    # mirror of a centered multi-index, flattened
    shape = spec.shape
    multi = np.unravel_index(idx_all, shape)
    mirror = np.ravel_multi_index(tuple((n - m) % n for m in multi), shape)
    cols = []
    seen = set()
    for i in idx_all[flat_mask]:
        j = mirror[i]
        if i in seen or j in seen:
            continue
        seen.add(i)
        seen.add(j)
        base = np.zeros(flat_mask.size, dtype=np.complex128)
        if i == j:
            base[i] = 1.0
            cols.append(base)
        else:
            base[i] = 1.0
            base[j] = 1.0
            cols.append(base)
            base = np.zeros(flat_mask.size, dtype=np.complex128)
            base[i] = 1.0j
            base[j] = -1.0j
            cols.append(base)
    out = np.empty((flat_mask.size, len(cols)), dtype=np.complex128)
    for k, c in enumerate(cols):
        out[:, k] = c
    return out


def _null_margin(spec: GridSpec, f: GridFunction, mask: np.ndarray) -> GridFunction:
    """Least-norm in-band correction zeroing every margin sample exactly."""
    from .grid import _margin_mask

    margin = _margin_mask(spec).ravel()
    basis = _band_basis(spec, mask)
    # spatial samples of each spectral basis vector on the margin set
    spatial = np.empty((int(margin.sum()), basis.shape[1]))
    for k in range(basis.shape[1]):
        g = inverse_transform(
            SpectralFunction(spec, basis[:, k].reshape(spec.shape))
        ).values.ravel()
        spatial[:, k] = g[margin].real
    target = f.values.ravel()[margin].real
    coef, *_ = np.linalg.lstsq(spatial, -target, rcond=None)
    correction = basis @ coef
    F = forward_transform(f)
    fixed = F.values + correction.reshape(spec.shape)
    return inverse_transform(SpectralFunction(spec, fixed))


def make_surrogate(
    spec: GridSpec,
    fam: LPFamily,
    seed: int,
    shells: tuple | None = None,
    iterations: int = 2,
    null_margin: bool = True,
    window: tuple = (0.7, 0.9),
) -> GridFunction:
    """Seeded random real band-limited function with margin decay.

    The spectrum is supported where 2^(lo-1) <= |xi| <= 2^(hi+1) (shells
    lo..hi) and vanishes identically near the origin.  After the window
    iterations an exact in-band correction zeroes every margin sample, so
    the function passes the margin guard at roundoff scale.
    """
    if shells is None:
        shells = surrogate_band(fam)
    lo, hi = shells
    if lo < fam.j_min or hi > fam.j_max or lo > hi:
        raise DomainError(f"surrogate shells {shells} outside family range")
    rng = np.random.default_rng(seed)
    envelope = sum(fam.psi_hat(j) for j in range(lo, hi + 1))
    vals = (rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape)) * envelope
    vals = hermitian_symmetrize(spec, vals)
    mask = band_mask(spec, 2.0 ** (lo - 1), 2.0 ** (hi + 1))
    win = spatial_window(spec, *window)
    f = inverse_transform(SpectralFunction(spec, vals * mask))
    for _ in range(iterations):
        damped = GridFunction(spec, f.values * win)
        F = forward_transform(damped)
        f = inverse_transform(SpectralFunction(spec, F.values * mask))
    if null_margin:
        f = _null_margin(spec, f, mask)
    peak = np.max(np.abs(f.values))
    if peak == 0:
        raise DomainError("surrogate degenerated to zero")
    return GridFunction(spec, f.values / peak)


class PacketSurrogate:
    """Analytic wave-packet stand-in for a moment-free test function.

    The spectrum is a fixed Hermitian sum of Gaussian bumps centered on an
    octave of frequencies away from the origin, with random amplitudes and
    packet positions.  Because the spectrum is a closed formula, dyadic
    dilates f_t = t^(n/p) f(t .) can be sampled exactly on the lattice for
    any t, which index shuffling of lattice data cannot do downward.
    """

    def __init__(self, seed: int, base_freq: float, rel_width: float = 1.0 / 6.0,
                 n_packets: int = 4, spread: float = 0.15):
        rng = np.random.default_rng(seed)
        self.base = base_freq
        self.widths = rel_width * base_freq * rng.uniform(0.8, 1.2, n_packets)
        self.radii = base_freq * rng.uniform(1.0, 2.0, n_packets)
        self.coefs = rng.normal(size=n_packets) + 1j * rng.normal(size=n_packets)
        self.centers_rel = rng.uniform(-spread, spread, n_packets)

    def spectrum(self, spec: GridSpec, t: float = 1.0, recip_p: float = 1.0) -> np.ndarray:
        """Sampled spectrum of t^(n/p) f(t .), i.e. t^(n/p - n) f^(xi / t)."""
        n = spec.dim
        grids = spec.freq_grids()
        out = np.zeros(spec.shape, dtype=np.complex128)
        for c, rad, w, arel in zip(self.coefs, self.radii, self.widths, self.centers_rel):
            a = arel * spec.length
            if n == 1:
                xi = grids[0] / t
                gp = np.exp(-((xi - rad) ** 2) / (2.0 * w * w))
                gm = np.exp(-((xi + rad) ** 2) / (2.0 * w * w))
                out += (c * gp + np.conj(c) * gm) * np.exp(-2j * np.pi * xi * a)
            else:
                r = np.sqrt(sum(g * g for g in grids)) / t
                bump = np.exp(-((r - rad) ** 2) / (2.0 * w * w))
                phase = np.exp(-2j * np.pi * (grids[0] / t) * a)
                out += 2.0 * c.real * bump * phase
        return t ** (n * recip_p - n) * out

    def sample(self, spec: GridSpec, t: float = 1.0, recip_p: float = 1.0) -> GridFunction:
        vals = hermitian_symmetrize(spec, self.spectrum(spec, t, recip_p))
        return inverse_transform(SpectralFunction(spec, vals))


def dilate_spectrum(f: GridFunction, s: int, weight: float = 1.0) -> GridFunction:
    """Exact dyadic dilation x -> 2^s x on the lattice via index shuffling of
    the spectrum, scaled by `weight`.

    Positive s moves content to higher shells (requires headroom below the
    Nyquist shell); negative s needs the spectrum to sit on indices divisible
    by 2^-s.  Content that cannot be moved exactly raises.
    """
    spec = f.spec
    F = forward_transform(f).values
    n = spec.n
    c = n // 2
    out = np.zeros_like(F)
    if s >= 0:
        step = 2**s
        src = np.arange(n)
        dst = (src - c) * step + c
        ok = (dst >= 0) & (dst < n)
        lost = 0.0
        if spec.dim == 1:
            out[dst[ok]] = F[src[ok]]
            lost = float(np.max(np.abs(F[src[~ok]]), initial=0.0))
        else:
            sel = np.ix_(src[ok], src[ok])
            out[np.ix_(dst[ok], dst[ok])] = F[sel]
            drop = np.ones(n, dtype=bool)
            drop[src[ok]] = False
            lost = float(np.max(np.abs(F[drop, :]), initial=0.0))
            lost = max(lost, float(np.max(np.abs(F[:, drop]), initial=0.0)))
        if lost > 1e-12 * np.max(np.abs(F)):
            raise DomainError("dilation pushes content beyond the Nyquist shell")
    else:
        step = 2**-s
        src = np.arange(n)
        keep = (src - c) % step == 0
        dst = (src - c) // step + c
        moved = np.zeros_like(F)
        if spec.dim == 1:
            moved[dst[keep]] = F[src[keep]]
            rest = F.copy()
            rest[src[keep]] = 0
        else:
            moved[np.ix_(dst[keep], dst[keep])] = F[np.ix_(src[keep], src[keep])]
            rest = F.copy()
            rest[np.ix_(src[keep], src[keep])] = 0
        if float(np.max(np.abs(rest))) > 1e-12 * np.max(np.abs(F)):
            raise DomainError("dilation needs spectrum on a coarser sublattice")
        out = moved
    return inverse_transform(SpectralFunction(spec, weight * out))
