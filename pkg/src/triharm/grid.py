"""Sampled functions on a centered box and a continuum-calibrated DFT pair.

Functions live on the box [-L/2, L/2)^dim sampled at N points per axis;
spectra live on the frequency lattice k/L, k in [-N/2, N/2).  The transform
pair is calibrated so that forward_transform approximates the integral
f^(xi) = int f(x) exp(-2*pi*i*x.xi) dx and inverse_transform its inverse.
All inputs are treated as compactly supported on the box: anything that
relies on moments or decay should first pass the margin guard.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "GridSpec",
    "GridFunction",
    "SpectralFunction",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "moment",
    "convolve",
    "inner",
    "margin_max",
    "require_margin_decay",
    "write_grid_binary",
    "read_grid_binary",
    "grid_to_json",
    "grid_from_json",
]

MARGIN_FRACTION = 0.1


class DomainError(ValueError):
    """A precondition of an operation was violated."""


def _is_pow2(x: float) -> bool:
    if x <= 0:
        return False
    m, e = np.frexp(x)
    return m == 0.5


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L/2, L/2)^dim with N samples per axis.

    N must be a power of two >= 16 and L a (possibly fractional) power of
    two, so that the spacing h = L/N satisfies h*N = L exactly in binary
    floating point.
    """

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise DomainError(f"N must be a power of two >= 16, got {self.n}")
        if not _is_pow2(self.length):
            raise DomainError(f"L must be a power of two, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude per axis, N/(2L)."""
        return self.n / (2.0 * self.length)

    def axis_points(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.spacing

    def axis_freqs(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) / self.length

    def point_grids(self) -> tuple:
        """Coordinate arrays of shape self.shape, one per axis."""
        ax = self.axis_points()
        return np.meshgrid(*([ax] * self.dim), indexing="ij")

    def freq_grids(self) -> tuple:
        ax = self.axis_freqs()
        return np.meshgrid(*([ax] * self.dim), indexing="ij")

    def freq_radius(self) -> np.ndarray:
        """|xi| on the frequency lattice."""
        grids = self.freq_grids()
        return np.sqrt(sum(g * g for g in grids))


def _validated_values(spec: GridSpec, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.shape != spec.shape:
        raise DomainError(f"values shape {arr.shape} != grid shape {spec.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite values on grid")
    return arr


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on the box grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.spec, self.values))
        self.values.setflags(write=False)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn) -> "GridFunction":
        return cls(spec, fn(*spec.point_grids()))

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridFunction":
        return cls(spec, np.zeros(spec.shape))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_spec(self, other)
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_spec(self, other)
        return GridFunction(self.spec, self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.spec, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralFunction:
    """Complex samples on the frequency lattice k/L, k in [-N/2, N/2)."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.spec, self.values))
        self.values.setflags(write=False)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn) -> "SpectralFunction":
        return cls(spec, fn(*spec.freq_grids()))

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        _check_same_spec(self, other)
        return SpectralFunction(self.spec, self.values + other.values)

    def __mul__(self, c) -> "SpectralFunction":
        return SpectralFunction(self.spec, self.values * c)

    __rmul__ = __mul__


def _check_same_spec(f, g):
    if f.spec != g.spec:
        raise DomainError(f"grid specs differ: {f.spec} vs {g.spec}")


def forward_transform(f: GridFunction) -> SpectralFunction:
    """Riemann-sum Fourier transform h^dim * sum_x f(x) exp(-2*pi*i*x.xi)."""
    spec = f.spec
    axes = tuple(range(spec.dim))
    shifted = np.fft.ifftshift(f.values, axes=axes)
    spec_vals = np.fft.fftshift(np.fft.fftn(shifted, axes=axes), axes=axes)
    return SpectralFunction(spec, spec_vals * spec.spacing**spec.dim)


def inverse_transform(F: SpectralFunction) -> GridFunction:
    """Synthesis sum L^-dim * sum_xi F(xi) exp(+2*pi*i*x.xi)."""
    spec = F.spec
    axes = tuple(range(spec.dim))
    shifted = np.fft.ifftshift(F.values, axes=axes)
    vals = np.fft.fftshift(np.fft.ifftn(shifted, axes=axes), axes=axes)
    return GridFunction(spec, vals * (spec.n / spec.length) ** spec.dim)


def lp_norm(f: GridFunction, p) -> float:
    """Discrete L^p quasi-norm (h^dim * sum |f|^p)^(1/p); max for p = inf."""
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(f.values)))
    p = float(p)
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    w = f.spec.spacing ** f.spec.dim
    return float((w * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))


def _as_multi_index(spec: GridSpec, alpha) -> tuple:
    if isinstance(alpha, (int, np.integer)):
        if spec.dim != 1:
            raise DomainError("scalar multi-index only valid in dimension 1")
        alpha = (int(alpha),)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != spec.dim or any(a < 0 for a in alpha):
        raise DomainError(f"bad multi-index {alpha} for dim {spec.dim}")
    if sum(alpha) > 8:
        raise DomainError(f"moment order {sum(alpha)} exceeds 8")
    return alpha


def moment(f: GridFunction, alpha) -> complex:
    """Riemann sum of x^alpha * f(x) over the box, |alpha| <= 8."""
    alpha = _as_multi_index(f.spec, alpha)
    w = f.spec.spacing ** f.spec.dim
    integrand = f.values.copy()
    for axis_grid, a in zip(f.spec.point_grids(), alpha):
        if a:
            integrand *= axis_grid**a
    return complex(w * np.sum(integrand))


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Convolution via the spectral product, f*g = (f^ g^)^v."""
    _check_same_spec(f, g)
    F = forward_transform(f)
    G = forward_transform(g)
    return inverse_transform(SpectralFunction(f.spec, F.values * G.values))


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Riemann-sum pairing <f, g> = int f conj(g)."""
    _check_same_spec(f, g)
    w = f.spec.spacing ** f.spec.dim
    return complex(w * np.sum(f.values * np.conj(g.values)))


def _margin_mask(spec: GridSpec) -> np.ndarray:
    cut = 0.5 * (1.0 - MARGIN_FRACTION) * spec.length
    grids = spec.point_grids()
    mask = np.zeros(spec.shape, dtype=bool)
    for g in grids:
        mask |= np.abs(g) >= cut
    return mask


def margin_max(f: GridFunction) -> float:
    """Largest |f| over the outer 10% margin of the box."""
    return float(np.max(np.abs(f.values[_margin_mask(f.spec)])))


def require_margin_decay(f: GridFunction, tol: float = 1e-12) -> None:
    """Guard for the compact-support convention: |f| on the margin must not
    exceed tol relative to the overall peak."""
    peak = float(np.max(np.abs(f.values)))
    if peak == 0.0:
        return
    ratio = margin_max(f) / peak
    if ratio > tol:
        raise DomainError(
            f"margin decay violated: relative margin magnitude {ratio:.3e} > {tol:.1e}"
        )


# -- serialization ------------------------------------------------------------

_HEADER = struct.Struct("<qqd")  # dim, N, L


def write_grid_binary(f: GridFunction, path) -> None:
    """Little-endian binary: 24-byte header (dim, N, L) then interleaved
    (re, im) float64 samples in C order."""
    payload = np.empty(f.values.size * 2, dtype="<f8")
    flat = f.values.ravel()
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.spec.dim, f.spec.n, f.spec.length))
        fh.write(payload.tobytes())


def read_grid_binary(path) -> GridFunction:
    with open(path, "rb") as fh:
        dim, n, length = _HEADER.unpack(fh.read(_HEADER.size))
        spec = GridSpec(dim=dim, n=n, length=length)
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != 2 * n**dim:
        raise DomainError(f"expected {2 * n ** dim} floats, got {payload.size}")
    vals = payload[0::2] + 1j * payload[1::2]
    return GridFunction(spec, vals.reshape(spec.shape))


def grid_to_json(f: GridFunction) -> str:
    flat = f.values.ravel()
    return json.dumps(
        {
            "dim": f.spec.dim,
            "n": f.spec.n,
            "length": f.spec.length,
            "values": [[v.real, v.imag] for v in flat],
        }
    )


def grid_from_json(text: str) -> GridFunction:
    obj = json.loads(text)
    spec = GridSpec(dim=obj["dim"], n=obj["n"], length=obj["length"])
    vals = np.array([complex(re, im) for re, im in obj["values"]])
    return GridFunction(spec, vals.reshape(spec.shape))
