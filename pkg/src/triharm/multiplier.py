"""m-linear Fourier multiplier operators (m <= 3): direct oracle and fast
paths, shell localization, paraproduct splitting, scale-invariant Sobolev
norms of symbols, and vanishing-moment machinery.

The direct path evaluates the full lattice sum

    T(x) = L^(-m*dim) * sum_{xi_1..xi_m} sigma(xi) prod f_j^(xi_j)
           * exp(2*pi*i*<x, xi_1+...+xi_m>)

at every grid point and is the oracle everything else is checked against.
Fast paths exploit that on grid points the phase only depends on the
aliased frequency sum, so folding the sum onto the base lattice and doing a
single inverse transform gives the same values.
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
    lp_norm,
    moment,
    require_margin_decay,
)
from .lp_frame import AnnularPartition, LPFamily, smooth_step

__all__ = [
    "DEFAULT_BUDGET",
    "MultiplierTensor",
    "make_symbol",
    "apply_direct",
    "apply_separable",
    "apply_fast",
    "localize",
    "ls2_norm",
    "moment_check",
    "MomentReport",
    "make_vanishing_multiplier",
    "ParaproductPieces",
    "OrderingPieces",
    "paraproduct_decompose",
    "ordering_of",
    "ordering_triples",
]

DEFAULT_BUDGET = 18
TENSOR_BUDGET = 24  # full-tensor storage cap (2^24 entries, 256 MiB complex)


class BudgetError(DomainError):
    """Tensor work exceeds the direct-path budget; use a fast path."""


def _within_budget(spec: GridSpec, m: int, budget: int = DEFAULT_BUDGET) -> bool:
    return m * spec.dim * round(math.log2(spec.n)) <= budget


@dataclass
class MultiplierTensor:
    """Sampled m-linear symbol on the m-fold frequency lattice.

    At least one of `values` (full tensor), `fn` (callable on frequency
    coordinate arrays), or `factors` (separable one-slot profiles) must be
    present.  The tensor is materialized lazily and only within the work
    budget m*dim*log2(N) <= 18.
    """

    m: int
    spec: GridSpec
    values: np.ndarray | None = None
    fn: object = None
    factors: list | None = None
    sum_cutoff: object = None  # radial weight on |xi_1 + ... + xi_m|
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.m not in (1, 2, 3):
            raise DomainError(f"m must be 1, 2 or 3, got {self.m}")
        if self.values is None and self.fn is None and self.factors is None:
            raise DomainError("symbol needs values, a callable, or factors")
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.complex128)
            if self.values.shape != self.spec.shape * self.m:
                raise DomainError(
                    f"tensor shape {self.values.shape} != {self.spec.shape * self.m}"
                )
            if not np.all(np.isfinite(self.values)):
                raise DomainError("non-finite symbol values")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_tensor(cls, spec: GridSpec, m: int, values) -> "MultiplierTensor":
        return cls(m=m, spec=spec, values=values)

    @classmethod
    def from_callable(cls, spec: GridSpec, m: int, fn) -> "MultiplierTensor":
        sym = cls(m=m, spec=spec, fn=fn)
        if _within_budget(spec, m):
            sym.tensor()
        return sym

    @classmethod
    def separable(cls, spec: GridSpec, m: int, factors) -> "MultiplierTensor":
        factors = [np.asarray(f, dtype=np.complex128) for f in factors]
        if len(factors) != m:
            raise DomainError(f"need {m} factors, got {len(factors)}")
        for f in factors:
            if f.shape != spec.shape:
                raise DomainError("factor shape mismatch")
        return cls(m=m, spec=spec, factors=factors)

    # -- evaluation -----------------------------------------------------------

    def _slot_axes(self) -> list:
        """Frequency coordinate arrays, one per scalar axis of (R^dim)^m."""
        ax = self.spec.axis_freqs()
        return np.meshgrid(*([ax] * (self.m * self.spec.dim)), indexing="ij")

    def tensor(self) -> np.ndarray:
        """Full tensor on the m-fold lattice (budget-guarded).

        `values` always stores the complete symbol; the fn/factors backings
        store the base symbol, with sum_cutoff applied on top.
        """
        if self.values is not None:
            return self.values
        if not _within_budget(self.spec, self.m, TENSOR_BUDGET):
            raise BudgetError(
                "materializing this tensor exceeds the budget; "
                "keep the symbol callable-backed"
            )
        if self.factors is not None:
            out = np.ones(self.spec.shape * self.m, dtype=np.complex128)
            per_slot = self.spec.dim
            for i, f in enumerate(self.factors):
                shape = [1] * (self.m * per_slot)
                for a in range(per_slot):
                    shape[i * per_slot + a] = self.spec.n
                out = out * f.reshape(shape)
        else:
            out = np.asarray(self.fn(*self._slot_axes()), dtype=np.complex128)
        if self.sum_cutoff is not None:
            out = out * self.sum_cutoff(_sum_frequency_radius(self.spec, self.m))
        self.values = out
        return out

    def sample_scaled(self, k: int) -> np.ndarray:
        """sigma(2^k xi) on the m-fold lattice.

        Callable-backed symbols evaluate exactly; tensor-only symbols
        subsample (k >= 0 with 2^(k+1) inside Nyquist), with off-lattice
        entries set to 0 (they are only consumed under a window vanishing
        there).
        """
        if self.fn is not None:
            grids = [2.0**k * g for g in self._slot_axes()]
            out = np.asarray(self.fn(*grids), dtype=np.complex128)
            if self.sum_cutoff is not None:
                out = out * self.sum_cutoff(
                    2.0**k * _sum_frequency_radius(self.spec, self.m)
                )
            return out
        if k < 0:
            raise DomainError("tensor-backed symbols cannot be refined (k < 0)")
        vals = self.tensor()
        n = self.spec.n
        c = n // 2
        idx = (np.arange(n) - c) * 2**k + c
        ok = (idx >= 0) & (idx < n)
        idx_c = np.clip(idx, 0, n - 1)
        out = vals
        naxes = self.m * self.spec.dim
        for axis in range(naxes):
            out = np.take(out, idx_c, axis=axis)
            shape = [1] * naxes
            shape[axis] = n
            out = out * ok.reshape(shape)
        return out

    def scaled_by(self, weight: np.ndarray) -> "MultiplierTensor":
        """Pointwise product with a lattice weight (tensor-backed result)."""
        return MultiplierTensor(m=self.m, spec=self.spec, values=self.tensor() * weight)


def make_symbol(spec: GridSpec, m: int, family: str, **params) -> MultiplierTensor:
    """Named symbol families: one, mihlin(tau), random_band(seed), separable."""
    if family == "one":
        return MultiplierTensor.from_callable(spec, m, lambda *ax: np.ones(ax[0].shape))
    if family == "mihlin":
        tau = float(params.get("tau", 2.0))

        def fn(*ax):
            r2 = sum(a * a for a in ax)
            r2 = np.where(r2 == 0, 1.0, r2)
            return np.exp(1j * (tau / 2.0) * np.log(r2))

        return MultiplierTensor.from_callable(spec, m, fn)
    if family == "random_band":
        seed = int(params.get("seed", 0))
        shells = params.get("shells")
        if shells is None:
            from .lp_frame import build_lp_family

            fam = build_lp_family(spec, min_shells=3)
            shells = list(fam.j_range)
        rng = np.random.default_rng(seed)
        coef = rng.normal(size=len(shells)) + 1j * rng.normal(size=len(shells))
        coef /= np.max(np.abs(coef))
        from .lp_frame import annulus_profile

        def fn(*ax):
            r = np.sqrt(sum(a * a for a in ax))
            out = np.zeros(r.shape, dtype=np.complex128)
            for c, j in zip(coef, shells):
                out += c * annulus_profile(r / 2.0**j)
            return out

        return MultiplierTensor.from_callable(spec, m, fn)
    if family == "gauss":
        width = float(params.get("width", 1.0))

        def fn(*ax):
            r2 = sum(a * a for a in ax)
            return np.exp(-r2 / (2.0 * width**2))

        return MultiplierTensor.from_callable(spec, m, fn)
    if family == "separable":
        return MultiplierTensor.separable(spec, m, params["factors"])
    raise DomainError(f"unknown symbol family {family!r}")


# -- application paths ---------------------------------------------------------


def _input_spectra(inputs) -> list:
    spec = inputs[0].spec
    for f in inputs:
        if f.spec != spec:
            raise DomainError("all inputs must share one grid spec")
    return [forward_transform(f).values.ravel() for f in inputs]


def apply_direct(
    sigma: MultiplierTensor, inputs, budget: int = DEFAULT_BUDGET
) -> GridFunction:
    """Oracle path: the literal lattice sum at every grid point."""
    spec = sigma.spec
    if len(inputs) != sigma.m:
        raise DomainError(f"expected {sigma.m} inputs, got {len(inputs)}")
    if not _within_budget(spec, sigma.m, budget):
        raise BudgetError(
            f"direct evaluation budget exceeded "
            f"(m*dim*log2(N) > {budget}); use apply_fast or apply_separable"
        )
    spectra = _input_spectra(inputs)
    vals = sigma.tensor().reshape((spec.n**spec.dim,) * sigma.m).copy()
    for i, F in enumerate(spectra):
        shape = [1] * sigma.m
        shape[i] = F.size
        vals = vals * F.reshape(shape)
    vals = vals.ravel()

    # frequency-sum coordinates, one array per spatial axis
    ax = spec.axis_freqs()
    grids = np.meshgrid(*([ax] * spec.dim), indexing="ij")
    flat_axes = [g.ravel() for g in grids]
    sums = []
    for a in range(spec.dim):
        comp = 0.0
        for i in range(sigma.m):
            shape = [1] * sigma.m
            shape[i] = flat_axes[a].size
            comp = comp + flat_axes[a].reshape(shape)
        sums.append(np.broadcast_to(comp, (flat_axes[a].size,) * sigma.m).ravel())

    pts = [g.ravel() for g in spec.point_grids()]
    npoints = pts[0].size
    out = np.empty(npoints, dtype=np.complex128)
    chunk = max(1, 2**22 // max(vals.size, 1))
    scale = spec.length ** (-sigma.m * spec.dim)
    for start in range(0, npoints, chunk):
        stop = min(start + chunk, npoints)
        phase = np.zeros((stop - start, vals.size))
        for a in range(spec.dim):
            phase += np.outer(pts[a][start:stop], sums[a])
        out[start:stop] = np.exp(2j * np.pi * phase) @ vals
    return GridFunction(spec, scale * out.reshape(spec.shape))


def _require_no_alias(spec: GridSpec, inputs) -> None:
    """The sum-frequency post-filter is exact only when the true frequency
    sums stay inside the lattice; check sum of per-input content radii."""
    total = 0.0
    r = spec.freq_radius()
    for f in inputs:
        F = forward_transform(f)
        occupied = np.abs(F.values) > 1e-13 * np.max(np.abs(F.values))
        total += float(np.max(r[occupied], initial=0.0))
    if total > spec.nyquist:
        raise DomainError(
            f"input content radii sum to {total}, beyond Nyquist {spec.nyquist}; "
            "the sum-frequency cutoff would act on aliased content"
        )


def _apply_sum_cutoff(cutoff, g: GridFunction) -> GridFunction:
    F = forward_transform(g)
    w = cutoff(g.spec.freq_radius())
    return inverse_transform(SpectralFunction(g.spec, F.values * w))


def apply_separable(sigma: MultiplierTensor, inputs) -> GridFunction:
    """Fast path for sigma(xi) = prod_i s_i(xi_i): filter each input and
    multiply pointwise.  A sum-frequency cutoff riding on the symbol is
    applied as an exact output filter (inputs must not alias)."""
    if sigma.factors is None:
        raise DomainError("symbol has no separable factorization")
    if len(inputs) != sigma.m:
        raise DomainError(f"expected {sigma.m} inputs, got {len(inputs)}")
    spec = sigma.spec
    out = np.ones(spec.shape, dtype=np.complex128)
    for f, s in zip(inputs, sigma.factors):
        F = forward_transform(f)
        out = out * inverse_transform(SpectralFunction(spec, F.values * s)).values
    result = GridFunction(spec, out)
    if sigma.sum_cutoff is not None:
        _require_no_alias(spec, inputs)
        result = _apply_sum_cutoff(sigma.sum_cutoff, result)
    return result


def _fold_indices(spec: GridSpec, m: int) -> np.ndarray:
    """Flat base-lattice index of the aliased frequency sum per tensor entry."""
    n = spec.n
    c = n // 2
    k = np.arange(n) - c
    per_axis = []
    for a in range(spec.dim):
        comp = 0
        for i in range(m):
            shape = [1] * (m * spec.dim)
            shape[i * spec.dim + a] = n
            comp = comp + k.reshape(shape)
        per_axis.append(np.mod(comp + c, n))
    flat = 0
    for comp in per_axis:
        flat = flat * n + comp
    return np.broadcast_to(flat, spec.shape * m).ravel()


def apply_fast(sigma: MultiplierTensor, inputs) -> GridFunction:
    """Fold the weighted lattice sum onto the base lattice and invert once.

    Agrees with apply_direct exactly in exact arithmetic: on grid points the
    phase exp(2*pi*i*<x, sum xi>) only sees the sum modulo the lattice
    period N/L.
    """
    spec = sigma.spec
    if sigma.factors is not None:
        # the factored path never materializes the tensor
        return apply_separable(sigma, inputs)
    spectra = _input_spectra(inputs)
    vals = sigma.tensor().reshape((spec.n**spec.dim,) * sigma.m).copy()
    for i, F in enumerate(spectra):
        shape = [1] * sigma.m
        shape[i] = F.size
        vals = vals * F.reshape(shape)
    key = ("fold", sigma.m)
    if key not in sigma._cache:
        sigma._cache[key] = _fold_indices(spec, sigma.m)
    folded = np.bincount(
        sigma._cache[key], weights=vals.ravel().real, minlength=spec.n**spec.dim
    ) + 1j * np.bincount(
        sigma._cache[key], weights=vals.ravel().imag, minlength=spec.n**spec.dim
    )
    scale = spec.length ** (-(sigma.m - 1) * spec.dim)
    S = SpectralFunction(spec, scale * folded.reshape(spec.shape))
    return inverse_transform(S)


# -- localization and Sobolev norms ---------------------------------------------


def localize(
    sigma: MultiplierTensor, part: AnnularPartition, j: int, mode: str = "theta"
) -> MultiplierTensor:
    """sigma_j = sigma * Theta^(./2^j) (mode 'theta') or
    sigma~_j = sigma * Psi^(2^-j .) (mode 'psi')."""
    if part.m != sigma.m or part.spec != sigma.spec:
        raise DomainError("partition does not match symbol lattice")
    part.require_shell(j)
    if mode == "theta":
        w = part.theta_hat_shell(j)
    elif mode == "psi":
        w = part.psi_hat_shell(j)
    else:
        raise DomainError(f"mode must be 'theta' or 'psi', got {mode!r}")
    loc = MultiplierTensor(m=sigma.m, spec=sigma.spec, values=sigma.tensor() * w)
    return loc


def _sobolev_weight(spec: GridSpec, m: int, s, per_slot) -> np.ndarray:
    """(1+4pi^2|zeta|^2)^s on the dual lattice, or the product-type variant
    when per_slot gives one exponent per input slot."""
    ax = (np.arange(spec.n) - spec.n // 2) * spec.spacing
    grids = np.meshgrid(*([ax] * (m * spec.dim)), indexing="ij")
    if per_slot is None:
        r2 = sum(g * g for g in grids)
        return (1.0 + 4.0 * np.pi**2 * r2) ** float(s)
    w = np.ones(spec.shape * m)
    for i, si in enumerate(per_slot):
        r2 = sum(
            grids[i * spec.dim + a] * grids[i * spec.dim + a] for a in range(spec.dim)
        )
        w = w * (1.0 + 4.0 * np.pi**2 * r2) ** float(si)
    return w


def ls2_norm(
    sigma: MultiplierTensor,
    part: AnnularPartition,
    s,
    ks=None,
    per_slot=None,
    return_table: bool = False,
):
    """Scale-invariant Sobolev norm sup_k || sigma(2^k .) Psi^ ||_{L^2_s}.

    The windowed rescaled symbol lives on the m*dim-fold frequency lattice;
    its transform is taken on the dual lattice and integrated against
    <zeta>^(2s) (or the product-type weight when per_slot is given).
    """
    if per_slot is None and float(s) < 0:
        raise DomainError(f"s must be nonnegative, got {s}")
    spec = sigma.spec
    if part.m != sigma.m or part.spec != spec:
        raise DomainError("partition does not match symbol lattice")
    if ks is None:
        top = round(math.log2(spec.nyquist))
        if sigma.fn is not None:
            kp = round(math.log2(spec.length))
            ks = range(1 - kp, top)
        else:
            ks = range(0, max(top, 1))
    window = part.psi_hat_shell(0)
    weight = _sobolev_weight(spec, sigma.m, s, per_slot)
    naxes = sigma.m * spec.dim
    axes = tuple(range(naxes))
    cell = spec.spacing**naxes
    vol = (1.0 / spec.length) ** naxes
    table = []
    best = 0.0
    for k in ks:
        G = sigma.sample_scaled(k) * window
        Ghat = vol * np.fft.fftshift(
            np.fft.fftn(np.fft.ifftshift(G, axes=axes), axes=axes), axes=axes
        )
        val = math.sqrt(float(cell * np.sum(weight * np.abs(Ghat) ** 2)))
        table.append((int(k), val))
        best = max(best, val)
    if return_table:
        return best, table
    return best


# -- vanishing moments ----------------------------------------------------------


_SUM_RADIUS_CACHE: dict = {}


def _sum_frequency_radius(spec: GridSpec, m: int) -> np.ndarray:
    key = (spec, m)
    if key in _SUM_RADIUS_CACHE:
        return _SUM_RADIUS_CACHE[key]
    ax = spec.axis_freqs()
    per_axis = []
    for a in range(spec.dim):
        comp = 0.0
        for i in range(m):
            shape = [1] * (m * spec.dim)
            shape[i * spec.dim + a] = spec.n
            comp = comp + ax.reshape(shape)
        per_axis.append(comp)
    out = np.sqrt(sum(np.broadcast_to(c, spec.shape * m) ** 2 for c in per_axis))
    if len(_SUM_RADIUS_CACHE) > 2:
        _SUM_RADIUS_CACHE.clear()
    _SUM_RADIUS_CACHE[key] = out
    return out


def sum_cutoff_profile(
    delta: float, top: float | None = None, profile: str = "bump", flatness: int = 1
):
    """Radial cutoff on the frequency-sum magnitude.

    'bump': exactly 0 for u <= delta and exactly 1 above `top` (default
    2*delta), the compactly-flat shape.  'flat': the entire function
    (1 - exp(-(u/delta)^2))^flatness, vanishing to order 2*flatness at 0;
    its kernel has Gaussian tails, which keeps the spatial smearing of the
    filtered output far below the bump profile's.
    """
    if profile == "bump":
        hi = 2.0 * delta if top is None else float(top)
        if hi <= delta:
            raise DomainError("cutoff transition must have positive width")
        width = hi - delta

        def cut(u):
            u = np.asarray(u, dtype=np.float64)
            a = smooth_step((u - delta) / width)
            b = smooth_step((hi - u) / width)
            return a / (a + b + (a + b == 0))

        return cut
    if profile == "flat":
        q = int(flatness)
        if q < 1:
            raise DomainError("flatness must be >= 1")

        def cut(u):
            u = np.asarray(u, dtype=np.float64)
            return (1.0 - np.exp(-((u / delta) ** 2))) ** q

        return cut
    raise DomainError(f"unknown cutoff profile {profile!r}")


def make_vanishing_multiplier(
    sigma: MultiplierTensor,
    delta: float,
    top: float | None = None,
    profile: str = "bump",
    flatness: int = 1,
) -> MultiplierTensor:
    """Damp sigma smoothly to 0 where |xi_1 + ... + xi_m| <= delta (leaving
    it untouched above the transition), so that outputs of T_sigma carry a
    spectral zero near the origin and pass the vanishing-moment check."""
    spec = sigma.spec
    if delta < 4.0 / spec.length:
        raise DomainError(
            f"delta = {delta} below lattice resolution 4/L = {4.0 / spec.length}"
        )
    cut = sum_cutoff_profile(delta, top, profile, flatness)
    if sigma.sum_cutoff is not None:
        inner = sigma.sum_cutoff
        outer = cut

        def cut(u, _inner=inner, _outer=outer):
            return _inner(u) * _outer(u)

    out = MultiplierTensor(
        m=sigma.m,
        spec=spec,
        fn=sigma.fn,
        factors=sigma.factors,
        sum_cutoff=cut,
    )
    if sigma.values is not None and sigma.fn is None and sigma.factors is None:
        u = _sum_frequency_radius(spec, sigma.m)
        out.values = sigma.values * sum_cutoff_profile(delta, top, profile, flatness)(u)
    elif sigma.factors is None and _within_budget(spec, sigma.m):
        out.tensor()
    return out


@dataclass
class MomentReport:
    """Moments of a grid function up to the order forced by p."""

    p: float
    orders: list
    residuals: dict  # multi-index -> complex moment
    normalized: dict  # multi-index -> float relative residual
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.normalized.values())

    def worst(self) -> float:
        return max(self.normalized.values()) if self.normalized else 0.0


def _multi_indices(dim: int, max_order: int):
    if dim == 1:
        for a in range(max_order + 1):
            yield (a,)
    else:
        for a in range(max_order + 1):
            for b in range(max_order + 1 - a):
                yield (a, b)


def moment_check(
    g: GridFunction, p: float, tol: float = 1e-7, margin_tol: float | None = 1e-8
) -> MomentReport:
    """Check int x^alpha g = 0 for all |alpha| <= n/p - n, relative to the
    L^1 mass of g at the box scale.  margin_tol=None skips the decay guard
    (for pieces of an output whose total has already been guarded)."""
    if p <= 0 or p > 1:
        raise DomainError(f"moment check needs 0 < p <= 1, got {p}")
    if margin_tol is not None:
        require_margin_decay(g, margin_tol)
    n = g.spec.dim
    max_order = math.floor(n / p - n + 1e-12)
    mass = lp_norm(g, 1)
    half = g.spec.length / 2.0
    residuals, normalized = {}, {}
    for alpha in _multi_indices(n, max_order):
        mval = moment(g, alpha)
        residuals[alpha] = mval
        scale = mass * half ** sum(alpha)
        normalized[alpha] = abs(mval) / scale if scale > 0 else 0.0
    return MomentReport(
        p=p,
        orders=list(range(max_order + 1)),
        residuals=residuals,
        normalized=normalized,
        tol=tol,
    )


# -- paraproduct decomposition ---------------------------------------------------


def ordering_of(j1: int, j2: int, j3: int, gap: int = 10) -> int:
    """Index (0..5) of the frequency-ordering class owning a level triple.

    The six classes partition Z^3 exactly.  Ties for the top level go to the
    smallest slot index; within a class, the low-low block below the gap is
    owned by the Gamma x Gamma piece without ordering the two low slots, and
    ties between the two lower levels go to the slot pattern listed first.
    """
    if j1 >= j2 and j1 >= j3:
        if j2 <= j1 - gap and j3 <= j1 - gap:
            return 0
        return 0 if j2 >= j3 else 1
    if j2 > j1 and j2 >= j3:
        if j1 <= j2 - gap and j3 <= j2 - gap:
            return 2
        return 2 if j1 >= j3 else 3
    if j1 <= j3 - gap and j2 <= j3 - gap:
        return 4
    return 4 if j1 >= j2 else 5


def ordering_triples(ordering: int, window, gap: int = 10):
    """All triples of the given class with every level inside `window`."""
    lo, hi = window
    out = []
    for j1 in range(lo, hi + 1):
        for j2 in range(lo, hi + 1):
            for j3 in range(lo, hi + 1):
                if ordering_of(j1, j2, j3, gap) == ordering:
                    out.append((j1, j2, j3))
    return out


ORDERING_NAMES = (
    "high1-mid2",
    "high1-mid3",
    "high2-mid1",
    "high2-mid3",
    "high3-mid1",
    "high3-mid2",
)


def _piece_table(gap: int):
    """Filter layout of every paraproduct piece.

    Each entry is (ordering, label, filters) with filters a 3-tuple of
    ('lambda', offset) / ('gamma', offset) applied at top level j to slots
    1..3; offset is subtracted from j.
    """
    g = gap
    table = []
    table.append((0, "t1", (("lambda", 0), ("gamma", g), ("gamma", g))))
    for k in range(g):
        table.append((0, f"t2k[{k}]", (("lambda", 0), ("lambda", k), ("gamma", k))))
    for k in range(g):
        table.append((1, f"k={k}", (("lambda", 0), ("gamma", k + 1), ("lambda", k))))
    table.append((2, "t1", (("gamma", g), ("lambda", 0), ("gamma", g))))
    for k in range(1, g):
        table.append((2, f"k={k}", (("lambda", k), ("lambda", 0), ("gamma", k))))
    for k in range(g):
        table.append((3, f"k={k}", (("gamma", k + 1), ("lambda", 0), ("lambda", k))))
    table.append((4, "t1", (("gamma", g), ("gamma", g), ("lambda", 0))))
    for k in range(1, g):
        table.append((4, f"k={k}", (("lambda", k), ("gamma", k), ("lambda", 0))))
    for k in range(1, g):
        table.append((5, f"k={k}", (("gamma", k + 1), ("lambda", k), ("lambda", 0))))
    return table


@dataclass
class OrderingPieces:
    """Pieces of one frequency-ordering class."""

    name: str
    labels: list
    parts: list

    def total(self) -> GridFunction:
        out = self.parts[0]
        for part in self.parts[1:]:
            out = out + part
        return out


@dataclass
class ParaproductPieces:
    """Paraproduct split of T_sigma(f1, f2, f3) by frequency ordering.

    t1 and t2k are the leading ordering's pieces (high slot 1, low slots
    under Gamma); `orderings` carries all six classes including the leading
    one, in the documented class order.
    """

    gap: int
    orderings: list

    @property
    def t1(self) -> GridFunction:
        return self.orderings[0].parts[0]

    @property
    def t2k(self) -> list:
        return self.orderings[0].parts[1:]

    @property
    def residual(self) -> list:
        return self.orderings[1:]

    def total(self) -> GridFunction:
        out = self.orderings[0].total()
        for o in self.orderings[1:]:
            out = out + o.total()
        return out


def _band_check(fam: LPFamily, f: GridFunction) -> None:
    """Inputs may only carry content on the resolvable shells, i.e. their
    spectrum must vanish outside [2^(j_min - 1), 2^(j_max + 1)]."""
    F = forward_transform(f)
    r = fam.spec.freq_radius()
    outside = (r < 2.0 ** (fam.j_min - 1)) | (r > 2.0 ** (fam.j_max + 1))
    peak = float(np.max(np.abs(F.values)))
    if peak == 0.0:
        return
    leak = float(np.max(np.abs(F.values[outside]))) / peak
    if leak > 1e-12:
        raise DomainError(
            f"input not band-limited to the resolvable shells "
            f"(relative leakage {leak:.2e})"
        )


def paraproduct_decompose(
    sigma: MultiplierTensor,
    part: AnnularPartition,
    fam: LPFamily,
    f1: GridFunction,
    f2: GridFunction,
    f3: GridFunction,
    gap: int = 10,
) -> ParaproductPieces:
    """Split T_sigma(f1,f2,f3) into shell-localized factored pieces.

    Every piece at top level j applies T_{sigma_j} (Theta-localized symbol)
    to Lambda/Gamma-filtered inputs per the class tables; the six class sums
    add up to T_sigma(f1,f2,f3) exactly for band-limited inputs.
    """
    if gap < 1:
        raise DomainError("gap must be >= 1")
    inputs = (f1, f2, f3)
    for f in inputs:
        _band_check(fam, f)
    # shell content reaches one level past j_range at the band edges
    top_range = list(range(fam.j_min - 1, fam.j_max + 2))
    loc_cache = {}

    def sigma_at(j):
        if j not in loc_cache:
            loc_cache[j] = localize(sigma, part, j, mode="theta")
        return loc_cache[j]

    filt_cache = {}

    def filtered(slot, kind, level):
        key = (slot, kind, level)
        if key not in filt_cache:
            prof = fam.psi_hat(level) if kind == "lambda" else fam.theta_hat(level)
            filt_cache[key] = fam.apply_profile(inputs[slot], prof)
        return filt_cache[key]

    spec = sigma.spec
    zero = GridFunction.zeros(spec)
    table = _piece_table(gap)
    per_ordering = {i: ([], []) for i in range(6)}
    for ordering, label, filters in table:
        acc = None
        for j in top_range:
            gs = []
            for slot, (kind, off) in enumerate(filters):
                gs.append(filtered(slot, kind, j - off))
            if any(np.max(np.abs(g.values)) == 0.0 for g in gs):
                continue
            term = apply_fast(sigma_at(j), gs)
            acc = term if acc is None else acc + term
        labels, parts = per_ordering[ordering]
        labels.append(label)
        parts.append(acc if acc is not None else zero)
    orderings = [
        OrderingPieces(name=ORDERING_NAMES[i], labels=per_ordering[i][0], parts=per_ordering[i][1])
        for i in range(6)
    ]
    return ParaproductPieces(gap=gap, orderings=orderings)
