"""Batch experiment engines behind the CLI: randomized boundedness-ratio
studies and vanishing-moment sweeps, with deterministic CSV output and an
order-preserving work queue."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from .config import ExperimentConfig
from .grid import DomainError, GridFunction, GridSpec, lp_norm
from .lp_frame import build_annular_partition, build_lp_family
from .function_spaces import build_hardy_profile, hardy_norm
from .multiplier import (
    MultiplierTensor,
    apply_fast,
    localize,
    ls2_norm,
    make_symbol,
    make_vanishing_multiplier,
    moment_check,
)
from .surrogates import PacketSurrogate, make_surrogate

__all__ = [
    "CSV_SCHEMA",
    "effective_threads",
    "build_symbol",
    "RatioResult",
    "ratio_experiment",
    "MomentResult",
    "moment_experiment",
]

CSV_SCHEMA = 1


def effective_threads(requested: int) -> int:
    """Requested width capped by the TRIHARM_THREADS environment variable."""
    cap = os.environ.get("TRIHARM_THREADS")
    width = max(1, int(requested))
    if cap is not None:
        width = min(width, max(1, int(cap)))
    return width


def _csv_head(cfg: ExperimentConfig, columns: str) -> list:
    lines = [f"# schema={CSV_SCHEMA}"]
    if cfg.timestamp:
        lines.append(f"# timestamp={datetime.now(timezone.utc).isoformat()}")
    lines.append(columns)
    return lines


def build_symbol(cfg: ExperimentConfig, spec: GridSpec, m: int = 3) -> MultiplierTensor:
    """Symbol from the config's named family, vanishing-modified.

    'one' and 'separable_gauss' carry both a factored form (so applications
    never materialize the full tensor) and a closed-form callable (for the
    rescaled sampling inside the Sobolev norm).
    """
    if cfg.symbol == "one":
        ones = np.ones(spec.shape)
        sigma = MultiplierTensor(
            m=m, spec=spec, factors=[ones] * m, fn=lambda *ax: np.ones(ax[0].shape)
        )
    elif cfg.symbol == "separable_gauss":
        xi2 = sum(g * g for g in spec.freq_grids())
        fac = np.exp(-xi2 / (2.0 * cfg.symbol_width**2))
        width = cfg.symbol_width

        def fn(*ax):
            return np.exp(-sum(a * a for a in ax) / (2.0 * width**2))

        sigma = MultiplierTensor(m=m, spec=spec, factors=[fac] * m, fn=fn)
    else:
        params = {}
        if cfg.symbol == "mihlin":
            params["tau"] = cfg.symbol_tau
        if cfg.symbol == "gauss":
            params["width"] = cfg.symbol_width
        if cfg.symbol == "random_band":
            params["seed"] = cfg.symbol_seed
        sigma = make_symbol(spec, m, cfg.symbol, **params)
    if not cfg.vanishing:
        return sigma
    top = cfg.cutoff_top if cfg.cutoff_top > 0 else None
    return make_vanishing_multiplier(
        sigma,
        cfg.delta_value(),
        top=top,
        profile=cfg.cutoff_profile,
        flatness=cfg.cutoff_flatness,
    )


@dataclass
class RatioResult:
    rows: list  # (seed, dilation_log2, ratio) or (seed, dilation, reason)
    max_ratio: float
    median_ratio: float
    csv: str


def _auto_shells(spec: GridSpec, fam, m: int = 3) -> tuple:
    """Highest shell whose triple sums stay inside Nyquist, minus one below."""
    hi = math.floor(math.log2(spec.nyquist / m)) - 1
    hi = min(hi, fam.j_max - 1)
    lo = max(fam.j_min + 1, hi - 1)
    return lo, hi


def ratio_experiment(cfg: ExperimentConfig) -> RatioResult:
    """Hardy-norm ratio study for the boundedness inequality.

    For each seeded input triple (and each dyadic dilation in the sweep)
    computes

        R = ||T_sigma(f1,f2,f3)||_{H^p} /
            (L_s^2[sigma] * prod_i ||f_i||_{H^{p_i}})

    with the maximal-function norm on the output and on inputs with
    p_i <= 1, and the square-function norm on inputs with p_i > 1.
    """
    spec = GridSpec(dim=cfg.dim, n=cfg.n, length=cfg.length)
    fam = build_lp_family(spec, min_shells=3)
    part = build_annular_partition(spec, 3)
    profile = build_hardy_profile(spec)
    sigma = build_symbol(cfg, spec)
    s = float(cfg.s_value())
    ls2 = ls2_norm(sigma, part, s)
    if ls2 == 0.0:
        raise DomainError("symbol has zero Sobolev norm; ratios undefined")
    recips = [float(Fraction(p)) for p in (cfg.p1, cfg.p2, cfg.p3)]
    ps = [1.0 / r for r in recips]
    p_out = 1.0 / sum(recips)
    if cfg.shell_lo != 99 and cfg.shell_hi != 99:
        lo, hi = cfg.shell_lo, cfg.shell_hi
    else:
        lo, hi = _auto_shells(spec, fam)
    base_freq = 2.0**lo

    def one_task(task):
        seed, dlog = task
        t = 2.0**dlog
        inputs = []
        for slot in range(3):
            if cfg.packet_inputs:
                packet = PacketSurrogate(seed * 3 + slot + 1000 * cfg.input_seed, base_freq)
                f = packet.sample(spec, t=t, recip_p=recips[slot])
            else:
                f = make_surrogate(
                    spec, fam, seed * 3 + slot + 1000 * cfg.input_seed,
                    shells=(lo, hi), window=(cfg.window_flat, cfg.window_zero),
                )
            inputs.append(f)
        norms = []
        for f, p in zip(inputs, ps):
            method = "maximal" if p <= 1 else "square"
            norms.append(
                hardy_norm(f, p, method, profile=profile, fam=fam, margin_tol=cfg.margin_tol)
            )
        if min(norms) == 0.0:
            return ("skip", "zero denominator")
        out = apply_fast(sigma, inputs)
        num = hardy_norm(out, p_out, "maximal", profile=profile, fam=fam,
                         margin_tol=cfg.margin_tol)
        ratio = num / (ls2 * float(np.prod(norms)))
        return ("ok", ratio)

    tasks = [(seed, d) for seed in range(cfg.input_count) for d in cfg.dilations]
    width = effective_threads(cfg.threads)
    if width > 1:
        with ThreadPoolExecutor(max_workers=width) as pool:
            results = list(pool.map(one_task, tasks))
    else:
        results = [one_task(t) for t in tasks]

    rows, ratios = [], []
    lines = _csv_head(cfg, "seed,dilation_log2,ratio")
    for (seed, dlog), (status, payload) in zip(tasks, results):
        if status == "ok":
            rows.append((seed, dlog, payload))
            ratios.append(payload)
            lines.append(f"{seed},{dlog},{payload:.12g}")
        else:
            rows.append((seed, dlog, payload))
            lines.append(f"{seed},{dlog},skipped:{payload.replace(' ', '_')}")
    max_ratio = max(ratios) if ratios else float("nan")
    med = float(np.median(ratios)) if ratios else float("nan")
    lines.append(f"# max={max_ratio:.12g}")
    lines.append(f"# median={med:.12g}")
    csv = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(csv)
    return RatioResult(rows=rows, max_ratio=max_ratio, median_ratio=med, csv=csv)


@dataclass
class MomentResult:
    rows: list  # (piece, order, residual, passed)
    worst: dict  # order -> worst residual
    all_passed: bool
    csv: str


def moment_experiment(cfg: ExperimentConfig, pieces: bool = True, tol: float = 1e-7) -> MomentResult:
    """Moment residuals of T_sigma outputs (and of each shell-localized
    piece) for banded surrogate inputs, relative to the total output mass."""
    spec = GridSpec(dim=cfg.dim, n=cfg.n, length=cfg.length)
    fam = build_lp_family(spec, min_shells=3)
    part = build_annular_partition(spec, 3)
    sigma = build_symbol(cfg, spec)
    p = 1.0 / float(sum(Fraction(x) for x in (cfg.p1, cfg.p2, cfg.p3)))
    if cfg.shell_lo != 99 and cfg.shell_hi != 99:
        lo, hi = cfg.shell_lo, cfg.shell_hi
    else:
        lo, hi = _auto_shells(spec, fam)
    inputs = [
        make_surrogate(spec, fam, cfg.input_seed * 3 + slot,
                       shells=(lo, hi), window=(cfg.window_flat, cfg.window_zero))
        for slot in range(3)
    ]
    out = apply_fast(sigma, inputs)
    mass = lp_norm(out, 1)
    half = spec.length / 2.0
    max_order = math.floor(spec.dim / p - spec.dim + 1e-12)

    targets = [("T_sigma", out)]
    if pieces:
        for j in fam.j_range:
            sj = localize(sigma, part, j, mode="theta")
            targets.append((f"T_sigma_{j}", apply_fast(sj, inputs)))

    rows = []
    worst = {a: 0.0 for a in range(max_order + 1)}
    lines = _csv_head(cfg, "piece,order,residual,passed")
    all_ok = True
    for name, g in targets:
        guard = cfg.margin_tol if name == "T_sigma" else None
        report = moment_check(g, p, tol=tol, margin_tol=guard)
        for alpha, mval in report.residuals.items():
            order = sum(alpha)
            resid = abs(mval) / (mass * half**order)
            ok = resid <= tol
            all_ok = all_ok and ok
            worst[order] = max(worst[order], resid)
            rows.append((name, order, resid, ok))
            lines.append(f"{name},{order},{resid:.12g},{int(ok)}")
    for order, val in worst.items():
        lines.append(f"# worst_order_{order}={val:.12g}")
    csv = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(csv)
    return MomentResult(rows=rows, worst=worst, all_passed=all_ok, csv=csv)
