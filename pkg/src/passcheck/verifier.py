"""Two-stage passivity verification: warp, per-subband search, merge.

Each subband of the warped axis gets an independent tree search; the
evaluated samples are merged in global frequency order, local maxima
above the threshold are retained (which drops spurious subband-edge
maxima dominated by a neighbor across the boundary), and each retained
maximum is grown into a violation band by bisecting the threshold
crossings on either side.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import search
from .model import INF, PoleResidueModel, passivity_metric, passivity_metric_many, validate
from .report import PassivityReport, ViolationBand
from .search import SearchConfig, SubbandResult
from .warp import WarpMap, WarpParams, build_warp_map

DEFAULT_REFINE_TOL = 1e-9


@dataclass(frozen=True)
class ModePreset:
    name: str
    warp_params: WarpParams
    search_config: SearchConfig


_SOFT_SCHEDULE = (7, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
_HARD_SCHEDULE = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
_FINAL_SCHEDULE = (50, 100, 150, 200, 250)

PRESETS = {
    "soft": ModePreset(
        name="soft",
        warp_params=WarpParams(rho=1e3, R_cp=1, R_rp=2, R_hf=5,
                               c=50.0, Q_max=500.0, kappa=3, d=0.5),
        search_config=SearchConfig(M=5, h0=1, delta_zeta=1e-8, delta_theta=1e-8,
                                   delta_eta=1e-3, epsilon0=1e-3, rho_eps=0.1,
                                   budget_schedule=_SOFT_SCHEDULE),
    ),
    "hard": ModePreset(
        name="hard",
        warp_params=WarpParams(rho=math.inf, R_cp=3, R_rp=3, R_hf=6,
                               c=50.0, Q_max=500.0, kappa=3, d=0.5),
        search_config=SearchConfig(M=5, h0=1, delta_zeta=1e-8, delta_theta=1e-8,
                                   delta_eta=1e-2, epsilon0=1e-3, rho_eps=0.1,
                                   budget_schedule=_HARD_SCHEDULE),
    ),
    "final": ModePreset(
        name="final",
        warp_params=WarpParams(rho=math.inf, R_cp=3, R_rp=3, R_hf=6,
                               c=50.0, Q_max=500.0, kappa=3, d=0.5),
        search_config=SearchConfig(M=3, h0=1, delta_zeta=1e-8, delta_theta=1e-8,
                                   delta_eta=1e-3, epsilon0=1e-4, rho_eps=0.1,
                                   budget_schedule=_FINAL_SCHEDULE,
                                   basket_reuse=True),
    ),
}


def preset(name: str) -> ModePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown mode {name!r}; expected one of {sorted(PRESETS)}")


def _max_workers():
    raw = os.environ.get("PASSCHECK_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_subbands(model, wmap, config):
    """Independent searches over every subband; deterministic merge order."""

    def one(ell):
        def theta(t):
            return passivity_metric(model, wmap.unwarp(ell + t))
        return search.run(theta, config)

    workers = _max_workers()
    subbands = range(wmap.L)
    if workers == 1:
        return [one(ell) for ell in subbands]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, subbands))


def merge_samples(results, wmap):
    """Global (omega, zeta, phi, subband) list sorted by zeta, deduplicated."""
    merged = []
    seen = set()
    for ell, res in enumerate(results):
        for z, v in res.samples:
            gz = ell + z
            if gz in seen:
                continue
            seen.add(gz)
            merged.append((wmap.unwarp(gz), gz, v, ell))
    merged.sort(key=lambda rec: rec[1])
    return merged


def postprocess_edge_maxima(samples, gamma=1.0):
    """Indices of retained local maxima with phi > gamma.

    Maxima are judged on the merged global ordering, so a violating
    sample at a subband edge survives only if it dominates its neighbors
    across the boundary.  Plateaus keep their leftmost sample; the global
    first/last samples are half-neighborhood maxima.
    """
    vals = [s[2] for s in samples]
    n = len(vals)
    retained = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and vals[j + 1] == vals[i]:
            j += 1
        left_ok = i == 0 or vals[i - 1] < vals[i]
        right_ok = j == n - 1 or vals[j + 1] < vals[i]
        if left_ok and right_ok and vals[i] > gamma:
            retained.append(i)
        i = j + 1
    return retained


def _bisect_crossing(g, a, b, wmap, refine_tol):
    """Zeta of the gamma crossing bracketed by g(a) > 0 > g(b) or vice versa.

    Bisection runs in the warped coordinate; convergence is judged on the
    relative width of the unwarped bracket.
    """
    ga = g(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if g(mid) * (1 if ga > 0 else -1) > 0:
            a = mid
        else:
            b = mid
        wa, wb = wmap.unwarp(min(a, b)), wmap.unwarp(max(a, b))
        if math.isfinite(wb) and wb - wa <= refine_tol * max(wb, 1e-300):
            break
        if abs(b - a) <= 1e-16:
            break
    return 0.5 * (a + b)


def _polish_peak(g, a, b):
    """Local maximizer of g on [a, b] (bounded scalar search)."""
    if not b > a:
        return a, g(a)
    res = scipy.optimize.minimize_scalar(
        lambda z: -g(z), bounds=(a, b), method="bounded",
        options={"xatol": 1e-14 * max(b - a, 1.0), "maxiter": 500})
    return float(res.x), float(-res.fun)


def extract_bands(samples, model, wmap, retained, gamma=1.0,
                  refine_tol=DEFAULT_REFINE_TOL):
    """Grow each retained maximum into a refined violation band."""

    def g(z):
        return passivity_metric(model, wmap.unwarp(z))

    L = float(wmap.L)
    zetas = [s[1] for s in samples]
    phis = [s[2] for s in samples]
    bands = []
    for idx in retained:
        # Left edge.
        k = idx
        while k >= 0 and phis[k] > gamma:
            k -= 1
        if k >= 0:
            z_lo = _bisect_crossing(lambda z: g(z) - gamma,
                                    zetas[k + 1], zetas[k], wmap, refine_tol)
            omega_lo = wmap.unwarp(z_lo)
        elif g(0.0) > gamma:
            z_lo, omega_lo = 0.0, 0.0
        else:
            z_lo = _bisect_crossing(lambda z: g(z) - gamma,
                                    zetas[0], 0.0, wmap, refine_tol)
            omega_lo = wmap.unwarp(z_lo)
        # Right edge.
        k = idx
        n = len(phis)
        while k < n and phis[k] > gamma:
            k += 1
        if k < n:
            z_hi = _bisect_crossing(lambda z: g(z) - gamma,
                                    zetas[k - 1], zetas[k], wmap, refine_tol)
            omega_hi = wmap.unwarp(z_hi)
        elif g(L) > gamma:
            z_hi, omega_hi = L, INF
        else:
            z_hi = _bisect_crossing(lambda z: g(z) - gamma,
                                    zetas[-1], L, wmap, refine_tol)
            omega_hi = wmap.unwarp(z_hi)
        # Peak: polish between the neighboring samples of the retained max.
        a = max(zetas[idx - 1] if idx > 0 else 0.0, z_lo)
        b = min(zetas[idx + 1] if idx + 1 < n else L, z_hi)
        z_pk, phi_pk = _polish_peak(g, a, b)
        omega_pk = wmap.unwarp(z_pk)
        if phis[idx] > phi_pk:
            omega_pk, phi_pk = wmap.unwarp(zetas[idx]), phis[idx]
        if omega_hi == INF:
            phi_inf = passivity_metric(model, INF)
            if phi_inf >= phi_pk:
                omega_pk, phi_pk = INF, phi_inf
        bands.append(ViolationBand(omega_lo=omega_lo, omega_hi=omega_hi,
                                   omega_peak=omega_pk, phi_peak=phi_pk))
    # Merge overlapping / touching bands.
    bands.sort(key=lambda b: b.omega_lo)
    merged = []
    for b in bands:
        if merged and b.omega_lo <= merged[-1].omega_hi * (1 + refine_tol):
            prev = merged.pop()
            best = prev if prev.phi_peak >= b.phi_peak else b
            merged.append(ViolationBand(
                omega_lo=prev.omega_lo,
                omega_hi=max(prev.omega_hi, b.omega_hi),
                omega_peak=best.omega_peak, phi_peak=best.phi_peak))
        else:
            merged.append(b)
    return merged


def check_passivity(model: PoleResidueModel, mode, gamma=1.0,
                    refine_tol=DEFAULT_REFINE_TOL) -> PassivityReport:
    """Full two-stage verification under a preset (or explicit ModePreset)."""
    problems = validate(model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    if isinstance(mode, str):
        mode = preset(mode)
    t0 = time.perf_counter()
    wmap = build_warp_map(model, mode.warp_params)
    config = mode.search_config
    if config.gamma != gamma:
        config = dataclasses.replace(config, gamma=gamma)
    results = _run_subbands(model, wmap, config)
    samples = merge_samples(results, wmap)
    retained = postprocess_edge_maxima(samples, gamma=gamma)
    bands = extract_bands(samples, model, wmap, retained, gamma=gamma,
                          refine_tol=refine_tol)
    total_k = sum(r.eval_count for r in results)
    passive = not bands and all(s[2] <= gamma for s in samples)
    return PassivityReport(
        passive=passive,
        bands=bands,
        subband_count=wmap.L,
        total_evaluations=total_k,
        samples=samples,
        mode=mode.name,
        wall_time=time.perf_counter() - t0,
        gamma=gamma,
    )


def dense_reference_check(model: PoleResidueModel, count, mode="hard",
                          gamma=1.0):
    """Brute-force sweep: count midpoint samples uniform in the warped axis.

    Returns (violation_found, worst_omega, worst_phi).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if isinstance(mode, str):
        mode = preset(mode)
    wmap = build_warp_map(model, mode.warp_params)
    zetas = (np.arange(count) + 0.5) * (wmap.L / count)
    omegas = wmap.unwarp_many(zetas)
    phis = passivity_metric_many(model, omegas)
    k = int(np.argmax(phis))
    return bool(phis[k] > gamma), float(omegas[k]), float(phis[k])
