"""Pole-based control points and piecewise-linear frequency warping.

Step 1 of the verification pipeline: candidate frequencies are emitted
around every model pole, merged with logarithmic out-of-band samples,
and turned into a strictly increasing control-point chain
0 = w_0 < w_1 < ... < w_L = inf.  The resulting warp maps [0, inf] onto
[0, L], one unit per subband, with a projective map on the last
(infinite) subband.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class WarpParams:
    rho: float = 1e3          # dedup density; inf disables the resolution scan
    R_cp: int = 1             # samples per in-band complex pair
    R_rp: int = 2             # samples per real pole
    R_hf: int = 5             # samples per out-of-band pole
    c: float = 50.0           # bandwidth stretch for high-Q poles
    Q_max: float = 500.0
    kappa: int = 3            # log tail sample count
    d: float = 0.5            # tail extent, decades past omega_max

    def check(self):
        if self.c <= 1 or self.Q_max <= 1 or self.kappa < 1 or self.d <= 0:
            raise ValueError(f"invalid warp parameters: {self}")
        if self.R_cp < 1 or self.R_rp < 2 or self.R_hf < 3:
            warnings.warn(
                f"sample counts outside recommended ranges: "
                f"R_cp={self.R_cp}, R_rp={self.R_rp}, R_hf={self.R_hf}",
                stacklevel=2,
            )


# A pole counts as out-of-band ("hf") when either coordinate magnitude
# exceeds this fraction of omega_max.
HF_FRACTION = 0.9


def pole_samples(poles, params: WarpParams, omega_max):
    """Candidate frequencies emitted by each pole.

    ``poles`` is an iterable of complex values; a conjugate pair is
    represented by its member with positive imaginary part.  Returns a
    flat list of non-negative frequencies.
    """
    out = []
    for p in poles:
        alpha = p.real
        beta = abs(p.imag)
        if max(abs(alpha), beta) > HF_FRACTION * omega_max:
            R = params.R_hf
        elif beta == 0.0:
            R = params.R_rp
        else:
            R = params.R_cp
        if beta > 0.0:
            Q = beta / (2.0 * abs(alpha))
            if Q > params.Q_max:
                alpha = params.c * alpha
        for r in range(-R, R + 1):
            w = beta + alpha * math.tan(r * math.pi / (2.0 * (R + 1)))
            if w >= 0.0:
                out.append(w)
    return out


def tail_samples(omega_max, params: WarpParams):
    """Log-spaced samples past the model band, inf appended last."""
    if not omega_max > 0:
        raise ValueError(f"omega_max must be > 0, got {omega_max}")
    out = [omega_max * 10.0 ** (params.d * nu / params.kappa)
           for nu in range(params.kappa + 1)]
    out[0] = omega_max  # exact at nu = 0
    out.append(INF)
    return out


@dataclass(frozen=True)
class ControlPointSet:
    points: tuple  # sorted, points[0] == 0, points[-1] == inf

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 3 or pts[0] != 0.0 or pts[-1] != INF:
            raise ValueError("control points must run from 0 to inf with L >= 2")
        if any(a >= b for a, b in zip(pts, pts[1:])):
            raise ValueError("control points must be strictly increasing")

    @property
    def subband_count(self):
        return len(self.points) - 1


def assemble_control_points(candidates, params: WarpParams, omega_max,
                            state_order, p_max, protected=()):
    """Sort, deduplicate and thin candidates into a control-point chain.

    Consecutive points closer than dw = p_max / (N * rho) are merged
    keeping the smallest of each cluster; rho = inf disables the scan.
    0, inf and any frequency in ``protected`` survive the scan.
    """
    pts = sorted(set(float(c) for c in candidates) | {0.0, INF} | set(protected))
    if math.isinf(params.rho) or state_order <= 0:
        return ControlPointSet(tuple(pts))
    dw = p_max / (state_order * params.rho)
    keep_always = set(protected) | {0.0, INF}
    kept = []
    for p in pts:
        if p in keep_always or not kept or p - kept[-1] >= dw:
            kept.append(p)
    return ControlPointSet(tuple(kept))


def build_control_points(model, params: WarpParams) -> ControlPointSet:
    """Full Step-1 pipeline for a pole-residue model."""
    params.check()
    cands = pole_samples(model.poles, params, model.omega_max)
    tails = tail_samples(model.omega_max, params)
    return assemble_control_points(
        cands + tails, params, model.omega_max,
        state_order=model.n_terms * model.port_count,
        p_max=model.p_max,
        protected=tuple(t for t in tails if math.isfinite(t)),
    )


class WarpMap:
    """Piecewise-linear bijection between [0, inf] and [0, L]."""

    def __init__(self, control_points: ControlPointSet):
        self.control_points = control_points
        self._finite = control_points.points[:-1]  # w_0 .. w_{L-1}
        self.L = control_points.subband_count

    def warp(self, omega):
        if omega == INF:
            return float(self.L)
        if omega < 0:
            raise ValueError(f"omega must be >= 0, got {omega}")
        pts = self._finite
        last = len(pts) - 1  # index L-1, start of the projective subband
        if omega >= pts[last]:
            return last + (omega - pts[last]) / omega if omega > 0 else float(last)
        ell = bisect.bisect_right(pts, omega) - 1
        return ell + (omega - pts[ell]) / (pts[ell + 1] - pts[ell])

    def unwarp(self, zeta):
        if not 0.0 <= zeta <= self.L:
            raise ValueError(f"zeta must lie in [0, {self.L}], got {zeta}")
        if zeta == self.L:
            return INF
        ell = min(int(math.floor(zeta)), self.L - 1)
        frac = zeta - ell
        pts = self._finite
        if ell == self.L - 1:
            return pts[ell] / (1.0 - frac)
        return pts[ell] + frac * (pts[ell + 1] - pts[ell])

    def unwarp_many(self, zetas):
        """Vectorized inverse map; zeta == L maps to inf."""
        z = np.asarray(zetas, dtype=float)
        pts = np.asarray(self._finite)
        ell = np.clip(np.floor(z).astype(int), 0, self.L - 1)
        frac = z - ell
        out = np.empty_like(z)
        inner = ell < self.L - 1
        out[inner] = pts[ell[inner]] + frac[inner] * (
            pts[ell[inner] + 1] - pts[ell[inner]]
        )
        lastband = ~inner
        with np.errstate(divide="ignore"):
            out[lastband] = pts[-1] / (1.0 - frac[lastband])
        out[z == self.L] = INF
        return out


def build_warp_map(model, params: WarpParams) -> WarpMap:
    return WarpMap(build_control_points(model, params))
