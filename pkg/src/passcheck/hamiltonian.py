"""Dense Hamiltonian eigenvalue oracle for desk-scale models.

Purely imaginary eigenvalues of the Hamiltonian matrix (or generalized
eigenvalues of the extended pencil when I - D'D is near singular) mark
the frequencies where a singular value of H(jw) crosses the passivity
threshold.  Dense only, with an explicit size guard: this oracle exists
to cross-check the sampling pipeline, not to scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .model import (INF, PoleResidueModel, StateSpaceModel, passivity_metric,
                    passivity_metric_many)
from .report import ViolationBand

# Below this distance of sigma_max(D) from 1 the full-matrix form is
# ill-conditioned and the extended pencil is used instead.
D_SWITCH_TOL = 1e-4

DEFAULT_IMAG_TOL = 1e-8
MAX_DENSE_DIM = 4000


class OracleUnavailable(RuntimeError):
    """Problem too large for the dense eigensolver guard."""


@dataclass(frozen=True)
class HamiltonianProblem:
    kind: str                      # "full" | "pencil"
    matrix: np.ndarray = None      # 2N x 2N, full kind
    pencil: tuple = None           # (M_e, K), pencil kind

    @property
    def dim(self):
        return self.matrix.shape[0] if self.kind == "full" else self.pencil[0].shape[0]


@dataclass(frozen=True)
class CrossingSet:
    frequencies: tuple
    imag_tol: float

    def to_list(self):
        return list(self.frequencies)


def build_problem(ss: StateSpaceModel) -> HamiltonianProblem:
    A, B, C, D = ss.A, ss.B, ss.C, ss.D
    P = D.shape[0]
    sig_d = np.linalg.svd(D, compute_uv=False)
    sig_max_d = sig_d[0] if sig_d.size else 0.0
    if abs(sig_max_d - 1.0) < D_SWITCH_TOL:
        N = ss.state_order
        Zn = np.zeros((N, N))
        Znp = np.zeros((N, P))
        Ip = np.eye(P)
        Me = np.block([
            [A, Zn, B, Znp],
            [Zn, -A.T, Znp, -C.T],
            [Znp.T, B.T, -Ip, D.T],
            [C, Znp.T, D, -Ip],
        ])
        K = np.zeros_like(Me)
        K[:2 * N, :2 * N] = np.eye(2 * N)
        return HamiltonianProblem(kind="pencil", pencil=(Me, K))
    R = np.eye(P) - D.T @ D
    S = np.eye(P) - D @ D.T
    Rinv_Bt = np.linalg.solve(R, B.T)
    Sinv_C = np.linalg.solve(S, C)
    M = np.block([
        [A + B @ np.linalg.solve(R, D.T @ C), B @ Rinv_Bt],
        [-C.T @ Sinv_C, -A.T - C.T @ D @ Rinv_Bt],
    ])
    return HamiltonianProblem(kind="full", matrix=M)


def imaginary_crossings(problem: HamiltonianProblem,
                        imag_tol=DEFAULT_IMAG_TOL,
                        dedup_tol=0.0,
                        max_dim=MAX_DENSE_DIM) -> CrossingSet:
    """Non-negative crossing frequencies from the (generalized) spectrum."""
    if problem.dim > max_dim:
        raise OracleUnavailable(
            f"oracle unavailable at this scale: dim {problem.dim} > {max_dim}"
        )
    if problem.kind == "full":
        eigs = scipy.linalg.eigvals(problem.matrix)
    else:
        eigs = scipy.linalg.eigvals(*problem.pencil)
    eigs = eigs[np.isfinite(eigs)]
    imag = eigs[np.abs(eigs.real) <= imag_tol * np.maximum(1.0, np.abs(eigs))]
    freqs = np.sort(imag.imag[imag.imag >= 0.0])
    if dedup_tol > 0 and freqs.size:
        kept = [freqs[0]]
        for w in freqs[1:]:
            if w - kept[-1] > dedup_tol:
                kept.append(w)
        freqs = np.asarray(kept)
    return CrossingSet(frequencies=tuple(float(w) for w in freqs),
                       imag_tol=imag_tol)


def _band_peak(pr: PoleResidueModel, lo, hi, grid=1024):
    """Approximate (omega_peak, phi_peak) of the metric on [lo, hi]."""
    scale = max(lo, 1.0)
    if math.isinf(hi):
        u = np.linspace(0.0, 1.0, grid, endpoint=False)
        omegas = lo + scale * u / (1.0 - u)
    else:
        omegas = np.linspace(lo, hi, grid)
    phis = passivity_metric_many(pr, omegas)
    k = int(np.argmax(phis))
    a = omegas[max(k - 1, 0)]
    b = omegas[min(k + 1, grid - 1)]
    if b > a:
        res = scipy.optimize.minimize_scalar(
            lambda w: -passivity_metric(pr, w), bounds=(a, b),
            method="bounded", options={"xatol": 1e-13 * max(b, 1.0)})
        if -res.fun > phis[k]:
            best_w, best_phi = float(res.x), float(-res.fun)
        else:
            best_w, best_phi = float(omegas[k]), float(phis[k])
    else:
        best_w, best_phi = float(omegas[k]), float(phis[k])
    phi_inf = passivity_metric(pr, INF)
    if math.isinf(hi) and phi_inf >= best_phi:
        return INF, phi_inf
    return best_w, best_phi


def oracle_verdict(ss: StateSpaceModel, pr: PoleResidueModel, gamma=1.0,
                   imag_tol=DEFAULT_IMAG_TOL, max_dim=MAX_DENSE_DIM):
    """(passive, bands): algebraic verdict plus violation localization.

    The crossings split [0, inf) into intervals; the metric sign on each
    interval is probed at an interior point (geometric mean for interior
    intervals, 2 * last crossing for the final one, sigma_max(D) at inf).
    """
    problem = build_problem(ss)
    crossings = imaginary_crossings(
        problem, imag_tol=imag_tol, dedup_tol=1e-9 * pr.p_max, max_dim=max_dim)
    ws = list(crossings.frequencies)
    # Zero can appear as a crossing (eigenvalue at the origin); it does not
    # split [0, inf) into a new interval.
    ws = [w for w in ws if w > 0]
    edges = [0.0] + ws + [INF]
    bands = []
    for lo, hi in zip(edges, edges[1:]):
        if hi == INF:
            probe = 2.0 * lo if lo > 0 else min(1.0, pr.omega_max)
            violated = passivity_metric(pr, probe) > gamma or \
                passivity_metric(pr, INF) > gamma
        else:
            probe = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
            violated = passivity_metric(pr, probe) > gamma
        if violated:
            peak_w, peak_phi = _band_peak(pr, lo, hi)
            bands.append(ViolationBand(omega_lo=lo, omega_hi=hi,
                                       omega_peak=peak_w, phi_peak=peak_phi))
    # Crossings with no flagged interval (tangential touches) still count
    # as non-passive: the metric reaches the threshold.
    passive = not bands and not ws
    return passive, bands
