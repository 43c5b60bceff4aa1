"""Rational macromodel containers and transfer-matrix evaluation.

A model is either a pole-residue expansion

    H(s) = sum_n R_n / (s - p_n) + R0

or an equivalent real state-space realization (A, B, C, D).  Complex
poles are stored once (positive imaginary part) with a pairing flag;
evaluation and realization expand the conjugate partner on the fly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf


class ModelError(ValueError):
    """Raised when a model file or model object is unusable."""


@dataclass(frozen=True)
class PoleResidueModel:
    """Pole-residue form of the transfer matrix.

    ``poles[k]`` with ``is_pair[k] == True`` stands for the conjugate
    pair ``p, conj(p)`` with residues ``R, conj(R)``; such poles are
    stored with non-negative imaginary part.
    """

    poles: tuple
    residues: tuple          # P x P complex arrays, one per stored pole
    is_pair: tuple
    direct_term: np.ndarray  # P x P real
    port_count: int
    omega_max: float

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        object.__setattr__(
            self,
            "residues",
            tuple(np.asarray(r, dtype=complex) for r in self.residues),
        )
        object.__setattr__(self, "is_pair", tuple(bool(f) for f in self.is_pair))
        d = np.asarray(self.direct_term, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "direct_term", d)
        for r in self.residues:
            r.setflags(write=False)

    @property
    def n_terms(self):
        """Number of pole terms of the expanded sum (a pair counts as 2)."""
        return sum(2 if f else 1 for f in self.is_pair)

    def expanded_poles(self):
        """All poles of the expanded sum, conjugates included."""
        out = []
        for p, f in zip(self.poles, self.is_pair):
            out.append(p)
            if f:
                out.append(p.conjugate())
        return out

    @property
    def p_max(self):
        return max(self.omega_max, max(abs(p) for p in self.poles))


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    state_order: int

    def __post_init__(self):
        for name in "ABCD":
            m = np.asarray(getattr(self, name), dtype=float)
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def port_count(self):
        return self.D.shape[0]


@dataclass(frozen=True)
class PassivityThreshold:
    """Passivity threshold; fixed to 1 for scattering representations."""

    gamma: float = 1.0


def validate(model: PoleResidueModel):
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    P = model.port_count
    if P < 1:
        problems.append(f"port_count must be positive, got {P}")
    if not (model.omega_max > 0):
        problems.append(f"omega_max must be > 0, got {model.omega_max}")
    if len(model.poles) != len(model.residues) or len(model.poles) != len(model.is_pair):
        problems.append("poles, residues and is_pair lengths differ")
        return problems
    if model.direct_term.shape != (P, P):
        problems.append(f"direct_term shape {model.direct_term.shape} != ({P}, {P})")
    for k, (p, r, pair) in enumerate(zip(model.poles, model.residues, model.is_pair)):
        if not p.real < 0:
            problems.append(f"pole {k} is not strictly stable (re = {p.real})")
        if r.shape != (P, P):
            problems.append(f"residue {k} shape {r.shape} != ({P}, {P})")
        if pair:
            if p.imag <= 0:
                problems.append(
                    f"pole {k} flagged as pair but imaginary part {p.imag} <= 0"
                )
        else:
            if p.imag != 0:
                problems.append(f"pole {k} has unpaired conjugate (im = {p.imag})")
            elif np.any(r.imag != 0):
                problems.append(f"residue {k} of real pole {k} is not real")
    return problems


def evaluate_transfer(model: PoleResidueModel, omega):
    """H(j*omega) as a P x P complex matrix; omega may be math.inf."""
    if omega == INF:
        return model.direct_term.astype(complex)
    s = 1j * float(omega)
    H = model.direct_term.astype(complex)
    for p, r, pair in zip(model.poles, model.residues, model.is_pair):
        H = H + r / (s - p)
        if pair:
            H = H + r.conjugate() / (s - p.conjugate())
    return H


def evaluate_transfer_many(model: PoleResidueModel, omegas):
    """Vectorized H(j*omega) over a 1-D frequency array -> (K, P, P)."""
    omegas = np.asarray(omegas, dtype=float)
    finite = np.isfinite(omegas)
    s = 1j * omegas[finite]
    H = np.broadcast_to(
        model.direct_term.astype(complex), (omegas.size, *model.direct_term.shape)
    ).copy()
    Hf = H[finite]
    for p, r, pair in zip(model.poles, model.residues, model.is_pair):
        Hf += r[None, :, :] / (s - p)[:, None, None]
        if pair:
            Hf += r.conjugate()[None, :, :] / (s - p.conjugate())[:, None, None]
    H[finite] = Hf
    return H


def passivity_metric(model: PoleResidueModel, omega):
    """Largest singular value of H(j*omega)."""
    H = evaluate_transfer(model, omega)
    return float(np.linalg.svd(H, compute_uv=False)[0])


def passivity_metric_many(model: PoleResidueModel, omegas):
    """Vectorized largest singular value over a frequency array."""
    H = evaluate_transfer_many(model, omegas)
    return np.linalg.svd(H, compute_uv=False)[:, 0]


def realize(model: PoleResidueModel) -> StateSpaceModel:
    """Real block (Gilbert-style) realization of the pole-residue form.

    Each real pole contributes P states, each conjugate pair 2P states,
    so N = n_terms * P for full-rank residues.
    """
    problems = validate(model)
    if problems:
        raise ModelError("cannot realize invalid model: " + "; ".join(problems))
    P = model.port_count
    Ablocks, Brows, Ccols = [], [], []
    I = np.eye(P)
    Z = np.zeros((P, P))
    for p, r, pair in zip(model.poles, model.residues, model.is_pair):
        if pair:
            a, b = p.real, p.imag
            # 2R_re/(s-p_re) style block: C [u I, b I; -b I, u I]^-1 B
            # with B = [I; 0], C = [2 Re R, 2 Im R] reproduces
            # R/(s-p) + conj(R)/(s-conj(p)).
            Ablocks.append(np.block([[a * I, b * I], [-b * I, a * I]]))
            Brows.append(np.vstack([I, Z]))
            Ccols.append(np.hstack([2 * r.real, 2 * r.imag]))
        else:
            Ablocks.append(p.real * I)
            Brows.append(I)
            Ccols.append(r.real.copy())
    if Ablocks:
        from scipy.linalg import block_diag

        A = block_diag(*Ablocks)
        B = np.vstack(Brows)
        C = np.hstack(Ccols)
    else:
        A = np.zeros((0, 0))
        B = np.zeros((0, P))
        C = np.zeros((P, 0))
    return StateSpaceModel(A=A, B=B, C=C, D=model.direct_term.copy(),
                           state_order=A.shape[0])


def ss_transfer(ss: StateSpaceModel, omega):
    """Resolvent-based H(j*omega) for a state-space model (test oracle)."""
    if omega == INF:
        return ss.D.astype(complex)
    s = 1j * float(omega)
    N = ss.state_order
    X = np.linalg.solve(s * np.eye(N) - ss.A, ss.B)
    return ss.C @ X + ss.D


# --- JSON model files ---------------------------------------------------

SCHEMA_FIELDS = ("port_count", "omega_max", "direct_term", "poles", "residues")


def _reject_constant(name):
    raise ModelError(f"model file contains non-finite literal {name!r}")


def _c(entry):
    re, im = float(entry["re"]), float(entry["im"])
    return complex(re, im)


def model_to_dict(model: PoleResidueModel) -> dict:
    return {
        "port_count": model.port_count,
        "omega_max": model.omega_max,
        "direct_term": model.direct_term.tolist(),
        "poles": [
            {"re": p.real, "im": p.imag, "is_pair": f}
            for p, f in zip(model.poles, model.is_pair)
        ],
        "residues": [
            [[{"re": v.real, "im": v.imag} for v in row] for row in r]
            for r in model.residues
        ],
    }


def model_from_dict(doc: dict) -> PoleResidueModel:
    missing = [k for k in SCHEMA_FIELDS if k not in doc]
    if missing:
        raise ModelError(f"model file missing fields: {', '.join(missing)}")
    P = int(doc["port_count"])
    poles = [_c(e) for e in doc["poles"]]
    flags = [bool(e.get("is_pair", False)) for e in doc["poles"]]
    residues = [
        np.array([[_c(v) for v in row] for row in r], dtype=complex)
        for r in doc["residues"]
    ]
    direct = np.asarray(doc["direct_term"], dtype=float)
    for name, arr in (("direct_term", direct),
                      ("residues", np.array([r.view(float) for r in residues]) if residues else np.zeros(0)),
                      ("poles", np.array(poles).view(float) if poles else np.zeros(0))):
        if arr.size and not np.all(np.isfinite(arr)):
            raise ModelError(f"model field {name!r} contains NaN/Inf")
    omega_max = float(doc["omega_max"])
    if not math.isfinite(omega_max):
        raise ModelError("model field 'omega_max' contains NaN/Inf")
    model = PoleResidueModel(
        poles=tuple(poles),
        residues=tuple(residues),
        is_pair=tuple(flags),
        direct_term=direct,
        port_count=P,
        omega_max=omega_max,
    )
    problems = validate(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))
    return model


def save_model(model: PoleResidueModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> PoleResidueModel:
    with open(path) as fh:
        doc = json.load(fh, parse_constant=_reject_constant)
    return model_from_dict(doc)
