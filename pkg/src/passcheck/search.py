"""Threshold-aware multi-scale tree search on the unit interval.

An M-ary tree (M odd) partitions [0, 1] into cells; the leaf with the
largest metric value at the current level is expanded into M children,
with the middle child inheriting the parent's value (relabeling, never
re-evaluated).  Children are classified after every expansion: either
they remain refinement candidates, or a stop condition freezes them
into the basket and the search restarts from the shallowest level.
Budget overruns either escalate through a schedule (when everything
looks passive but sits close to the threshold) or end the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DEFAULT_GAMMA = 1.0


class EvaluatorError(RuntimeError):
    """Evaluator raised mid-search; carries the partial result."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SearchConfig:
    M: int = 5
    h0: int = 1
    delta_zeta: float = 1e-8    # S1 resolution stop
    delta_theta: float = 1e-8   # S2 variation stop
    delta_eta: float = 1e-3     # gate for S3 / U3
    epsilon0: float = 1e-3      # U2 relative closeness, decays on escalation
    rho_eps: float = 0.1
    budget_schedule: tuple = (7, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    basket_reuse: bool = False
    gamma: float = DEFAULT_GAMMA

    def check(self):
        if self.M < 3 or self.M % 2 == 0:
            raise ValueError(f"M must be odd and >= 3, got {self.M}")
        if self.h0 < 0:
            raise ValueError(f"h0 must be >= 0, got {self.h0}")
        for name in ("delta_zeta", "delta_theta", "delta_eta", "epsilon0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.rho_eps < 1:
            raise ValueError(f"rho_eps must lie in (0, 1), got {self.rho_eps}")
        sched = self.budget_schedule
        if not sched or any(a >= b for a, b in zip(sched, sched[1:])):
            raise ValueError("budget_schedule must be non-empty, strictly increasing")


def cell_center(M, h, i):
    return (i + 0.5) * M ** (-h)


@dataclass
class SubbandResult:
    samples: list              # (zeta, theta) sorted by zeta
    leaves: list               # (level, index, theta) sorted by cell position
    theta_max: float
    zeta_at_max: float
    eval_count: int
    gamma: float
    valid: bool = True

    @property
    def violations(self):
        return [(z, t) for z, t in self.samples if t > self.gamma]


def stop_conditions(config: SearchConfig, h, children):
    """(S1, S2, S3) for the M child values of one expansion, index order."""
    child_res = config.M ** (-h - 1)
    delta = max(abs(b - a) for a, b in zip(children, children[1:]))
    theta_hat = max(children)
    s1 = child_res < config.delta_zeta
    s2 = delta < config.delta_theta
    s3 = child_res < config.delta_eta and delta < abs(theta_hat - config.gamma)
    return s1, s2, s3


def budget_conditions(config: SearchConfig, epsilon, h, children):
    """(U1, U2, U3); the escalation trigger is U1 and (U2 or U3)."""
    child_res = config.M ** (-h - 1)
    delta = max(abs(b - a) for a, b in zip(children, children[1:]))
    theta_hat = max(children)
    u1 = theta_hat < config.gamma
    rel = (config.gamma - theta_hat) / theta_hat if theta_hat > 0 else math.inf
    u2 = rel < epsilon
    u3 = child_res < config.delta_eta and abs(config.gamma - theta_hat) < delta
    return u1, u2, u3


def _select(candidates, h):
    """Best candidate key at level h: largest value, then smallest index."""
    best = None
    for (lev, i), val in candidates.items():
        if lev != h:
            continue
        if best is None or val > best[1] or (val == best[1] and i < best[0][1]):
            best = ((lev, i), val)
    return best


def run(f, config: SearchConfig, trace=None) -> SubbandResult:
    """Locate maxima of ``f`` on [0, 1] relative to the threshold.

    ``trace``, when given, is a list collecting one dict per iteration
    (level, expanded leaf, flags, counters) for debugging/regression.
    """
    config.check()
    M = config.M
    eval_count = 0

    def evaluate(zeta):
        nonlocal eval_count
        eval_count += 1
        return float(f(zeta))

    candidates = {}
    basket = {}
    h = config.h0
    theta_max = -math.inf
    zeta_at_max = math.nan

    def note_max(zeta, value):
        nonlocal theta_max, zeta_at_max
        if value > theta_max:
            theta_max, zeta_at_max = value, zeta

    def partial(valid):
        merged = {**candidates, **basket}
        leaves = sorted(
            ((lev, i, val) for (lev, i), val in merged.items()),
            key=lambda t: (t[1] * M ** (-t[0]), t[0]),
        )
        samples = sorted(
            (cell_center(M, lev, i), val) for (lev, i), val in merged.items()
        )
        return SubbandResult(samples, leaves, theta_max, zeta_at_max,
                             eval_count, config.gamma, valid=valid)

    try:
        for i in range(M ** config.h0):
            z = cell_center(M, config.h0, i)
            v = evaluate(z)
            candidates[(config.h0, i)] = v
            note_max(z, v)
    except Exception as exc:  # noqa: BLE001 - contract: flag partial invalid
        raise EvaluatorError(str(exc), partial(valid=False)) from exc

    sched = config.budget_schedule
    budget_idx = 0
    budget = sched[0]
    epsilon = config.epsilon0
    mu = 0

    while candidates:
        if all(lev != h for lev, _ in candidates):
            h = min(lev for lev, _ in candidates)
        (h, i), parent_val = _select(candidates, h)
        del candidates[(h, i)]
        mid = M * i + M // 2
        children = {}
        try:
            for j in range(M * i, M * (i + 1)):
                if j == mid:
                    children[(h + 1, j)] = parent_val
                else:
                    z = cell_center(M, h + 1, j)
                    v = evaluate(z)
                    children[(h + 1, j)] = v
                    note_max(z, v)
        except Exception as exc:  # noqa: BLE001
            basket.update(children)
            raise EvaluatorError(str(exc), partial(valid=False)) from exc

        child_vals = [children[(h + 1, j)] for j in range(M * i, M * (i + 1))]
        s1, s2, s3 = stop_conditions(config, h, child_vals)
        u1, u2, u3 = budget_conditions(config, epsilon, h, child_vals)
        eval_count_now = eval_count

        budget_return = False
        if eval_count_now > budget:
            if u1 and (u2 or u3):
                budget_idx += 1
                if budget_idx >= len(sched):
                    budget_return = True
                else:
                    budget = sched[budget_idx]
                    epsilon = config.rho_eps * epsilon
            else:
                budget_return = True

        if trace is not None:
            trace.append({
                "mu": mu, "h": h, "leaf": i,
                "S": [s1, s2, s3], "U": [u1, u2, u3],
                "K": eval_count_now, "budget": budget, "epsilon": epsilon,
                "theta_max": theta_max, "returning": budget_return,
            })

        if budget_return:
            basket.update(children)
            break

        if s1 or s2 or s3:
            basket.update(children)
            if config.basket_reuse:
                candidates.update(basket)
                basket = {}
            h = min(lev for lev, _ in list(candidates) + list(basket))
            epsilon = config.epsilon0
        else:
            candidates.update(children)
            h = h + 1
        mu += 1

    return partial(valid=True)
