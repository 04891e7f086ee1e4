"""Tightness maximization and refinement studies.

A small deterministic Nelder-Mead drives the test-function parameters of a
family toward the largest report ratio for a fixed inequality and geometry;
ratios never exceeding 1 + slack under this stress is the soundness
property the suite asserts.  Refinement studies re-evaluate a fixed
configuration on nested geometry refinements.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InvalidArgument, PreconditionViolated
from .geometry.domain import Domain
from .geometry.fields import Field
from .inequalities import evaluate

_DOF_BOUNDS = {
    "radial_power": [(0.5, 8.0)],
    "radial_bump": [(0.05, 10.0)],
    "polynomial": [(-3.0, 3.0)] * 6,
    "random_smooth": [(-3.0, 3.0)] * 6,
}
_DOF_STEP = {
    "radial_power": 0.35,
    "radial_bump": 0.5,
    "polynomial": 0.4,
    "random_smooth": 0.4,
}


@dataclass
class TightnessResult:
    """Outcome of one ratio-maximization run."""

    inequality: str
    best_ratio: float
    argmax_dof: tuple
    evaluations: int
    refinement_trace: list = dc_field(default_factory=list)
    seed: int = 0
    trace: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "type": "search",
            "inequality": self.inequality,
            "best_ratio": self.best_ratio,
            "argmax_dof": list(self.argmax_dof),
            "evaluations": self.evaluations,
            "refinement_trace": [[int(l), float(x)]
                                 for l, x in self.refinement_trace],
            "seed": self.seed,
            "trace": [float(x) for x in self.trace],
        }


def _clip_dof(kind: str, x: np.ndarray) -> np.ndarray:
    bounds = _DOF_BOUNDS[kind]
    return np.array([min(max(v, lo), hi) for v, (lo, hi) in zip(x, bounds)])


def nelder_mead(objective, x0: np.ndarray, step: float, budget: int,
                clip=None):
    """Simplex maximization with reflection 1, expansion 2, contraction 0.5.

    Deterministic; stops when the evaluation budget is exhausted.  Returns
    ``(best_x, best_value, evaluations, value_trace)``.
    """
    if budget < 1:
        raise InvalidArgument("budget must be >= 1")
    clip = clip or (lambda x: x)
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    evals = 0
    trace = []

    def f(x):
        nonlocal evals
        evals += 1
        val = objective(clip(x))
        trace.append(val)
        return val

    simplex = [clip(x0)]
    values = [f(simplex[0])]
    if budget == 1 or n == 0:
        return simplex[0], values[0], evals, trace
    for i in range(n):
        if evals >= budget:
            break
        xi = x0.copy()
        xi[i] += step
        simplex.append(clip(xi))
        values.append(f(simplex[-1]))

    while evals < budget and len(simplex) == n + 1:
        order = np.argsort(values)[::-1]  # maximizing: best first
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        reflected = clip(centroid + 1.0 * (centroid - worst))
        fr = f(reflected)
        if fr > values[0] and evals < budget:
            expanded = clip(centroid + 2.0 * (centroid - worst))
            fe = f(expanded)
            if fe > fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
            continue
        if fr > values[-2]:
            simplex[-1], values[-1] = reflected, fr
            continue
        if evals >= budget:
            break
        contracted = clip(centroid + 0.5 * (worst - centroid))
        fc = f(contracted)
        if fc > values[-1]:
            simplex[-1], values[-1] = contracted, fc
            continue
        # shrink toward the best point
        for i in range(1, n + 1):
            if evals >= budget:
                break
            simplex[i] = clip(simplex[0] + 0.5 * (simplex[i] - simplex[0]))
            values[i] = f(simplex[i])
    best = int(np.argmax(values))
    return simplex[best], values[best], evals, trace


def maximize_ratio(inequality: str, domain: Domain, family: Field,
                   options: dict, budget: int = 100, seed: int = 0,
                   refine_levels: int = 0) -> TightnessResult:
    """Search the family's parameters for the largest report ratio.

    Degenerate (vacuously passing) reports score 0 so the search moves
    toward genuinely active test functions.  With ``refine_levels > 0`` the
    best member is re-evaluated on that many nested refinements.
    """
    if budget < 1:
        raise InvalidArgument("budget must be >= 1")
    needs_vanishing = inequality not in ("hardy_signed", "hardy",
                                         "hardy_hadamard")
    if needs_vanishing and domain.has_boundary and not family.boundary_vanishing:
        raise PreconditionViolated(
            f"{inequality} needs a boundary-vanishing family")

    rng = np.random.default_rng(seed)
    step = _DOF_STEP[family.kind]
    x0 = np.asarray(family.dof, dtype=float)
    if budget > 1:
        x0 = x0 + 0.05 * step * rng.standard_normal(len(x0))

    def objective(dof):
        fld = family.with_dof(dof)
        try:
            rep = evaluate(inequality, domain, fld, options)
        except PreconditionViolated:
            return 0.0
        if rep.degenerate or not np.isfinite(rep.ratio):
            return 0.0
        return rep.ratio

    best_x, best_val, evals, trace = nelder_mead(
        objective, x0, step, budget,
        clip=lambda x: _clip_dof(family.kind, x))

    refinement = [(0, best_val)]
    dom = domain
    best_field = family.with_dof(best_x)
    for level in range(1, refine_levels + 1):
        dom = dom.refined()
        rep = evaluate(inequality, dom, best_field, options)
        refinement.append((level, rep.ratio))
    return TightnessResult(inequality=inequality, best_ratio=best_val,
                           argmax_dof=tuple(float(v) for v in best_x),
                           evaluations=evals, refinement_trace=refinement,
                           seed=seed, trace=trace)


def refinement_study(inequality: str, domain: Domain, field: Field,
                     options: dict, levels: int = 2):
    """Evaluate one configuration on nested refinements.

    Returns ``(rows, monotone)`` where rows are ``(level, ratio,
    quadrature_error)`` and ``monotone`` flags decreasing successive ratio
    increments.
    """
    if levels < 0:
        raise InvalidArgument("levels must be >= 0")
    rows = []
    dom = domain
    for level in range(levels + 1):
        rep = evaluate(inequality, dom, field, options)
        rows.append((level, rep.ratio, rep.quadrature_error))
        if level < levels:
            dom = dom.refined()
    diffs = [abs(rows[i + 1][1] - rows[i][1]) for i in range(len(rows) - 1)]
    monotone = all(diffs[i + 1] <= diffs[i] + 1e-12
                   for i in range(len(diffs) - 1))
    return rows, monotone


def observed_order(errors) -> float:
    """Least-squares convergence order from per-level errors (halving h)."""
    errors = [max(abs(e), 1e-16) for e in errors]
    if len(errors) < 2:
        return 0.0
    xs = np.arange(len(errors))
    ys = np.log2(errors)
    slope = np.polyfit(xs, ys, 1)[0]
    return float(-slope)
