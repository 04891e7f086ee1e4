"""Evaluator catalog: assemble both sides of each inequality and report.

Every evaluator reduces to a handful of weighted integrals over a
:class:`~cknlab.geometry.domain.Domain` plus closed-form constants, and
emits an :class:`InequalityReport` with the term breakdown, the tightness
ratio, a propagated quadrature error estimate and a pass/fail verdict at
the slack policy ``max(5e-2, 3 * quadrature_error)``.

The catalog ids:

- ``hardy_signed``: the sharper Hardy form with the signed boundary term
  (nonnegative test functions, exponents above 1).
- ``hardy``: the general-sign Hardy form with the split right-hand side and
  the unsigned boundary term; minimal submanifolds may drop the split
  coefficient.
- ``hardy_hadamard``: the same in a nonpositively curved model (weights are
  plain powers of the distance).
- ``sobolev_hs``: the Hoffman-Spruck / Michael-Simon type Sobolev
  inequality for test functions vanishing on the boundary.
- ``weighted_sobolev``: its power-weighted refinement, with the two
  normal-component terms on the left.
- ``ckn_single``: the single-factor interpolation inequality.
- ``ckn``: the two-factor Caffarelli-Kohn-Nirenberg type inequality.
- ``mss_weighted``, ``hardy_derived``, ``gagliardo_nirenberg``, ``nash``,
  ``heisenberg_pauli_weyl``: its classical specializations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import constants as cn
from .errors import (
    InvalidArgument,
    InvalidExponent,
    NotMinimal,
    ParameterConflict,
    PreconditionViolated,
)
from .geometry.domain import Domain, Qty, boundary_integral, weighted_integral

MINIMAL_TOL = 1e-4
DEFAULT_SLACK_FLOOR = 5e-2

CATALOG_IDS = (
    "hardy_signed", "hardy", "hardy_hadamard", "sobolev_hs",
    "weighted_sobolev", "ckn_single", "ckn", "mss_weighted", "hardy_derived",
    "gagliardo_nirenberg", "nash", "heisenberg_pauli_weyl",
)


@dataclass
class InequalityReport:
    """Structured outcome of one inequality evaluation."""

    id: str
    params: dict
    constants: dict
    lhs_terms: dict
    rhs_terms: dict
    lhs_total: float
    rhs_total: float
    ratio: float
    quadrature_error: float
    slack: float
    satisfied: bool
    degenerate: bool
    hypothesis_status: dict
    mesh_stats: dict
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "type": "report",
            "id": self.id,
            "params": self.params,
            "constants": self.constants,
            "lhs_terms": self.lhs_terms,
            "rhs_terms": self.rhs_terms,
            "lhs_total": self.lhs_total,
            "rhs_total": self.rhs_total,
            "ratio": self.ratio,
            "quadrature_error": self.quadrature_error,
            "slack": self.slack,
            "satisfied": self.satisfied,
            "degenerate": self.degenerate,
            "hypothesis_status": self.hypothesis_status,
            "mesh_stats": self.mesh_stats,
            "notes": list(self.notes),
        }

    def csv_row(self) -> dict:
        return {
            "id": self.id,
            "ratio": self.ratio,
            "lhs_total": self.lhs_total,
            "rhs_total": self.rhs_total,
            "quadrature_error": self.quadrature_error,
            "slack": self.slack,
            "satisfied": int(self.satisfied),
            "degenerate": int(self.degenerate),
            "generator": self.mesh_stats.get("generator", ""),
            "cells": self.mesh_stats.get("cells", 0),
        }


def _assemble(id, params, constants, lhs_terms, rhs_terms, domain,
              slack=None, hypothesis=None, notes=None,
              field_sup=None) -> InequalityReport:
    lhs = sum(lhs_terms.values(), Qty(0.0))
    rhs = sum(rhs_terms.values(), Qty(0.0))
    degenerate = abs(lhs.value) < 1e-250 and abs(rhs.value) < 1e-250
    if field_sup is not None and field_sup < 1e-10:
        # the discretized test function is numerically zero; any ratio
        # would be roundoff noise
        degenerate = True
    if degenerate:
        ratio, qerr = 0.0, 0.0
        note = ["degenerate: both sides vanish (vacuous pass)"]
    elif rhs.value <= 0:
        ratio, qerr = math.inf, 0.0
        note = ["right-hand side nonpositive with nonzero left-hand side"]
    else:
        q = lhs / rhs
        ratio, qerr = q.value, q.rel_err
        note = []
    eff_slack = slack if slack is not None else max(DEFAULT_SLACK_FLOOR,
                                                    3.0 * qerr)
    satisfied = degenerate or ratio <= 1.0 + eff_slack
    return InequalityReport(
        id=id,
        params={k: _jsonable(v) for k, v in params.items()},
        constants={k: _jsonable(v) for k, v in constants.items()},
        lhs_terms={k: v.value for k, v in lhs_terms.items()},
        rhs_terms={k: v.value for k, v in rhs_terms.items()},
        lhs_total=lhs.value, rhs_total=rhs.value, ratio=ratio,
        quadrature_error=qerr, slack=eff_slack, satisfied=satisfied,
        degenerate=degenerate,
        hypothesis_status=hypothesis or {"status": "verified", "reasons": []},
        mesh_stats=domain.describe(),
        notes=(notes or []) + note)


def _jsonable(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return float(v)


def _require_vanishing(domain: Domain, field):
    if domain.has_boundary and not field.boundary_vanishing:
        raise PreconditionViolated(
            "this inequality needs a test function vanishing on the boundary")


def _resolve_r0(domain: Domain, r0):
    """Radius of the ball containing the domain, and the slope value there."""
    amb = domain.ambient
    if r0 is None:
        r0 = domain.max_radius * (1.0 + 1e-9)
    if domain.max_radius > r0 * (1.0 + 1e-9):
        raise PreconditionViolated(
            f"domain reaches radius {domain.max_radius:.6g} outside the "
            f"ball of radius {r0:.6g}")
    if amb.kind == "warped":
        if r0 >= amb.warp.increasing_limit:
            raise PreconditionViolated(
                "ball radius must stay below the increasing branch limit")
    _, hp0 = amb.h_values(np.asarray(r0))
    hp0 = float(hp0)
    if hp0 <= 0:
        raise PreconditionViolated("the slope at the ball radius must be positive")
    return float(r0), hp0


def _minimality(domain: Domain, field, minimal: bool):
    if not minimal:
        return
    hi, _ = domain.sites(0.0)
    worst = float(np.max(hi.h_norm)) if len(hi.h_norm) else 0.0
    if worst > MINIMAL_TOL:
        raise NotMinimal(
            f"max |H| = {worst:.3e} exceeds the minimality tolerance")


def _field_sup(domain: Domain, field) -> float:
    bound = domain.bind(field)
    hi, _ = domain.sites(0.0, bound)
    return float(np.max(np.abs(hi.psi))) if len(hi.psi) else 0.0


def _vol_supp(domain: Domain, field) -> float:
    bound = domain.bind(field)
    hi, _ = domain.sites(0.0, bound)
    return float(np.sum(hi.density[np.abs(hi.psi) > 0]))


def _check_psi_nonneg(domain: Domain, field):
    bound = domain.bind(field)
    hi, _ = domain.sites(0.0, bound)
    if len(hi.psi) and float(np.min(hi.psi)) < -1e-12:
        raise PreconditionViolated("test function must be nonnegative")


# ---------------------------------------------------------------------------
# Hardy family
# ---------------------------------------------------------------------------

def eval_hardy_signed(domain: Domain, field, p: float, gamma: float,
                      r0: float = None, slack: float = None) -> InequalityReport:
    """Sharper Hardy form: nonnegative test functions, signed boundary term."""
    if gamma >= domain.k:
        raise InvalidExponent("weight exponent must be below the dimension")
    if p < 1:
        raise InvalidArgument("p must be >= 1")
    if p == 1.0:
        rep = eval_hardy(domain, field, p, gamma, r0=r0, slack=slack)
        rep.notes.append("p = 1 routed to the general-sign evaluator")
        return rep
    _check_psi_nonneg(domain, field)
    k = domain.k
    r0, hp0 = _resolve_r0(domain, r0)
    c1 = (k - gamma) ** p * hp0 ** (p - 1.0) / p ** p
    c2 = gamma * ((k - gamma) * hp0) ** (p - 1.0) / p ** (p - 1.0)
    cb = ((k - gamma) * hp0) ** (p - 1.0) / p ** (p - 1.0)
    i1 = weighted_integral(domain, lambda b: np.abs(b.psi) ** p, gamma,
                           "h_power_times_hprime", field=field)
    i2 = weighted_integral(domain,
                           lambda b: np.abs(b.psi) ** p * b.perp ** 2,
                           gamma, "h_power_times_hprime", field=field)
    r1 = weighted_integral(
        domain,
        lambda b: (b.grad_psi ** 2 + b.psi ** 2 * b.h_norm ** 2 / p ** 2)
        ** (p / 2.0),
        gamma - p, "h_power", field=field)
    bterm = boundary_integral(domain, lambda b: np.abs(b.psi) ** p,
                              gamma - 1.0, with_radial_conormal=True,
                              field=field) if domain.has_boundary else Qty(0.0)
    notes = []
    if c2 > 0 and i2.value > 0:
        notes.append("normal-component term strictly enlarges the left-hand side")
    if not domain.has_boundary:
        notes.append("closed submanifold: boundary term is zero")
    return _assemble(
        "hardy_signed",
        {"p": p, "gamma": gamma, "r0": r0, "k": k},
        {"hardy_coeff": c1, "perp_coeff": c2, "boundary_coeff": cb,
         "h_prime_r0": hp0},
        {"weighted_norm": c1 * i1, "perp_term": c2 * i2},
        {"gradient_term": r1, "boundary_term": cb * bterm},
        domain, slack=slack, notes=notes,
        field_sup=_field_sup(domain, field))


def eval_hardy(domain: Domain, field, p: float, gamma: float,
               r0: float = None, minimal: bool = False,
               slack: float = None) -> InequalityReport:
    """General-sign Hardy form with split right-hand side."""
    if gamma >= domain.k:
        raise InvalidExponent("weight exponent must be below the dimension")
    if p < 1:
        raise InvalidArgument("p must be >= 1")
    _minimality(domain, field, minimal)
    k = domain.k
    r0, hp0 = _resolve_r0(domain, r0)
    a_p = 1.0 if minimal else cn.pair_power_upper(p)
    c1 = (k - gamma) ** p * hp0 ** (p - 1.0) / p ** p
    c2 = gamma * ((k - gamma) * hp0) ** (p - 1.0) / p ** (p - 1.0)
    cb = ((k - gamma) * hp0) ** (p - 1.0) / p ** (p - 1.0)
    i1 = weighted_integral(domain, lambda b: np.abs(b.psi) ** p, gamma,
                           "h_power_times_hprime", field=field)
    i2 = weighted_integral(domain,
                           lambda b: np.abs(b.psi) ** p * b.perp ** 2,
                           gamma, "h_power_times_hprime", field=field)
    rgrad = weighted_integral(domain, lambda b: b.grad_psi ** p,
                              gamma - p, "h_power", field=field)
    rcurv = weighted_integral(
        domain, lambda b: np.abs(b.psi) ** p * b.h_norm ** p / p ** p,
        gamma - p, "h_power", field=field)
    bterm = boundary_integral(domain, lambda b: np.abs(b.psi) ** p,
                              gamma - 1.0, with_radial_conormal=False,
                              field=field) if domain.has_boundary else Qty(0.0)
    notes = []
    if minimal:
        notes.append("minimal submanifold: split coefficient taken as 1")
    if not domain.has_boundary:
        notes.append("closed submanifold: boundary term is zero")
    return _assemble(
        "hardy",
        {"p": p, "gamma": gamma, "r0": r0, "k": k, "minimal": minimal},
        {"hardy_coeff": c1, "perp_coeff": c2, "boundary_coeff": cb,
         "split_coeff": a_p, "h_prime_r0": hp0},
        {"weighted_norm": c1 * i1, "perp_term": c2 * i2},
        {"gradient_term": a_p * rgrad, "curvature_term": a_p * rcurv,
         "boundary_term": cb * bterm},
        domain, slack=slack, notes=notes,
        field_sup=_field_sup(domain, field))


def eval_hardy_hadamard(domain: Domain, field, p: float, gamma: float,
                        slack: float = None) -> InequalityReport:
    """Hardy form in a nonpositively curved model: plain distance powers."""
    if domain.ambient.kind != "euclidean":
        raise PreconditionViolated(
            "the flat-weight Hardy form needs the zero-curvature model ambient")
    if not 1 <= p < domain.k:
        raise InvalidExponent("needs 1 <= p < k")
    rep = eval_hardy(domain, field, p, gamma, slack=slack)
    rep.id = "hardy_hadamard"
    rep.notes.append("zero-curvature comparison: weights are distance powers")
    return rep


# ---------------------------------------------------------------------------
# Sobolev family
# ---------------------------------------------------------------------------

def _sobolev_constant(domain: Domain, p: float) -> float:
    return cn.hoffman_spruck_optimal(domain.k, p,
                                     flat_ambient=domain.ambient.kind == "euclidean")


def _sobolev_side_conditions(domain: Domain, field, inj_radius):
    """Support-volume side conditions of the dimensional Sobolev constant."""
    k = domain.k
    reasons = []
    vol = _vol_supp(domain, field)
    jbar = ((k + 1) / cn.unit_ball_volume(k) * vol) ** (1.0 / k)
    amb = domain.ambient
    b = 0.0
    if amb.kind == "warped" and amb.warp.profile.kind == "constant":
        b = math.sqrt(amb.warp.profile.b_squared)
    status = "verified"
    if b > 0:
        if jbar >= 1.0 / b:
            status = "unverified"
            reasons.append("support volume too large for the curvature bound")
    if status == "verified":
        if b == 0:
            needed = 2.0 * jbar
        else:
            needed = 2.0 / b * math.asin(min(jbar * b, 1.0))
        if inj_radius is None:
            if amb.kind == "euclidean":
                reasons.append("flat model: injectivity radius is infinite")
            else:
                status = "unverified"
                reasons.append("injectivity radius not declared")
        elif needed > inj_radius:
            status = "unverified"
            reasons.append("support too large for the declared injectivity radius")
    return {"status": status, "reasons": reasons,
            "support_volume": vol, "support_ball_radius": jbar}


def _volume_hypothesis(domain: Domain, vol_threshold):
    reasons = []
    status = "verified"
    if domain.k >= 7:
        vol = weighted_integral(domain, 1.0, 0.0).value
        if vol_threshold is None:
            status = "unverified"
            reasons.append("dimension >= 7 and no volume threshold declared")
        elif vol >= vol_threshold:
            status = "unverified"
            reasons.append("volume exceeds the declared threshold")
    reasons.append("volume threshold depends only on the ambient injectivity "
                   "radius over the submanifold and the ball radius")
    return status, reasons


def eval_sobolev_hs(domain: Domain, field, p: float, inj_radius: float = None,
                    vol_threshold: float = None,
                    slack: float = None) -> InequalityReport:
    """Dimensional Sobolev inequality for boundary-vanishing test functions."""
    k = domain.k
    if not 1 <= p < k:
        raise InvalidExponent("needs 1 <= p < k")
    _require_vanishing(domain, field)
    p_star = k * p / (k - p)
    s_const = _sobolev_constant(domain, p)
    lhs_int = weighted_integral(domain, lambda b: np.abs(b.psi) ** p_star,
                                0.0, field=field)
    rhs_int = weighted_integral(
        domain,
        lambda b: b.grad_psi ** p + np.abs(b.psi) ** p * b.h_norm ** p / p ** p,
        0.0, field=field)
    hyp = _sobolev_side_conditions(domain, field, inj_radius)
    vstat, vreasons = _volume_hypothesis(domain, vol_threshold)
    if vstat == "unverified":
        hyp["status"] = "unverified"
    hyp["reasons"] = hyp["reasons"] + vreasons
    return _assemble(
        "sobolev_hs",
        {"p": p, "p_star": p_star, "k": k},
        {"sobolev_const": s_const},
        {"critical_norm": lhs_int.powf(p / p_star)},
        {"gradient_term": s_const * rhs_int},
        domain, slack=slack, hypothesis=hyp,
        field_sup=_field_sup(domain, field))


def eval_weighted_sobolev(domain: Domain, field, p: float, alpha: float,
                          r0: float = None, vol_threshold: float = None,
                          slack: float = None) -> InequalityReport:
    """Power-weighted Sobolev inequality with normal-component terms."""
    k = domain.k
    if not 1 <= p < k:
        raise InvalidExponent("needs 1 <= p < k")
    if p * (alpha + 1.0) >= k:
        raise InvalidExponent("needs p * (alpha + 1) < k")
    _require_vanishing(domain, field)
    r0, hp0 = _resolve_r0(domain, r0)
    p_star = k * p / (k - p)
    s_const = _sobolev_constant(domain, p)
    wc = cn.weighted_sobolev_constants(k, p, alpha, hp0)
    gw = p * (alpha + 1.0)
    lhs_crit = weighted_integral(domain, lambda b: np.abs(b.psi) ** p_star,
                                 p_star * alpha, field=field)
    lhs_perp2 = weighted_integral(
        domain, lambda b: np.abs(b.psi) ** p * b.perp ** 2, gw,
        "h_power_times_hprime", field=field)
    lhs_perpp = weighted_integral(
        domain, lambda b: np.abs(b.psi) ** p * b.perp ** p, gw,
        "h_power_times_hprime", field=field)
    rhs_int = weighted_integral(
        domain,
        lambda b: b.grad_psi ** p + np.abs(b.psi) ** p * b.h_norm ** p / p ** p,
        p * alpha, field=field)
    vstat, vreasons = _volume_hypothesis(domain, vol_threshold)
    hyp = {"status": vstat, "reasons": vreasons}
    return _assemble(
        "weighted_sobolev",
        {"p": p, "alpha": alpha, "p_star": p_star, "r0": r0, "k": k},
        {"sobolev_const": s_const, "grad_coeff": wc.grad_coeff,
         "perp_sq_coeff": wc.perp_sq_coeff, "perp_p_coeff": wc.perp_p_coeff,
         "h_prime_r0": hp0},
        {"critical_norm": (1.0 / s_const) * lhs_crit.powf(p / p_star),
         "perp_sq_term": wc.perp_sq_coeff * lhs_perp2,
         "perp_p_term": wc.perp_p_coeff * lhs_perpp},
        {"gradient_term": wc.grad_coeff * rhs_int},
        domain, slack=slack, hypothesis=hyp,
        field_sup=_field_sup(domain, field))


# ---------------------------------------------------------------------------
# Interpolation family
# ---------------------------------------------------------------------------

def eval_ckn(domain: Domain, field, params: cn.ParameterSet,
             r0: float = None, vol_threshold: float = None,
             slack: float = None, _id: str = "ckn",
             _notes=None) -> InequalityReport:
    """Two-factor interpolation inequality for boundary-vanishing functions.

    The right-hand constant is the single-factor constant raised to ``a/p``,
    which is what the interpolation argument yields; at ``a = 1`` it matches
    the single-factor report, and at ``a = 0`` the inequality collapses to
    the exact identity between the two sides.
    """
    params.validate()
    k = domain.k
    if params.k != k:
        raise ParameterConflict(
            f"parameter dimension {params.k} != domain dimension {k}")
    _require_vanishing(domain, field)
    r0, hp0 = _resolve_r0(domain, r0)
    p = float(params.p)
    q = float(params.q)
    t = float(params.t)
    a = float(params.a)
    alpha = float(params.alpha)
    beta = float(params.beta)
    gamma = float(params.gamma)
    s_const = _sobolev_constant(domain, p)
    lam, c_single = cn.interpolation_constants(params, hp0, s_const)
    c_eff = c_single ** (a / p)
    lhs_int = weighted_integral(domain, lambda b: np.abs(b.psi) ** t,
                                gamma * t, field=field)
    grad_int = weighted_integral(
        domain,
        lambda b: b.grad_psi ** p + np.abs(b.psi) ** p * b.h_norm ** p,
        alpha * p, field=field)
    q_int = weighted_integral(domain, lambda b: np.abs(b.psi) ** q,
                              beta * q, field=field)
    vstat, vreasons = _volume_hypothesis(domain, vol_threshold)
    hyp = {"status": vstat, "reasons": vreasons}
    lhs = lhs_int.powf(1.0 / t)
    rhs = c_eff * grad_int.powf(a / p) * q_int.powf((1.0 - a) / q)
    return _assemble(
        _id,
        dict(params.as_floats(), r0=r0),
        {"sobolev_const": s_const, "endpoint_coeff": lam,
         "single_factor_const": c_single, "rhs_const": c_eff,
         "h_prime_r0": hp0},
        {"interp_norm": lhs},
        {"product_bound": rhs},
        domain, slack=slack, hypothesis=hyp, notes=_notes,
        field_sup=_field_sup(domain, field))


def eval_ckn_single(domain: Domain, field, p: float, alpha: float,
                    sigma: float, r0: float = None,
                    vol_threshold: float = None,
                    slack: float = None) -> InequalityReport:
    """Single-factor interpolation case (the convex weight sits alone)."""
    params = cn.solve_balance(k=domain.k, p=p, alpha=alpha, sigma=sigma)
    return eval_ckn(domain, field, params, r0=r0,
                    vol_threshold=vol_threshold, slack=slack,
                    _id="ckn_single",
                    _notes=["single-factor path: a = 1, t = s, gamma = sigma"])


_DERIVED_IDS = ("mss_weighted", "hardy_derived", "gagliardo_nirenberg",
                "nash", "heisenberg_pauli_weyl")


def derived_parameters(which: str, k: int, p: float = None, q: float = None,
                       a: float = None, alpha: float = None,
                       gamma: float = None) -> cn.ParameterSet:
    """Exponent tuple of one of the classical specializations."""
    if which == "mss_weighted":
        if a not in (None, 1.0):
            raise ParameterConflict("the weighted critical case fixes a = 1")
        if alpha not in (None, 0.0):
            raise ParameterConflict("the weighted critical case fixes alpha = 0")
        gamma = 0.5 if gamma is None else gamma
        if not 0.0 <= gamma <= 1.0:
            raise ParameterConflict("weight exponent must lie in [0, 1]")
        p = 2.0 if p is None else p
        return cn.solve_balance(k=k, p=p, alpha=0.0, sigma=gamma)
    if which == "hardy_derived":
        p = 2.0 if p is None else p
        alpha = 0.0 if alpha is None else alpha
        if a not in (None, 1.0):
            raise ParameterConflict("the Hardy specialization fixes a = 1")
        return cn.solve_balance(k=k, p=p, alpha=alpha, sigma=alpha + 1.0)
    if which == "gagliardo_nirenberg":
        p = 2.0 if p is None else p
        q = 1.0 if q is None else q
        a = 0.5 if a is None else a
        if alpha not in (None, 0.0) or gamma not in (None, 0.0):
            raise ParameterConflict(
                "the interpolation specialization fixes alpha = gamma = 0")
        return cn.solve_balance(k=k, p=p, q=q, alpha=0.0, beta=0.0,
                                sigma=0.0, a=a)
    if which == "nash":
        if k < 3:
            raise ParameterConflict("the sharp-exponent case needs k >= 3")
        for name, val, want in (("p", p, 2.0), ("q", q, 1.0)):
            if val not in (None, want):
                raise ParameterConflict(f"this specialization fixes {name} = {want}")
        a_nash = k / (k + 2.0)
        if a not in (None, a_nash):
            raise ParameterConflict("this specialization fixes a = k/(k+2)")
        return cn.solve_balance(k=k, p=2.0, q=1.0, alpha=0.0, beta=0.0,
                                sigma=0.0, a=a_nash)
    if which == "heisenberg_pauli_weyl":
        if k < 3:
            raise ParameterConflict("the uncertainty-type case needs k >= 3")
        for name, val, want in (("p", p, 2.0), ("q", q, 2.0),
                                ("a", a, 0.5), ("alpha", alpha, 0.0),
                                ("gamma", gamma, 0.0)):
            if val not in (None, want):
                raise ParameterConflict(f"this specialization fixes {name} = {want}")
        return cn.solve_balance(k=k, p=2.0, q=2.0, alpha=0.0, beta=-1.0,
                                gamma=0.0, t=2.0)
    raise InvalidArgument(f"unknown derived inequality {which!r}")


def eval_derived(which: str, domain: Domain, field, r0: float = None,
                 vol_threshold: float = None, slack: float = None,
                 **overrides) -> InequalityReport:
    """Evaluate a classical specialization through the interpolation path."""
    if which not in _DERIVED_IDS:
        raise InvalidArgument(f"unknown derived inequality {which!r}")
    params = derived_parameters(which, domain.k, **overrides)
    return eval_ckn(domain, field, params, r0=r0,
                    vol_threshold=vol_threshold, slack=slack, _id=which,
                    _notes=[f"specialization of the two-factor inequality "
                            f"({which})"])


# ---------------------------------------------------------------------------
# Generic entry point
# ---------------------------------------------------------------------------

def evaluate(id: str, domain: Domain, field, options: dict) -> InequalityReport:
    """Dispatch by catalog id with a flat options mapping."""
    opt = dict(options)
    slack = opt.pop("slack", None)
    r0 = opt.pop("r0", None)
    if id == "hardy_signed":
        return eval_hardy_signed(domain, field, opt["p"], opt["gamma"],
                                 r0=r0, slack=slack)
    if id == "hardy":
        return eval_hardy(domain, field, opt["p"], opt["gamma"], r0=r0,
                          minimal=bool(opt.get("minimal", False)), slack=slack)
    if id == "hardy_hadamard":
        return eval_hardy_hadamard(domain, field, opt["p"], opt["gamma"],
                                   slack=slack)
    if id == "sobolev_hs":
        return eval_sobolev_hs(domain, field, opt["p"],
                               inj_radius=opt.get("inj_radius"),
                               vol_threshold=opt.get("vol_threshold"),
                               slack=slack)
    if id == "weighted_sobolev":
        return eval_weighted_sobolev(domain, field, opt["p"], opt["alpha"],
                                     r0=r0,
                                     vol_threshold=opt.get("vol_threshold"),
                                     slack=slack)
    if id == "ckn_single":
        return eval_ckn_single(domain, field, opt["p"], opt["alpha"],
                               opt["sigma"], r0=r0,
                               vol_threshold=opt.get("vol_threshold"),
                               slack=slack)
    if id == "ckn":
        if "params" in opt:
            params = opt["params"]
        elif "t" in opt and "gamma" in opt:
            params = cn.solve_balance(k=domain.k, p=opt["p"], q=opt["q"],
                                      alpha=opt["alpha"], beta=opt["beta"],
                                      gamma=opt["gamma"], t=opt["t"])
        else:
            params = cn.solve_balance(k=domain.k, p=opt["p"], q=opt["q"],
                                      alpha=opt["alpha"], beta=opt["beta"],
                                      sigma=opt["sigma"], a=opt["a"])
        return eval_ckn(domain, field, params, r0=r0,
                        vol_threshold=opt.get("vol_threshold"), slack=slack)
    if id in _DERIVED_IDS:
        keys = ("p", "q", "a", "alpha", "gamma")
        overrides = {key: opt[key] for key in keys if key in opt}
        return eval_derived(id, domain, field, r0=r0,
                            vol_threshold=opt.get("vol_threshold"),
                            slack=slack, **overrides)
    raise InvalidArgument(f"unknown inequality id {id!r}")
