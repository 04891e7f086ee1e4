"""Test-function families over domains.

Four families cover the corpus: radial powers ``(1 - r/R)^m`` clipped at
zero, smooth radial bumps with compact support, low-order polynomials, and
seeded random smooth mixtures.  The planar kinds are functions of the first
two ambient coordinates, so they restrict to a smooth function on any
submanifold (no chart seams).  A family member is geometry-agnostic until
bound to a domain: on meshes it is sampled at the vertices with per-cell
linear reconstruction providing the tangential gradient; on parametric
patches it is evaluated with analytic partials chained through the chart
jet.

Members that must vanish on the boundary either do so natively (radial
kinds, whose support radius is the smallest boundary radius) or are
multiplied by the domain's boundary-vanishing factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument, PreconditionViolated
from .domain import Domain, SiteBatch


@dataclass(frozen=True)
class Field:
    """A scalar test-function prototype.

    ``kind`` is one of ``radial_power``, ``radial_bump``, ``polynomial``,
    ``random_smooth``.  ``dof`` is the family's parameter vector; see
    :func:`make_field` for the per-kind meaning.  ``amplitude`` scales the
    whole function (the inequalities are homogeneous, so reports must not
    depend on it).
    """

    kind: str
    dof: tuple
    boundary_vanishing: bool = True
    amplitude: float = 1.0

    def with_dof(self, dof) -> "Field":
        return Field(self.kind, tuple(float(x) for x in dof),
                     self.boundary_vanishing, self.amplitude)

    def scaled(self, amplitude: float) -> "Field":
        return Field(self.kind, self.dof, self.boundary_vanishing,
                     self.amplitude * float(amplitude))

    def bind(self, domain: Domain) -> "BoundField":
        return BoundField(self, domain)


FAMILY_KINDS = ("radial_power", "radial_bump", "polynomial", "random_smooth")


def make_field(kind: str, dof=None, boundary_vanishing: bool = True,
               seed: int = 0) -> Field:
    """Construct a family member with its default parameters.

    - ``radial_power``: dof = (exponent m >= 0.5,), value (1 - r/R)_+^m
    - ``radial_bump``: dof = (steepness tau > 0,), smooth compact bump in r
    - ``polynomial``: dof = 6 quadratic coefficients in scaled coordinates
    - ``random_smooth``: dof = 6 seeded coefficients of a low-order
      Fourier/polynomial mixture in scaled coordinates
    """
    if kind == "radial_power":
        dof = dof if dof is not None else (1.0,)
    elif kind == "radial_bump":
        dof = dof if dof is not None else (1.0,)
    elif kind == "polynomial":
        dof = dof if dof is not None else (1.0, 0.3, -0.2, 0.1, 0.0, 0.05)
    elif kind == "random_smooth":
        if dof is None:
            rng = np.random.default_rng(seed)
            dof = tuple(rng.uniform(-1.0, 1.0, size=6))
    else:
        raise InvalidArgument(f"unknown field kind {kind!r}")
    return Field(kind, tuple(float(x) for x in dof), boundary_vanishing)


# ---------------------------------------------------------------------------
# Scalar profiles
# ---------------------------------------------------------------------------

def _radial_profile(field: Field, support_r: float):
    """f(r) and f'(r) for the radial kinds."""
    if field.kind == "radial_power":
        m = field.dof[0]
        if m < 0.5:
            raise InvalidArgument("radial power exponent must be >= 0.5")

        def f(r):
            base = np.maximum(1.0 - r / support_r, 0.0)
            return base ** m

        def fp(r):
            base = np.maximum(1.0 - r / support_r, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                grad = np.where(base > 0,
                                -m / support_r * base ** (m - 1.0), 0.0)
            return grad

        return f, fp

    tau = field.dof[0]
    if tau <= 0:
        raise InvalidArgument("bump steepness must be positive")

    def f(r):
        x = np.clip(np.asarray(r, dtype=float) / support_r, 0.0, None)
        inside = x < 1.0
        out = np.zeros_like(x)
        safe = np.where(inside, x, 0.5)
        out[inside] = np.exp(tau * (1.0 - 1.0 / (1.0 - safe ** 2)))[inside]
        return out

    def fp(r):
        x = np.clip(np.asarray(r, dtype=float) / support_r, 0.0, None)
        inside = x < 1.0
        out = np.zeros_like(x)
        safe = np.where(inside, x, 0.5)
        val = np.exp(tau * (1.0 - 1.0 / (1.0 - safe ** 2)))
        out[inside] = (val * tau * (-2.0 * safe / (1.0 - safe ** 2) ** 2)
                       / support_r)[inside]
        return out

    return f, fp


def _planar_profile(field: Field, scale: float):
    """Value and ambient-coordinate gradient of the planar kinds.

    Functions of the first two ambient coordinates (scaled), hence smooth
    on every submanifold independently of its chart.
    """
    c = field.dof

    def poly(P):
        x = P[:, 0] / scale
        y = P[:, 1] / scale if P.shape[1] > 1 else np.zeros_like(x)
        val = (c[0] + c[1] * x + c[2] * y + c[3] * x * x
               + c[4] * x * y + c[5] * y * y)
        grad = np.zeros_like(P)
        grad[:, 0] = (c[1] + 2 * c[3] * x + c[4] * y) / scale
        if P.shape[1] > 1:
            grad[:, 1] = (c[2] + c[4] * x + 2 * c[5] * y) / scale
        return val, grad

    def mixture(P):
        x = P[:, 0] / scale
        y = P[:, 1] / scale if P.shape[1] > 1 else np.zeros_like(x)
        sx, cx_ = np.sin(math.pi * x), np.cos(math.pi * x)
        sy, cy_ = np.sin(math.pi * y), np.cos(math.pi * y)
        val = c[0] + c[1] * sx + c[2] * cy_ + c[3] * sx * sy + c[4] * x + c[5] * y * y
        grad = np.zeros_like(P)
        grad[:, 0] = (c[1] * math.pi * cx_ + c[3] * math.pi * cx_ * sy
                      + c[4]) / scale
        if P.shape[1] > 1:
            grad[:, 1] = (-c[2] * math.pi * sy + c[3] * math.pi * sx * cy_
                          + 2 * c[5] * y) / scale
        return val, grad

    return poly if field.kind == "polynomial" else mixture


# ---------------------------------------------------------------------------
# Boundary-vanishing factors per generator
# ---------------------------------------------------------------------------

def _vanish_chart(domain: Domain):
    """(value, chart gradient) of the clamp factor on a patch."""
    meta = domain.metadata
    gen = meta.get("generator")
    if gen in ("flat_disk", "geodesic_disk", "ball"):
        R = meta["radius"]

        def clamp(U):
            rho = U[:, 0]
            val = 1.0 - (rho / R) ** 2
            grad = np.zeros_like(U)
            grad[:, 0] = -2.0 * rho / R ** 2
            return val, grad

        return clamp
    if gen in ("plane_rect", "poly_graph"):
        L = meta["half_width"]
        cx, cy = meta.get("center_xy", (0.0, 0.0))

        def clamp(U):
            x = (U[:, 0] - cx) / L
            y = (U[:, 1] - cy) / L
            val = (1.0 - x ** 2) * (1.0 - y ** 2)
            grad = np.zeros_like(U)
            grad[:, 0] = -2.0 * x * (1.0 - y ** 2) / L
            grad[:, 1] = -2.0 * y * (1.0 - x ** 2) / L
            return val, grad

        return clamp
    if gen == "sphere_patch":
        t0, t1 = meta["theta_range"]
        span = t1 - t0

        def clamp(U):
            th = U[:, 0]
            val = (t1 - th) / span
            grad = np.zeros_like(U)
            grad[:, 0] = -1.0 / span
            if t0 > 0.0:
                lo = (th - t0) / span
                grad[:, 0] = grad[:, 0] * lo + val / span
                val = val * lo
            return val, grad

        return clamp
    raise InvalidArgument(f"no boundary-vanishing factor for generator {gen!r}")


def _vanish_points(domain: Domain, pts: np.ndarray) -> np.ndarray:
    """Clamp factor of a mesh domain at arbitrary ambient points."""
    meta = domain.metadata
    gen = meta.get("generator")
    if gen == "disk":
        center = np.asarray(meta["center"], dtype=float)
        axes = np.asarray(meta["axes"], dtype=float)
        R = meta["radius"]
        plane = (pts - center) @ axes.T
        rho2 = np.einsum("vi,vi->v", plane, plane)
        return np.maximum(1.0 - rho2 / R ** 2, 0.0)
    if gen == "graph":
        L = meta["half_width"]
        cx, cy = meta.get("center_xy", (0.0, 0.0))
        x = (pts[:, 0] - cx) / L
        y = (pts[:, 1] - cy) / L
        return np.maximum((1.0 - x ** 2) * (1.0 - y ** 2), 0.0)
    if gen == "sphere":
        return np.ones(len(pts))
    raise InvalidArgument(f"no boundary-vanishing factor for generator {gen!r}")


# ---------------------------------------------------------------------------
# Binding
# ---------------------------------------------------------------------------

class BoundField:
    """A family member evaluated on one concrete domain."""

    def __init__(self, field: Field, domain: Domain):
        self.field = field
        self.domain = domain
        self.boundary_vanishing = field.boundary_vanishing
        self.radial = field.kind in ("radial_power", "radial_bump")
        if self.radial:
            if field.boundary_vanishing and domain.has_boundary:
                support = domain.min_boundary_radius
            else:
                support = 2.0 * domain.max_radius
            if support <= 0.0 or not math.isfinite(support):
                raise PreconditionViolated(
                    "radial support radius undefined for this domain")
            self.support_r = support
            self._f, self._fp = _radial_profile(field, support)
        else:
            self._planar = _planar_profile(field, max(domain.coord_scale, 1e-12))
            if domain.kind == "patch":
                self._clamp = (_vanish_chart(domain)
                               if field.boundary_vanishing and domain.has_boundary
                               else None)
        if domain.kind == "mesh":
            self._setup_mesh_samples()

    def _setup_mesh_samples(self):
        domain = self.domain
        mesh = domain.mesh
        vals = self._value_at(mesh.vertices, domain.ambient.radius(mesh.vertices))
        if self.field.boundary_vanishing and len(mesh.boundary_facets):
            vals = np.asarray(vals, dtype=float).copy()
            vals[np.unique(mesh.boundary_facets)] = 0.0
        self.vertex_values = vals
        self.cell_gradients = mesh.reconstruct_gradients(vals)
        self.cell_grad_norm = np.linalg.norm(self.cell_gradients, axis=1)

    def _value_at(self, pts, r):
        """Exact field value at ambient points of a mesh domain."""
        if self.radial:
            return self._f(r)
        vals, _ = self._planar(pts)
        if self.field.boundary_vanishing and self.domain.has_boundary:
            vals = vals * _vanish_points(self.domain, pts)
        return vals

    # -- evaluation at site batches -----------------------------------------

    def at_sites(self, batch: SiteBatch):
        domain = self.domain
        amp = self.field.amplitude
        if domain.kind == "mesh":
            # exact values at the quadrature sites; tangential gradient from
            # the per-cell linear reconstruction of the vertex samples
            psi = self._value_at(batch.points, batch.r)
            return amp * psi, amp * self.cell_grad_norm[batch.cell_ids]
        if self.radial:
            psi = self._f(batch.r)
            grad = np.abs(self._fp(batch.r)) * np.sqrt(
                np.clip(batch.tan_sq, 0.0, None))
            return amp * psi, abs(amp) * grad
        psi, amb_grad = self._planar(batch.points)
        dpsi = np.einsum("sa,sai->si", amb_grad, batch.dF)
        if self._clamp is not None:
            cval, cgrad = self._clamp(batch.chart)
            dpsi = (dpsi * cval[:, None]
                    + psi[:, None] * cgrad / batch.chart_colnorm)
            psi = psi * cval
        grad = np.sqrt(np.maximum(
            np.einsum("si,sij,sj->s", dpsi, batch.metric_ginv, dpsi), 0.0))
        return amp * psi, abs(amp) * grad

    def at_boundary(self, batch: SiteBatch):
        domain = self.domain
        if domain.kind == "mesh":
            facets = domain.mesh.boundary_facets[batch.facet_ids]
            vv = self.vertex_values[facets]
            psi = np.einsum("sb,sb->s", batch.bary, vv)
        elif self.radial:
            psi = self._f(batch.r)
        else:
            psi, _ = self._planar(batch.points)
            if self._clamp is not None:
                cval, _ = self._clamp(batch.chart)
                psi = psi * cval
        if self.boundary_vanishing:
            psi = np.zeros_like(psi)
        return self.field.amplitude * psi
