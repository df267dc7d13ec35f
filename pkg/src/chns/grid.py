"""Uniform MAC staggered grid on the unit box and its discrete operators.

Scalars (order parameter, chemical potential, pressure) live at cell
centers; velocity component ``c`` lives on the faces orthogonal to axis
``c``, so component ``c`` has extent ``n + 1`` along axis ``c`` and ``n``
along every other axis.  Boundary-normal faces are the physical walls and
are pinned to zero for every velocity field (no penetration); tangential
wall values are represented by reflecting ghosts (no slip).

The layout buys three exact discrete identities that the rest of the
package leans on:

* ``divergence_fc`` is minus the adjoint of ``gradient_cc`` for any
  velocity with zero boundary-normal faces (summation by parts),
* ``divergence_fc(gradient_cc(phi))`` equals the mirror-closure Neumann
  Laplacian, stencil for stencil,
* the skew-symmetrized convection form vanishes when both trailing
  arguments coincide, for any advecting field.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "gradient_cc",
    "divergence_fc",
    "laplacian_neumann",
    "advect_scalar",
    "trilinear_b",
    "convection",
    "velocity_laplacian",
    "cell_to_face",
    "center_components",
    "face_speed",
    "scalar_inner",
    "vector_inner",
    "scalar_norm",
    "vector_norm",
    "dirichlet_energy",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid over [0,1]^dim with ``n`` cells per axis."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"grid dimension must be 2 or 3, got {self.dim}")
        if self.n < 8:
            raise ValueError(f"need at least 8 cells per axis, got {self.n}")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def cell_shape(self):
        return (self.n,) * self.dim

    @property
    def cell_volume(self):
        return self.h**self.dim

    def face_shape(self, axis):
        s = [self.n] * self.dim
        s[axis] += 1
        return tuple(s)

    def cell_centers(self, axis):
        """Coordinates of cell centers along one axis."""
        return (np.arange(self.n) + 0.5) * self.h

    def face_coords(self, axis):
        """Coordinates of the faces orthogonal to ``axis``."""
        return np.arange(self.n + 1) * self.h


def _sl(ndim, axis, s):
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


@dataclass
class ScalarField:
    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.grid.cell_shape:
            raise ValueError(
                f"scalar data shape {self.data.shape} != {self.grid.cell_shape}"
            )

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.cell_shape))

    @classmethod
    def full(cls, grid, value):
        return cls(grid, np.full(grid.cell_shape, float(value)))

    def copy(self):
        return ScalarField(self.grid, self.data.copy())

    def mean(self):
        return float(self.data.mean())

    def check_finite(self):
        if not np.isfinite(self.data).all():
            raise FloatingPointError("scalar field contains non-finite entries")
        return self


@dataclass
class VectorField:
    grid: Grid
    components: tuple

    def __post_init__(self):
        comps = []
        for c, a in enumerate(self.components):
            a = np.asarray(a, dtype=float)
            if a.shape != self.grid.face_shape(c):
                raise ValueError(
                    f"component {c} shape {a.shape} != {self.grid.face_shape(c)}"
                )
            comps.append(a)
        self.components = tuple(comps)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, tuple(np.zeros(grid.face_shape(c)) for c in range(grid.dim)))

    def copy(self):
        return VectorField(self.grid, tuple(a.copy() for a in self.components))

    def zero_normal_boundaries(self):
        """Pin boundary-normal faces to zero (no penetration)."""
        nd = self.grid.dim
        for c, a in enumerate(self.components):
            a[_sl(nd, c, 0)] = 0.0
            a[_sl(nd, c, -1)] = 0.0
        return self

    def max_abs(self):
        return max(float(np.abs(a).max()) for a in self.components)

    def check_finite(self):
        for a in self.components:
            if not np.isfinite(a).all():
                raise FloatingPointError("vector field contains non-finite entries")
        return self


# ---------------------------------------------------------------------------
# inner products and norms (midpoint quadrature, weight h^d)

def scalar_inner(f, g):
    return float(np.vdot(f.data, g.data)) * f.grid.cell_volume


def scalar_norm(f):
    return float(np.linalg.norm(f.data)) * f.grid.cell_volume**0.5


def vector_inner(v, w):
    acc = 0.0
    for a, b in zip(v.components, w.components):
        acc += float(np.vdot(a, b))
    return acc * v.grid.cell_volume


def vector_norm(v):
    return vector_inner(v, v) ** 0.5


# ---------------------------------------------------------------------------
# first-order operators

def _grad_arrays(grid, p):
    h = grid.h
    nd = grid.dim
    out = []
    for c in range(nd):
        g = np.zeros(grid.face_shape(c))
        g[_sl(nd, c, slice(1, -1))] = np.diff(p, axis=c) / h
        out.append(g)
    return out


def _div_arrays(grid, comps):
    h = grid.h
    acc = np.diff(comps[0], axis=0)
    for c in range(1, grid.dim):
        acc = acc + np.diff(comps[c], axis=c)
    return acc / h


def gradient_cc(phi):
    """Face-centered gradient of a cell field; zero on boundary faces."""
    return VectorField(phi.grid, tuple(_grad_arrays(phi.grid, phi.data)))


def divergence_fc(v):
    """Cell-centered divergence of a face field."""
    return ScalarField(v.grid, _div_arrays(v.grid, v.components))


def laplacian_neumann(phi):
    """5/7-point Laplacian with mirror (homogeneous Neumann) closure.

    Built as div(grad(.)) so the factorization is exact by construction.
    """
    g = _grad_arrays(phi.grid, phi.data)
    return ScalarField(phi.grid, _div_arrays(phi.grid, g))


def _lap_arr(grid, p):
    return _div_arrays(grid, _grad_arrays(grid, p))


def cell_to_face(phi, axis):
    """Arithmetic average of a cell field onto the faces of one axis.

    Boundary faces take the adjacent cell value (mirror ghost).
    """
    grid = phi.grid if isinstance(phi, ScalarField) else None
    p = phi.data if grid is not None else phi
    nd = p.ndim
    n = p.shape[axis]
    shape = list(p.shape)
    shape[axis] = n + 1
    out = np.empty(shape)
    out[_sl(nd, axis, slice(1, -1))] = 0.5 * (
        p[_sl(nd, axis, slice(None, -1))] + p[_sl(nd, axis, slice(1, None))]
    )
    out[_sl(nd, axis, 0)] = p[_sl(nd, axis, 0)]
    out[_sl(nd, axis, -1)] = p[_sl(nd, axis, -1)]
    return out


def advect_scalar(u, phi):
    """Conservative transport term div(u * phi) with face-averaged phi.

    Wall fluxes vanish because boundary-normal velocities are pinned, so the
    discrete integral of the output telescopes to zero.
    """
    grid = phi.grid
    fluxes = [u.components[c] * cell_to_face(phi, c) for c in range(grid.dim)]
    return ScalarField(grid, _div_arrays(grid, fluxes))


# ---------------------------------------------------------------------------
# velocity interpolation helpers

def center_components(v):
    """Velocity components averaged to cell centers; list of cell arrays."""
    nd = v.grid.dim
    out = []
    for c, a in enumerate(v.components):
        out.append(
            0.5 * (a[_sl(nd, c, slice(None, -1))] + a[_sl(nd, c, slice(1, None))])
        )
    return out


def face_speed(v, c):
    """|v| evaluated on the faces of component ``c``.

    The through component is read directly; the others are averaged to cell
    centers and then onto the c-faces.
    """
    cc = center_components(v)
    mag2 = v.components[c] ** 2
    for e in range(v.grid.dim):
        if e == c:
            continue
        other = cell_to_face(ScalarField(v.grid, cc[e]), c)
        mag2 = mag2 + other**2
    return np.sqrt(mag2)


def _edge_coefficients(v, c):
    """Advecting-velocity averages on the mid-edges of component c.

    For axis e == c the midpoints are cell centers; for e != c they are the
    e-face positions shifted onto the c-face line.  Wall midpoints carry the
    (zero) wall-normal velocity so no ghost values ever enter the advection
    stencils.
    """
    nd = v.grid.dim
    coefs = []
    for e in range(nd):
        a = v.components[e]
        if e == c:
            w = 0.5 * (a[_sl(nd, c, slice(None, -1))] + a[_sl(nd, c, slice(1, None))])
        else:
            nshape = list(a.shape)
            nshape[c] += 1
            w = np.empty(nshape)
            w[_sl(nd, c, slice(1, -1))] = 0.5 * (
                a[_sl(nd, c, slice(None, -1))] + a[_sl(nd, c, slice(1, None))]
            )
            w[_sl(nd, c, 0)] = a[_sl(nd, c, 0)]
            w[_sl(nd, c, -1)] = a[_sl(nd, c, -1)]
        coefs.append(w)
    return coefs


def _advective_component(grid, coefs, vc, c):
    """(a . grad) applied to one velocity component, midpoint form."""
    nd = grid.dim
    h = grid.h
    out = np.zeros_like(vc)
    for e in range(nd):
        w = coefs[e]
        if e == c:
            t = w * np.diff(vc, axis=c)
            out[_sl(nd, c, slice(1, -1))] += (
                t[_sl(nd, c, slice(1, None))] + t[_sl(nd, c, slice(None, -1))]
            ) / (2.0 * h)
        else:
            t = w[_sl(nd, e, slice(1, -1))] * np.diff(vc, axis=e)
            pad = [(0, 0)] * nd
            pad[e] = (1, 0)
            lo = np.pad(t, pad)
            pad[e] = (0, 1)
            hi = np.pad(t, pad)
            out += (lo + hi) / (2.0 * h)
    out[_sl(nd, c, 0)] = 0.0
    out[_sl(nd, c, -1)] = 0.0
    return out


def _divergence_component(grid, coefs, vc, c):
    """div(a vc) applied to one velocity component, centered flux form.

    Exactly minus the adjoint of ``_advective_component`` for the same
    coefficient set, which is what makes the symmetrized convection skew.
    """
    nd = grid.dim
    h = grid.h
    out = np.zeros_like(vc)
    for e in range(nd):
        w = coefs[e]
        if e == c:
            s = w * 0.5 * (vc[_sl(nd, c, slice(None, -1))] + vc[_sl(nd, c, slice(1, None))])
            out[_sl(nd, c, slice(1, -1))] += np.diff(s, axis=c) / h
        else:
            s = w[_sl(nd, e, slice(1, -1))] * 0.5 * (
                vc[_sl(nd, e, slice(None, -1))] + vc[_sl(nd, e, slice(1, None))]
            )
            pad = [(0, 0)] * nd
            pad[e] = (1, 1)
            s = np.pad(s, pad)
            out += np.diff(s, axis=e) / h
    out[_sl(nd, c, 0)] = 0.0
    out[_sl(nd, c, -1)] = 0.0
    return out


def _advective_field(a, v):
    grid = a.grid
    comps = []
    for c in range(grid.dim):
        coefs = _edge_coefficients(a, c)
        comps.append(_advective_component(grid, coefs, v.components[c], c))
    return comps


def convection(a, v):
    """Skew-symmetrized convection N(a)v = ((a.grad)v + div(a x v)) / 2.

    Its quadratic form vanishes identically: <N(a)v, v> = b(a, v, v) = 0 for
    every advecting field ``a``, solenoidal or not.
    """
    grid = a.grid
    comps = []
    for c in range(grid.dim):
        coefs = _edge_coefficients(a, c)
        adv = _advective_component(grid, coefs, v.components[c], c)
        div = _divergence_component(grid, coefs, v.components[c], c)
        comps.append(0.5 * (adv + div))
    return VectorField(grid, tuple(comps))


def trilinear_b(u, v, w):
    """Skew trilinear form b(u, v, w) = (<(u.grad)v, w> - <(u.grad)w, v>)/2.

    Both inner products run through the identical code path, so
    b(u, v, v) is exactly zero in floating point and b(u, v, w) = -b(u, w, v)
    holds at roundoff.
    """
    av = _advective_field(u, v)
    aw = _advective_field(u, w)
    acc = 0.0
    for c in range(u.grid.dim):
        acc += float(np.vdot(av[c], w.components[c]))
        acc -= float(np.vdot(aw[c], v.components[c]))
    return 0.5 * acc * u.grid.cell_volume


# ---------------------------------------------------------------------------
# velocity Laplacian with no-slip closure

def _lap_component_arr(grid, a, c):
    """Laplacian of one velocity component: pinned walls through-axis,
    reflected (no-slip) ghosts across.  Boundary-normal rows come out zero."""
    nd = grid.dim
    h2 = grid.h**2
    out = np.zeros_like(a)
    out[_sl(nd, c, slice(1, -1))] = (
        a[_sl(nd, c, slice(None, -2))]
        - 2.0 * a[_sl(nd, c, slice(1, -1))]
        + a[_sl(nd, c, slice(2, None))]
    ) / h2
    for e in range(nd):
        if e == c:
            continue
        mid = _sl(nd, e, slice(1, -1))
        out[mid] += (
            a[_sl(nd, e, slice(None, -2))]
            - 2.0 * a[mid]
            + a[_sl(nd, e, slice(2, None))]
        ) / h2
        lo, hi = _sl(nd, e, 0), _sl(nd, e, -1)
        out[lo] += (a[_sl(nd, e, 1)] - 3.0 * a[lo]) / h2
        out[hi] += (a[_sl(nd, e, -2)] - 3.0 * a[hi]) / h2
    out[_sl(nd, c, 0)] = 0.0
    out[_sl(nd, c, -1)] = 0.0
    return out


def velocity_laplacian(v):
    """Componentwise Laplacian with the no-slip boundary closure."""
    grid = v.grid
    return VectorField(
        grid,
        tuple(_lap_component_arr(grid, a, c) for c, a in enumerate(v.components)),
    )


def dirichlet_energy(v):
    """||grad v||^2 in the form <-Lap v, v>, consistent with the viscous
    operator (includes the wall ghost contributions)."""
    lap = velocity_laplacian(v)
    return -vector_inner(lap, v)
