"""Neumann Poisson solves, Helmholtz-Hodge projection and the H^-1 norm.

The mirror-closure Laplacian on a uniform grid is diagonalized exactly by
the type-II cosine transform, so the conjugate-gradient solver below is
preconditioned with that spectral inverse and normally converges in one
iteration.  The CG wrapper still measures and reports a true residual;
`PoissonSolveReport` travels with every solve.

The pure-Neumann operator is singular: right-hand sides are projected onto
mean zero and the mean of the iterate is re-pinned after every update.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from .errors import ConvergenceError, PreconditionError
from .grid import ScalarField, VectorField, _div_arrays, _grad_arrays, _lap_arr

__all__ = [
    "PoissonSolveReport",
    "solve_neumann_poisson",
    "helmholtz_project",
    "neumann_inverse",
]


@dataclass(frozen=True)
class PoissonSolveReport:
    iterations: int
    relative_residual: float


_SYMBOL_CACHE = {}


def _neumann_symbol(grid):
    """Eigenvalues of -Laplacian in the DCT-II basis, broadcast to the grid."""
    key = (grid.dim, grid.n)
    lam = _SYMBOL_CACHE.get(key)
    if lam is None:
        n, h = grid.n, grid.h
        lam1d = (2.0 - 2.0 * np.cos(np.pi * np.arange(n) / n)) / h**2
        lam = np.zeros(grid.cell_shape)
        for axis in range(grid.dim):
            shape = [1] * grid.dim
            shape[axis] = n
            lam = lam + lam1d.reshape(shape)
        _SYMBOL_CACHE[key] = lam
    return lam


def _spectral_solve(grid, rhs):
    """Exact mean-zero solution of -Lap u = rhs - mean(rhs)."""
    lam = _neumann_symbol(grid)
    fhat = dctn(rhs, type=2, norm="ortho")
    with np.errstate(divide="ignore", invalid="ignore"):
        uhat = np.where(lam > 0.0, fhat / np.where(lam > 0.0, lam, 1.0), 0.0)
    return idctn(uhat, type=2, norm="ortho")


def solve_neumann_poisson(grid, rhs, tol, max_iter=100):
    """Solve -Lap u = rhs (mean-zero data) by DCT-preconditioned CG.

    Returns (u, report); u has zero mean.  Raises ConvergenceError if the
    relative residual has not reached ``tol`` within ``max_iter``.
    """
    b = rhs - rhs.mean()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), PoissonSolveReport(0, 0.0)

    x = np.zeros_like(b)
    r = b.copy()
    z = _spectral_solve(grid, r)
    p = z.copy()
    rz = float(np.vdot(r, z))
    rel = 1.0
    for it in range(1, max_iter + 1):
        Ap = -_lap_arr(grid, p)
        alpha = rz / float(np.vdot(p, Ap))
        x += alpha * p
        x -= x.mean()
        r -= alpha * Ap
        rel = float(np.linalg.norm(r)) / bnorm
        if rel <= tol:
            return x, PoissonSolveReport(it, rel)
        z = _spectral_solve(grid, r)
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"Neumann Poisson solve stalled at relative residual {rel:.3e} "
        f"after {max_iter} iterations (tol {tol:.1e})",
        report=PoissonSolveReport(max_iter, rel),
    )


def _project_arrays(grid, comps, tol):
    div = _div_arrays(grid, comps)
    # Lap q = div v, i.e. -Lap q = -div v
    q, report = solve_neumann_poisson(grid, -div, tol)
    gq = _grad_arrays(grid, q)
    out = [a - g for a, g in zip(comps, gq)]
    return out, q, report


def helmholtz_project(v, tol=1e-10):
    """Helmholtz-Hodge projection onto discretely divergence-free fields.

    Returns (P v, report).  P v = v - grad q with Lap q = div v; the output
    divergence is the Poisson residual, at most ``tol`` relative.
    """
    if tol <= 0.0:
        raise PreconditionError(f"projection tolerance must be positive, got {tol}")
    comps, _, report = _project_arrays(v.grid, list(v.components), tol)
    out = VectorField(v.grid, tuple(comps))
    out.zero_normal_boundaries()
    return out, report


def helmholtz_project_with_potential(v, tol=1e-10):
    """Like ``helmholtz_project`` but also returns the scalar potential q."""
    comps, q, report = _project_arrays(v.grid, list(v.components), tol)
    out = VectorField(v.grid, tuple(comps))
    out.zero_normal_boundaries()
    return out, ScalarField(v.grid, q), report


def neumann_inverse(f, tol=1e-10):
    """Inverse Neumann Laplacian and the associated H^-1 norm.

    Solves -Lap u = f for mean-zero f and returns
    (u, ||f||_* = ||grad u||, report).  Inputs whose discrete mean is not
    within 1e-10 of zero (relative to the field scale) are rejected.
    """
    grid = f.grid
    if tol <= 0.0:
        raise PreconditionError(f"solve tolerance must be positive, got {tol}")
    scale = max(1.0, float(np.abs(f.data).max()))
    if abs(f.data.mean()) > 1e-10 * scale:
        raise PreconditionError(
            f"neumann_inverse needs mean-zero data; discrete mean is {f.data.mean():.3e}"
        )
    u, report = solve_neumann_poisson(grid, f.data, tol)
    g = _grad_arrays(grid, u)
    star = 0.0
    for a in g:
        star += float(np.vdot(a, a))
    star = (star * grid.cell_volume) ** 0.5
    return ScalarField(grid, u), star, report
