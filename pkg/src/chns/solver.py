"""Semi-implicit, energy-stable time stepping for the coupled system.

One step advances (u, phi) by:

1. transport phi explicitly with the solenoidal velocity u^n, then take a
   backward-Euler diffusion step with mobility frozen at phi^n and the
   chemical potential split convex/concave:
   mu^{n+1/2} = -Lap phi^{n+1} + F'(phi^{n+1}) + c0 (phi^{n+1} - phi^n),
   solved by a damped fixed-point iteration preconditioned with the exact
   spectral inverse of the constant-coefficient operator (Newton-GMRES
   fallback for strongly varying mobility);

2. assemble the capillary force mu^{n+1/2} grad phi^n plus external
   forcing, Helmholtz-project it, and take an implicit step in viscosity
   and the linearized damping beta |u^n|^{r-1} u^{n+1} with explicit
   skew-symmetrized convection; project the result.

Projecting the force before the viscous solve matters: the viscous
resolvent does not commute with the projection, so the gradient component
of mu grad(phi) (the part a pressure would absorb) would otherwise leak
spurious kinetic energy and spatially uniform states would not be exact
equilibria.  With it, mass is conserved to roundoff and the total energy
is non-increasing at every step when the external force vanishes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn
from scipy.sparse.linalg import LinearOperator, gmres

from .diagnostics import DiagnosticsRecord, TrajectoryLedger, degenerate_identity_extras
from .errors import ParameterError, StepError
from .grid import (
    ScalarField,
    VectorField,
    _div_arrays,
    _grad_arrays,
    _lap_arr,
    _lap_component_arr,
    advect_scalar,
    cell_to_face,
    center_components,
    convection,
    dirichlet_energy,
    divergence_fc,
    face_speed,
    vector_inner,
)
from .materials import (
    mobility_value,
    potential_concave_deriv,
    potential_convex_deriv,
    potential_deriv,
    potential_value,
)
from .poisson import _neumann_symbol, helmholtz_project_with_potential

__all__ = [
    "SolverParams",
    "ForcingSpec",
    "State",
    "vortex_field",
    "initial_state",
    "chemical_potential",
    "step_ch",
    "step_ns",
    "step_coupled",
    "damping_pairing",
    "Simulation",
]

CRITICAL_EXPONENT = 3.0


@dataclass(frozen=True)
class ForcingSpec:
    """External body force for the momentum equation.

    kinds: ``zero``; ``steady`` (fixed vortex pattern scaled by amplitude);
    ``time_profile`` (same pattern modulated by sin(omega t)).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    omega: float = 1.0

    def sample(self, grid, t):
        """Force field at time t, or None when identically zero."""
        if self.kind == "zero" or self.amplitude == 0.0:
            return None
        base = vortex_field(grid, self.amplitude)
        if self.kind == "steady":
            return base
        if self.kind == "time_profile":
            factor = math.sin(self.omega * t)
            return VectorField(grid, tuple(factor * a for a in base.components))
        raise ParameterError(f"unknown forcing kind {self.kind!r}")


@dataclass(frozen=True)
class SolverParams:
    nu: float = 1.0
    beta: float = 1.0
    r: float = 3.0
    dt: float = 1e-4
    t_final: float = 0.1
    poisson_tol: float = 1e-10
    ch_tol: float = 1e-10
    max_inner_iters: int = 50
    cfl_safety: float = 4.0
    forcing: ForcingSpec = field(default_factory=ForcingSpec)

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ParameterError(f"viscosity must be positive, got {self.nu}")
        if self.beta < 0.0:
            raise ParameterError(f"damping coefficient must be >= 0, got {self.beta}")
        if self.r < 1.0:
            raise ParameterError(f"absorption exponent must be >= 1, got {self.r}")
        if self.dt <= 0.0 or self.t_final <= 0.0:
            raise ParameterError("dt and t_final must be positive")

    @property
    def critical(self):
        """True at the critical absorption exponent r = 3."""
        return self.r == CRITICAL_EXPONENT


@dataclass
class State:
    t: float
    u: VectorField
    phi: ScalarField
    mu: ScalarField
    pi: ScalarField

    def check_finite(self):
        self.u.check_finite()
        self.phi.check_finite()
        self.mu.check_finite()
        self.pi.check_finite()
        return self


def vortex_field(grid, amplitude):
    """Single counter-rotating vortex pair from the stream function
    sin(pi x) sin(pi y); wall-normal components vanish identically."""
    a = float(amplitude)
    xf = grid.face_coords(0)
    xc = grid.cell_centers(0)
    if grid.dim == 2:
        ux = a * np.sin(np.pi * xf)[:, None] * np.cos(np.pi * xc)[None, :]
        uy = -a * np.cos(np.pi * xc)[:, None] * np.sin(np.pi * xf)[None, :]
        return VectorField(grid, (ux, uy)).zero_normal_boundaries()
    ux = (
        a
        * np.sin(np.pi * xf)[:, None, None]
        * np.cos(np.pi * xc)[None, :, None]
        * np.ones(grid.n)[None, None, :]
    )
    uy = (
        -a
        * np.cos(np.pi * xc)[:, None, None]
        * np.sin(np.pi * xf)[None, :, None]
        * np.ones(grid.n)[None, None, :]
    )
    uz = np.zeros(grid.face_shape(2))
    return VectorField(grid, (ux, uy, uz)).zero_normal_boundaries()


def initial_state(grid, pot, phi_mean=0.0, noise_amp=0.05, seed=1234,
                  velocity="zero", velocity_amp=0.1, poisson_tol=1e-10):
    """Spinodal initial data: phi_mean plus seeded uniform noise, and zero
    or a projected vortex velocity."""
    rng = np.random.default_rng(seed)
    phi = ScalarField(grid, phi_mean + noise_amp * rng.uniform(-1.0, 1.0, grid.cell_shape))
    if velocity == "vortex":
        u, _, _ = helmholtz_project_with_potential(vortex_field(grid, velocity_amp), poisson_tol)
    elif velocity == "zero":
        u = VectorField.zeros(grid)
    else:
        raise ParameterError(f"unknown initial velocity kind {velocity!r}")
    mu = chemical_potential(phi, pot)
    return State(t=0.0, u=u, phi=phi, mu=mu, pi=ScalarField.zeros(grid))


def chemical_potential(phi, pot):
    """mu = -Lap phi + F'(phi) with the Neumann closure."""
    lap = _lap_arr(phi.grid, phi.data)
    return ScalarField(phi.grid, -lap + potential_deriv(pot, phi.data, 1))


# ---------------------------------------------------------------------------
# Cahn-Hilliard step

def _m_faces(grid, mob, phi_arr):
    m_cell = ScalarField(grid, np.asarray(mobility_value(mob, phi_arr)))
    return [cell_to_face(m_cell, c) for c in range(grid.dim)]


def _ch_operator(grid, m_face, mu_arr):
    """div(m grad mu) with zero wall fluxes."""
    g = _grad_arrays(grid, mu_arr)
    return _div_arrays(grid, [m_face[c] * g[c] for c in range(grid.dim)])


class _ChProblem:
    """Nonlinear system of one backward-Euler diffusion step."""

    def __init__(self, grid, phi_n, adv, m_face, dt, pot):
        self.grid = grid
        self.dt = dt
        self.pot = pot
        self.m_face = m_face
        self.ge = np.asarray(potential_concave_deriv(pot, phi_n))
        self.target = phi_n - dt * adv
        self.log_domain = pot.kind == "logarithmic"
        self.sqrt_vol = grid.cell_volume**0.5

    def mu_of(self, phi):
        return (
            -_lap_arr(self.grid, phi)
            + np.asarray(potential_convex_deriv(self.pot, phi))
            + self.ge
        )

    def residual(self, phi):
        mu = self.mu_of(phi)
        return phi - self.target - self.dt * _ch_operator(self.grid, self.m_face, mu), mu

    def rnorm(self, res):
        return float(np.linalg.norm(res)) * self.sqrt_vol

    def admissible(self, phi):
        return (not self.log_domain) or float(np.abs(phi).max()) < 1.0 - 1e-13


def _ch_preconditioner(grid, dt, mbar, sigma):
    lam = _neumann_symbol(grid)
    sym = 1.0 + dt * mbar * (lam * lam + sigma * lam)

    def apply(y):
        return idctn(dctn(y, type=2, norm="ortho") / sym, type=2, norm="ortho")

    return apply


def _solve_ch(grid, phi_n, adv, m_face, params, pot):
    """Damped preconditioned fixed point with a Newton-GMRES fallback.

    Returns (phi_new, mu_half, n_iters).  Mass is preserved exactly: every
    update is projected onto mean zero.
    """
    prob = _ChProblem(grid, phi_n, adv, m_face, params.dt, pot)
    mmin = min(float(f.min()) for f in m_face)
    mmax = max(float(f.max()) for f in m_face)
    mbar = 0.5 * (mmin + mmax)

    phi = phi_n.copy()
    res, mu = prob.residual(phi)
    rn = prob.rnorm(res)
    tol = params.ch_tol * max(1.0, float(np.linalg.norm(phi_n)) * prob.sqrt_vol)
    history = [rn]
    newton = False
    total = 0

    while rn > tol and total < params.max_inner_iters:
        fcpp = np.asarray(potential_deriv(pot, phi, 2)) + pot.c0
        sigma = 0.5 * (float(fcpp.min()) + float(fcpp.max()))
        precond = _ch_preconditioner(grid, params.dt, mbar, sigma)

        if not newton:
            delta = precond(res)
        else:
            def matvec(v):
                v = v.reshape(grid.cell_shape)
                out = v - params.dt * _ch_operator(
                    grid, m_face, -_lap_arr(grid, v) + fcpp * v
                )
                return out.ravel()

            size = phi.size
            op = LinearOperator((size, size), matvec=matvec)
            mop = LinearOperator(
                (size, size),
                matvec=lambda v: precond(v.reshape(grid.cell_shape)).ravel(),
            )
            sol, info = gmres(op, res.ravel(), M=mop, rtol=1e-6, atol=0.0,
                              restart=30, maxiter=10)
            if info != 0:
                raise StepError(
                    f"CH inner Newton solve failed (gmres info={info})", history
                )
            delta = sol.reshape(grid.cell_shape)
        delta = delta - delta.mean()

        omega = 1.0
        accepted = False
        for _ in range(8):
            trial = phi - omega * delta
            if not prob.admissible(trial):
                omega *= 0.5
                continue
            res_t, mu_t = prob.residual(trial)
            rn_t = prob.rnorm(res_t)
            if rn_t < rn or omega <= 1.0 / 64.0:
                accepted = rn_t < rn
                break
            omega *= 0.5
        total += 1
        if accepted:
            phi, res, mu, rn = trial, res_t, mu_t, rn_t
            history.append(rn)
            if not newton and len(history) > 6 and rn > 0.5 * history[-6]:
                newton = True
        elif not newton:
            newton = True
        else:
            raise StepError(
                f"CH inner iteration stalled at residual {rn:.3e} (tol {tol:.1e})",
                history,
            )
    if rn > tol:
        raise StepError(
            f"CH inner iteration exceeded {params.max_inner_iters} iterations "
            f"(residual {rn:.3e}, tol {tol:.1e})",
            history,
        )
    return phi, mu, total


def step_ch(state, params, pot, mob):
    """One transport + mobility-diffusion step; returns the new phi."""
    phi, _, _ = _step_ch_full(state, params, pot, mob)
    return phi


def _step_ch_full(state, params, pot, mob):
    grid = state.phi.grid
    m_face = _m_faces(grid, mob, state.phi.data)
    adv = advect_scalar(state.u, state.phi)
    phi_arr, mu_arr, _ = _solve_ch(grid, state.phi.data, adv.data, m_face, params, pot)
    return ScalarField(grid, phi_arr), ScalarField(grid, mu_arr), m_face


# ---------------------------------------------------------------------------
# momentum step

def _face_drag(u, r):
    """|u|^{r-1} on each component's faces (ones when r = 1)."""
    if r == 1.0:
        return [np.ones_like(a) for a in u.components]
    return [face_speed(u, c) ** (r - 1.0) for c in range(u.grid.dim)]


def _cg_component(matvec, b, x0, rtol, maxiter):
    x = x0.copy()
    r = b - matvec(x)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    p = r.copy()
    rr = float(np.vdot(r, r))
    for it in range(1, maxiter + 1):
        if rr**0.5 <= rtol * bnorm:
            return x, it - 1
        Ap = matvec(p)
        alpha = rr / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise StepError(
        f"implicit velocity solve stalled at relative residual {rr**0.5 / bnorm:.3e}"
    )


def step_ns(state, params, mu_half):
    """One implicit viscosity/damping step with projected capillary force."""
    u, _ = _step_ns_full(state, params, mu_half)
    return u


def _step_ns_full(state, params, mu_half):
    grid = state.u.grid
    dt = params.dt
    nd = grid.dim

    gphi = _grad_arrays(grid, state.phi.data)
    force = [cell_to_face(mu_half, c) * gphi[c] for c in range(nd)]
    ext = params.forcing.sample(grid, state.t + dt)
    if ext is not None:
        force = [f + a for f, a in zip(force, ext.components)]
    fv = VectorField(grid, tuple(force))
    fv.zero_normal_boundaries()
    f_proj, q1, _ = helmholtz_project_with_potential(fv, params.poisson_tol)

    conv = convection(state.u, state.u)
    drag = _face_drag(state.u, params.r)

    new_comps = []
    for c in range(nd):
        b = state.u.components[c] + dt * (f_proj.components[c] - conv.components[c])

        def matvec(x, c=c, coef=drag[c]):
            lap = _lap_component_arr(grid, x, c)
            return x - dt * params.nu * lap + dt * params.beta * coef * x

        sol, _ = _cg_component(matvec, b, state.u.components[c], 1e-12, 400)
        new_comps.append(sol)

    tilde = VectorField(grid, tuple(new_comps))
    tilde.zero_normal_boundaries()
    u_new, q2, _ = helmholtz_project_with_potential(tilde, params.poisson_tol)
    pi = ScalarField(grid, q1.data + q2.data / dt)
    return u_new, pi


# ---------------------------------------------------------------------------
# coupled step and diagnostics assembly

def damping_pairing(u1, u2, r):
    """< |u1|^{r-1} u1 - |u2|^{r-1} u2, u1 - u2 > at cell centers.

    The collocated form is the gradient of a convex functional of the face
    values, so the sum is non-negative term by term.
    """
    if r < 1.0:
        raise ParameterError(f"absorption exponent must be >= 1, got {r}")
    c1 = center_components(u1)
    c2 = center_components(u2)
    m1 = np.sqrt(sum(a * a for a in c1))
    m2 = np.sqrt(sum(a * a for a in c2))
    w1 = np.ones_like(m1) if r == 1.0 else m1 ** (r - 1.0)
    w2 = np.ones_like(m2) if r == 1.0 else m2 ** (r - 1.0)
    acc = 0.0
    for a, b in zip(c1, c2):
        acc += float(np.sum((w1 * a - w2 * b) * (a - b)))
    return acc * u1.grid.cell_volume


def _lr_norm_power(u, r):
    """||u||_{L^{r+1}}^{r+1} with cell-collocated magnitudes."""
    mags = np.sqrt(sum(a * a for a in center_components(u)))
    return float(np.sum(mags ** (r + 1.0))) * u.grid.cell_volume


def _step_record(t, u, phi, mu_half, m_face, pot, params, grid):
    gphi = _grad_arrays(grid, phi.data)
    interf = 0.0
    for a in gphi:
        interf += float(np.vdot(a, a))
    interf *= 0.5 * grid.cell_volume

    gmu = _grad_arrays(grid, mu_half.data)
    mob_diss = 0.0
    for c in range(grid.dim):
        mob_diss += float(np.vdot(m_face[c] * gmu[c], gmu[c]))
    mob_diss *= grid.cell_volume

    ext = params.forcing.sample(grid, t)
    work = vector_inner(ext, u) if ext is not None else 0.0

    return DiagnosticsRecord(
        t=t,
        mass=phi.mean(),
        kinetic=0.5 * vector_inner(u, u),
        interfacial=interf,
        bulk=float(np.sum(potential_value(pot, phi.data))) * grid.cell_volume,
        visc_diss=params.nu * dirichlet_energy(u),
        damp_diss=params.beta * _lr_norm_power(u, params.r),
        mob_diss=max(mob_diss, 0.0),
        work=work,
        div_max=float(np.abs(divergence_fc(u).data).max()),
        phi_max=float(np.abs(phi.data).max()),
    )


def step_coupled(state, params, pot, mob):
    """Advance the coupled system by one dt; returns (state, record)."""
    new_state, record, _ = _step_coupled_full(state, params, pot, mob)
    return new_state, record


def _step_coupled_full(state, params, pot, mob):
    grid = state.phi.grid
    umax = state.u.max_abs()
    if umax > 0.0 and params.dt > grid.h / (params.cfl_safety * umax):
        raise StepError(
            f"advective CFL guard: dt={params.dt} exceeds "
            f"h/({params.cfl_safety}*max|u|)={grid.h / (params.cfl_safety * umax):.3e}"
        )

    phi_new, mu_half, m_face = _step_ch_full(state, params, pot, mob)
    u_new, pi_new = _step_ns_full(state, params, mu_half)

    t_new = state.t + params.dt
    new_state = State(
        t=t_new,
        u=u_new,
        phi=phi_new,
        mu=chemical_potential(phi_new, pot),
        pi=pi_new,
    )
    new_state.check_finite()
    record = _step_record(t_new, u_new, phi_new, mu_half, m_face, pot, params, grid)
    extras = degenerate_identity_extras(u_new, phi_new, pot, mob)
    return new_state, record, extras


# ---------------------------------------------------------------------------
# simulation driver

class Simulation:
    """Owns one trajectory: grid, materials, params, state and its ledger."""

    def __init__(self, grid, params, pot, mob, state):
        self.grid = grid
        self.params = params
        self.pot = pot
        self.mob = mob
        self.state = state
        self.ledger = TrajectoryLedger(
            dt=params.dt,
            scheme={
                "stepper": "convex-splitting semi-implicit",
                "nu": params.nu,
                "beta": params.beta,
                "r": params.r,
                "critical_exponent": params.critical,
            },
        )
        rec0 = _step_record(
            state.t, state.u, state.phi, state.mu,
            _m_faces(grid, mob, state.phi.data), pot, params, grid,
        )
        zero0 = DiagnosticsRecord(
            t=rec0.t, mass=rec0.mass, kinetic=rec0.kinetic,
            interfacial=rec0.interfacial, bulk=rec0.bulk,
            visc_diss=0.0, damp_diss=0.0, mob_diss=0.0, work=0.0,
            div_max=rec0.div_max, phi_max=rec0.phi_max,
        )
        self.ledger.append(zero0, degenerate_identity_extras(state.u, state.phi, pot, mob))

    @classmethod
    def from_config(cls, config):
        from .config import build_simulation

        return build_simulation(config)

    def step(self):
        self.state, record, extras = _step_coupled_full(
            self.state, self.params, self.pot, self.mob
        )
        self.ledger.append(record, extras)
        return record

    def run(self, n_steps=None, on_record=None):
        if n_steps is None:
            n_steps = int(round(self.params.t_final / self.params.dt))
        for _ in range(n_steps):
            record = self.step()
            if on_record is not None:
                on_record(record, self.state)
        return self.ledger
