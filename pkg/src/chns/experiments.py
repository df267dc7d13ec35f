"""Scripted parameter studies: refinement, damping sweeps, dependence probes.

Every study is deterministic given its plan (including seeds): field
initializations are bitwise reproducible and the iterative solves are
driven to tolerances far below the reported quantities.  Independent runs
inside one plan execute on a worker pool capped by the CHNS_THREADS
environment variable.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import RunConfig, build_materials, build_params, parse_extended
from .diagnostics import (
    energy_balance_residual,
    entropy_functional,
    hminus1_distance,
    overshoot_functional,
)
from .errors import ParameterError, PreconditionError
from .grid import (
    Grid,
    ScalarField,
    VectorField,
    _lap_component_arr,
    vector_norm,
)
from .materials import (
    EntropyFunction,
    degenerate_mobility,
    logarithmic_potential,
    potential_deriv,
    regularize_mobility,
    regularize_potential,
)
from .poisson import helmholtz_project, helmholtz_project_with_potential
from .solver import (
    Simulation,
    State,
    chemical_potential,
    convection,
    damping_pairing,
    initial_state,
    vortex_field,
)
from .svg import write_chart

__all__ = [
    "ExperimentPlan",
    "ExperimentReport",
    "parse_plan",
    "run_experiment",
    "run_refinement",
    "run_r_sweep",
    "run_continuous_dependence",
    "run_beta_nu_probe",
    "run_epsilon_sweep",
]

_KINDS = (
    "refinement",
    "r_sweep",
    "beta_nu_probe",
    "continuous_dependence",
    "epsilon_sweep",
)

_PLAN_SCHEMA = {
    "experiment.kind": ("str", ""),
    "experiment.seed": ("int", 1234),
    "refinement.grid_list": ("int_list", []),
    "refinement.dt_list": ("float_list", []),
    "refinement.amplitude": ("float", 3e-3),
    "r_sweep.r_list": ("float_list", []),
    "beta_nu.beta_list": ("float_list", []),
    "beta_nu.nu_list": ("float_list", []),
    "beta_nu.delta": ("float", 1e-2),
    "continuous_dependence.delta_list": ("float_list", []),
    "epsilon_sweep.eps_list": ("float_list", []),
}


@dataclass(frozen=True)
class ExperimentPlan:
    kind: str
    seed: int
    params: dict
    base: RunConfig

    @property
    def out_dir(self):
        return self.base["output.dir"]


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    summary: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    ledgers: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def write(self, out_dir):
        """Report tree: per-run diagnostics CSVs, summary.csv, one SVG per curve."""
        root = os.path.join(out_dir, self.kind)
        os.makedirs(root, exist_ok=True)
        paths = []
        for label, ledger in sorted(self.ledgers.items()):
            path = os.path.join(root, f"run_{label}.csv")
            _write_ledger_csv(path, ledger)
            paths.append(path)
        if self.summary:
            path = os.path.join(root, "summary.csv")
            keys = list(self.summary[0].keys())
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(",".join(keys) + "\n")
                for row in self.summary:
                    fh.write(",".join(_csv_cell(row[k]) for k in keys) + "\n")
            paths.append(path)
        for name, (xlabel, ylabel, series) in sorted(self.curves.items()):
            path = os.path.join(root, f"{name}.svg")
            write_chart(path, name.replace("_", " "), xlabel, ylabel, series)
            paths.append(path)
        if self.notes:
            path = os.path.join(root, "notes.csv")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("key,value\n")
                for key in sorted(self.notes):
                    fh.write(f"{key},{_csv_cell(self.notes[key])}\n")
            paths.append(path)
        return paths


def _csv_cell(val):
    return repr(val) if isinstance(val, float) else str(val)


def _write_ledger_csv(path, ledger):
    from .diagnostics import CSV_COLUMNS

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in ledger.records:
            fh.write(rec.to_csv_row() + "\n")


def parse_plan(text):
    """Plan file: an experiment.kind plus parameter lists, on top of the
    regular config keys (which become the base run configuration)."""
    base, extras = parse_extended(text, _PLAN_SCHEMA)
    kind = extras["experiment.kind"]
    if kind not in _KINDS:
        raise ParameterError(
            f"experiment.kind must be one of {_KINDS}, got {kind!r}"
        )
    return ExperimentPlan(kind=kind, seed=extras["experiment.seed"], params=extras, base=base)


def max_workers():
    env = os.environ.get("CHNS_THREADS", "")
    if env.strip():
        try:
            cap = int(env)
        except ValueError:
            raise ParameterError(f"CHNS_THREADS must be an integer, got {env!r}")
        return max(1, cap)
    return max(1, os.cpu_count() or 1)


def _run_parallel(tasks):
    """Execute callables concurrently, results in submission order."""
    workers = min(max_workers(), len(tasks)) or 1
    if workers == 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def run_experiment(plan):
    runner = {
        "refinement": run_refinement,
        "r_sweep": run_r_sweep,
        "beta_nu_probe": run_beta_nu_probe,
        "continuous_dependence": run_continuous_dependence,
        "epsilon_sweep": run_epsilon_sweep,
    }[plan.kind]
    return runner(plan)


# ---------------------------------------------------------------------------
# shared run helpers

def _smooth_state(grid, pot, poisson_tol, vortex_amp=0.4):
    """Deterministic smooth initial data usable across grid resolutions."""
    x = grid.cell_centers(0)
    y = grid.cell_centers(1)
    X = x.reshape((-1,) + (1,) * (grid.dim - 1))
    Y = y.reshape((1, -1) + (1,) * (grid.dim - 2))
    data = (
        0.3 * np.cos(np.pi * X) * np.cos(np.pi * Y)
        + 0.2 * np.cos(2 * np.pi * X)
        + np.zeros(grid.cell_shape)
    )
    phi = ScalarField(grid, data)
    if vortex_amp:
        u, _ = helmholtz_project(vortex_field(grid, vortex_amp), poisson_tol)
    else:
        u = VectorField.zeros(grid)
    return State(0.0, u, phi, chemical_potential(phi, pot), ScalarField.zeros(grid))


def _simulation_from(cfg, pot=None, mob=None, state=None, **param_overrides):
    grid = Grid(cfg["grid.dim"], cfg["grid.n"])
    base_pot, base_mob = build_materials(cfg)
    pot = pot or base_pot
    mob = mob or base_mob
    params = build_params(cfg)
    if param_overrides:
        params = replace(params, **param_overrides)
    if state is None:
        state = initial_state(
            grid,
            pot,
            phi_mean=cfg["init.phi_mean"],
            noise_amp=cfg["init.noise_amp"],
            seed=cfg["init.seed"],
            velocity=cfg["init.velocity"],
            velocity_amp=cfg["init.velocity_amp"],
            poisson_tol=cfg["solver.poisson_tol"],
        )
    return Simulation(grid, params, pot, mob, state)


def _coarsen_cells(arr, factor):
    """Block average a cell array down by an integer factor per axis."""
    out = arr
    for axis in range(arr.ndim):
        n = out.shape[axis] // factor
        shape = list(out.shape)
        shape[axis : axis + 1] = [n, factor]
        out = out.reshape(shape).mean(axis=axis + 1)
    return out


# ---------------------------------------------------------------------------
# refinement

def run_refinement(plan):
    """Grid and/or time-step refinement with Cauchy differences.

    Spatial mode runs the diffusion-only linear-regime setup (single cosine
    mode, zero velocity); the mode amplitude admits an exact linearized
    decay factor, and successive differences of the signed amplitude error
    cancel the shared time-integration error, exposing the spatial order.
    """
    grids = plan.params["refinement.grid_list"]
    dts = plan.params["refinement.dt_list"]
    if len(grids) < 3 and len(dts) < 3:
        raise PreconditionError(
            "refinement plan needs >= 3 grid sizes or >= 3 time steps"
        )
    report = ExperimentReport(kind="refinement", seed=plan.seed)
    cfg = plan.base
    if grids:
        _refine_space(plan, cfg, grids, report)
    if dts:
        _refine_time(plan, cfg, dts, report)
    return report


def _refine_space(plan, cfg, grids, report):
    amp = plan.params["refinement.amplitude"]
    pot, mob = build_materials(cfg)
    if pot.kind == "regularized":
        raise PreconditionError("spatial refinement oracle needs regular/logarithmic potential")
    phi_mean = cfg["init.phi_mean"]
    lam = 2 * np.pi**2
    curvature = float(potential_deriv(pot, phi_mean, 2))
    rate = lam * (lam + curvature)
    t_final = cfg["time.t_final"]
    exact = amp * math.exp(-rate * t_final)

    def one(n):
        grid = Grid(cfg["grid.dim"], n)
        x = grid.cell_centers(0)
        mode = np.cos(np.pi * x).reshape((-1,) + (1,) * (grid.dim - 1)) * np.cos(
            np.pi * x
        ).reshape((1, -1) + (1,) * (grid.dim - 2))
        mode = mode * np.ones(grid.cell_shape)
        phi = ScalarField(grid, phi_mean + amp * mode)
        state = State(
            0.0, VectorField.zeros(grid), phi, chemical_potential(phi, pot),
            ScalarField.zeros(grid),
        )
        sub = cfg.with_updates(grid__n=str(n))
        sim = _simulation_from(sub, pot=pot, mob=mob, state=state)
        sim.run()
        measured = float(
            np.vdot(sim.state.phi.data - phi_mean, mode) / np.vdot(mode, mode)
        )
        return sim, measured

    results = _run_parallel([lambda n=n: one(n) for n in grids])
    errors = []
    fields = {}
    for n, (sim, measured) in zip(grids, results):
        errors.append(measured - exact)
        fields[n] = sim.state.phi.data
        report.ledgers[f"n{n}"] = sim.ledger

    orders = []
    for i in range(len(grids) - 2):
        d1 = errors[i] - errors[i + 1]
        d2 = errors[i + 1] - errors[i + 2]
        orders.append(math.log2(abs(d1 / d2)) if d2 != 0 else float("nan"))

    cauchy = []
    for a, b in zip(grids, grids[1:]):
        fine = _coarsen_cells(fields[b], b // a)
        cauchy.append(float(np.linalg.norm(fine - fields[a])) / a ** (cfg["grid.dim"] / 2))
    cauchy_orders = [
        math.log2(cauchy[i] / cauchy[i + 1]) for i in range(len(cauchy) - 1)
    ]

    for i, n in enumerate(grids):
        report.summary.append(
            {
                "mode": "spatial",
                "n": n,
                "dt": cfg["time.dt"],
                "amp_error": errors[i],
                "cauchy_diff": cauchy[i] if i < len(cauchy) else float("nan"),
                "observed_order": orders[i - 1] if 0 < i <= len(orders) else float("nan"),
                "cauchy_order": cauchy_orders[i - 1] if 0 < i <= len(cauchy_orders) else float("nan"),
                "energy_residual": energy_balance_residual(report.ledgers[f"n{n}"]),
            }
        )
    report.notes["spatial_orders"] = orders
    report.notes["cauchy_orders"] = cauchy_orders
    report.curves["spatial_error_vs_h"] = (
        "h",
        "|amplitude error|",
        [([1.0 / n for n in grids], [abs(e) for e in errors], "amp error")],
    )


def _refine_time(plan, cfg, dts, report):
    pot, mob = build_materials(cfg)

    def one(dt):
        grid = Grid(cfg["grid.dim"], cfg["grid.n"])
        state = _smooth_state(grid, pot, cfg["solver.poisson_tol"])
        sim = _simulation_from(cfg, pot=pot, mob=mob, state=state, dt=dt)
        sim.run(n_steps=int(round(cfg["time.t_final"] / dt)))
        return sim

    sims = _run_parallel([lambda dt=dt: one(dt) for dt in dts])
    residuals = []
    fields = []
    for dt, sim in zip(dts, sims):
        residuals.append(energy_balance_residual(sim.ledger))
        fields.append(sim.state.phi.data)
        report.ledgers[f"dt{dt}"] = sim.ledger
    cauchy = [
        float(np.linalg.norm(a - b)) * sims[0].grid.cell_volume**0.5
        for a, b in zip(fields, fields[1:])
    ]
    for i, dt in enumerate(dts):
        ratio = residuals[i - 1] / residuals[i] if i > 0 and residuals[i] else float("nan")
        report.summary.append(
            {
                "mode": "temporal",
                "n": cfg["grid.n"],
                "dt": dt,
                "energy_residual": residuals[i],
                "residual_ratio": ratio,
                "cauchy_diff": cauchy[i] if i < len(cauchy) else float("nan"),
            }
        )
    report.notes["energy_residuals"] = residuals
    report.curves["energy_residual_vs_dt"] = (
        "dt",
        "normalized energy residual",
        [(list(dts), residuals, "residual")],
    )


# ---------------------------------------------------------------------------
# r sweep

def _linear_drag_reference(cfg, beta, n_steps):
    """Independent linear-drag momentum stepper (drag term = beta * u).

    Shares only the grid primitives with step_ns; the damping is applied as
    a scalar coefficient, never through |u|^(r-1) powers.
    """
    grid = Grid(cfg["grid.dim"], cfg["grid.n"])
    pot, mob = build_materials(cfg)
    params = build_params(cfg)
    state = initial_state(
        grid, pot, cfg["init.phi_mean"], cfg["init.noise_amp"], cfg["init.seed"],
        cfg["init.velocity"], cfg["init.velocity_amp"], cfg["solver.poisson_tol"],
    )
    sim = Simulation(grid, params, pot, mob, state)
    dt, nu = params.dt, params.nu
    snapshots = []
    from .grid import _grad_arrays, cell_to_face
    from .solver import _cg_component, _step_ch_full

    for _ in range(n_steps):
        st = sim.state
        phi_new, mu_half, _ = _step_ch_full(st, params, pot, mob)
        gphi = _grad_arrays(grid, st.phi.data)
        force = [cell_to_face(mu_half, c) * gphi[c] for c in range(grid.dim)]
        fv = VectorField(grid, tuple(force))
        fv.zero_normal_boundaries()
        f_proj, _, _ = helmholtz_project_with_potential(fv, params.poisson_tol)
        conv = convection(st.u, st.u)
        comps = []
        for c in range(grid.dim):
            b = st.u.components[c] + dt * (f_proj.components[c] - conv.components[c])
            scale = 1.0 + dt * beta

            def matvec(x, c=c, scale=scale):
                return scale * x - dt * nu * _lap_component_arr(grid, x, c)

            sol, _ = _cg_component(matvec, b, st.u.components[c], 1e-12, 400)
            comps.append(sol)
        tilde = VectorField(grid, tuple(comps))
        tilde.zero_normal_boundaries()
        u_new, _, _ = helmholtz_project_with_potential(tilde, params.poisson_tol)
        sim.state = State(st.t + dt, u_new, phi_new,
                          chemical_potential(phi_new, pot), st.pi)
        snapshots.append(u_new)
    return snapshots


def run_r_sweep(plan):
    """Same initial data across absorption exponents r."""
    r_list = plan.params["r_sweep.r_list"]
    if not r_list:
        raise PreconditionError("r_sweep plan needs a non-empty r list")
    if any(r < 1.0 or r > 5.0 for r in r_list):
        raise PreconditionError(f"r list must lie in [1, 5], got {r_list}")
    cfg = plan.base
    n_steps = int(round(cfg["time.t_final"] / cfg["time.dt"]))

    def one(r):
        sim = _simulation_from(cfg, r=r)
        prev_u = sim.state.u
        min_pairing = math.inf
        for _ in range(n_steps):
            sim.step()
            min_pairing = min(min_pairing, damping_pairing(sim.state.u, prev_u, r))
            prev_u = sim.state.u
        return sim, min_pairing

    results = _run_parallel([lambda r=r: one(r) for r in r_list])
    report = ExperimentReport(kind="r_sweep", seed=plan.seed)
    kinetics, damp_totals = [], []
    for r, (sim, min_pairing) in zip(r_list, results):
        recs = sim.ledger.records
        terminal_kin = recs[-1].kinetic
        damp_total = sum(rec.damp_diss for rec in recs[1:]) * sim.params.dt
        kinetics.append(terminal_kin)
        damp_totals.append(damp_total)
        report.ledgers[f"r{r:g}"] = sim.ledger
        report.summary.append(
            {
                "r": r,
                "terminal_kinetic": terminal_kin,
                "total_damp_diss": damp_total,
                "min_step_pairing": min_pairing,
                "critical": r == 3.0,
            }
        )

    # r = 1 against the independent linear-drag stepper
    if 1.0 in r_list:
        sim = _simulation_from(cfg, r=1.0)
        diffs = []
        refs = _linear_drag_reference(cfg, cfg["physics.beta"], n_steps)
        for ref_u in refs:
            sim.step()
            diffs.append(
                max(
                    float(np.abs(a - b).max())
                    for a, b in zip(sim.state.u.components, ref_u.components)
                )
            )
        report.notes["linear_drag_max_diff"] = max(diffs) if diffs else 0.0

    # beta = 0 limit against a no-damping control
    sim0 = _simulation_from(cfg, r=r_list[0], beta=0.0)
    refs = _linear_drag_reference(cfg, 0.0, n_steps)
    diffs = []
    for ref_u in refs:
        sim0.step()
        diffs.append(
            max(
                float(np.abs(a - b).max())
                for a, b in zip(sim0.state.u.components, ref_u.components)
            )
        )
    report.notes["beta_zero_max_diff"] = max(diffs) if diffs else 0.0

    report.curves["terminal_kinetic_vs_r"] = (
        "r", "terminal kinetic energy", [(list(r_list), kinetics, "kinetic")],
    )
    report.curves["total_damping_vs_r"] = (
        "r", "integrated damping dissipation", [(list(r_list), damp_totals, "damping")],
    )
    return report


# ---------------------------------------------------------------------------
# continuous dependence

def _perturbation_directions(grid, seed, poisson_tol):
    """Unit-norm perturbations: solenoidal velocity, mean-zero scalar."""
    rng = np.random.default_rng(seed)
    z = VectorField(grid, tuple(rng.standard_normal(grid.face_shape(c)) for c in range(grid.dim)))
    z.zero_normal_boundaries()
    z, _ = helmholtz_project(z, poisson_tol)
    zn = vector_norm(z)
    zhat = VectorField(grid, tuple(a / zn for a in z.components))
    rho = rng.standard_normal(grid.cell_shape)
    rho -= rho.mean()
    rho /= np.linalg.norm(rho) * grid.cell_volume**0.5
    return zhat, rho


def _dependence_distance(s1, s2, tol):
    z = VectorField(
        s1.u.grid, tuple(a - b for a, b in zip(s1.u.components, s2.u.components))
    )
    star, l2 = hminus1_distance(s1.phi, s2.phi, tol)
    return vector_norm(z) ** 2 + star**2 + l2**2


def _paired_run(cfg, delta, zhat, rho_hat, n_steps, sample_every=1, **overrides):
    """Lockstep base/perturbed trajectories; returns (times, D(t) samples)."""
    grid = Grid(cfg["grid.dim"], cfg["grid.n"])
    pot, mob = build_materials(cfg)
    base_state = initial_state(
        grid, pot, cfg["init.phi_mean"], cfg["init.noise_amp"], cfg["init.seed"],
        cfg["init.velocity"], cfg["init.velocity_amp"], cfg["solver.poisson_tol"],
    )
    pert_phi = ScalarField(grid, base_state.phi.data + delta * rho_hat)
    pert_u = VectorField(
        grid,
        tuple(a + delta * b for a, b in zip(base_state.u.components, zhat.components)),
    )
    pert_state = State(0.0, pert_u, pert_phi, chemical_potential(pert_phi, pot),
                       ScalarField.zeros(grid))
    sim1 = _simulation_from(cfg, pot=pot, mob=mob, state=base_state, **overrides)
    sim2 = _simulation_from(cfg, pot=pot, mob=mob, state=pert_state, **overrides)
    tol = cfg["solver.poisson_tol"]
    times = [0.0]
    dists = [_dependence_distance(sim1.state, sim2.state, tol)]
    for k in range(1, n_steps + 1):
        sim1.step()
        sim2.step()
        if k % sample_every == 0 or k == n_steps:
            times.append(sim1.state.t)
            dists.append(_dependence_distance(sim1.state, sim2.state, tol))
    return times, dists, sim1, sim2


def run_continuous_dependence(plan):
    """Trajectory distance D(t) = ||z||^2 + ||rho||_*^2 + ||rho||^2 vs delta."""
    deltas = plan.params["continuous_dependence.delta_list"]
    if len(deltas) < 3:
        raise PreconditionError("continuous dependence needs >= 3 perturbation sizes")
    cfg = plan.base
    grid = Grid(cfg["grid.dim"], cfg["grid.n"])
    zhat, rho_hat = _perturbation_directions(grid, plan.seed, cfg["solver.poisson_tol"])
    n_steps = int(round(cfg["time.t_final"] / cfg["time.dt"]))
    sample_every = max(1, n_steps // 50)

    def one(delta):
        return _paired_run(cfg, delta, zhat, rho_hat, n_steps, sample_every)

    results = _run_parallel([lambda d=d: one(d) for d in deltas])
    report = ExperimentReport(kind="continuous_dependence", seed=plan.seed)
    series = []
    terminals = []
    for delta, (times, dists, sim1, _) in zip(deltas, results):
        d0, dT = dists[0], dists[-1]
        terminals.append(dT)
        amp = dT / d0 if d0 > 0 else float("nan")
        growth = _growth_fit(times, dists)
        report.ledgers[f"delta{delta:g}"] = sim1.ledger
        report.summary.append(
            {
                "delta": delta,
                "D0": d0,
                "DT": dT,
                "amplification": amp,
                "exp_rate_fit": growth,
            }
        )
        series.append((times, dists, f"delta={delta:g}"))

    # zero-perturbation control: identical runs, D must vanish
    _, dists0, _, _ = _paired_run(cfg, 0.0, zhat, rho_hat, min(n_steps, 20))
    report.notes["zero_delta_max_D"] = max(dists0)
    report.notes["terminal_ratios"] = [
        terminals[i] / terminals[i + 1] if terminals[i + 1] else float("nan")
        for i in range(len(terminals) - 1)
    ]
    report.curves["distance_vs_time"] = ("t", "D(t)", series)
    report.curves["terminal_distance_vs_delta"] = (
        "delta", "D(T)", [(list(deltas), terminals, "terminal D")],
    )
    return report


def _growth_fit(times, dists):
    """Smallest c with D(t) <= D(0) exp(c t) along the sampled trajectory."""
    d0 = dists[0]
    if d0 <= 0:
        return float("nan")
    best = 0.0
    for t, d in zip(times[1:], dists[1:]):
        if d > 0 and t > 0:
            best = max(best, math.log(d / d0) / t)
    return best


def run_beta_nu_probe(plan):
    """Amplification landscape over (beta, nu) pairs at r = 3; descriptive."""
    betas = plan.params["beta_nu.beta_list"]
    nus = plan.params["beta_nu.nu_list"]
    delta = plan.params["beta_nu.delta"]
    if not betas or len(betas) != len(nus):
        raise PreconditionError("beta_nu probe needs equal-length beta and nu lists")
    products = [b * n for b, n in zip(betas, nus)]
    if not (min(products) <= 1.0 <= max(products)):
        raise PreconditionError(
            f"beta*nu products {products} must straddle the critical line beta*nu = 1"
        )
    cfg = plan.base
    grid = Grid(cfg["grid.dim"], cfg["grid.n"])
    zhat, rho_hat = _perturbation_directions(grid, plan.seed, cfg["solver.poisson_tol"])
    n_steps = int(round(cfg["time.t_final"] / cfg["time.dt"]))

    def one(beta, nu):
        times, dists, sim1, _ = _paired_run(
            cfg, delta, zhat, rho_hat, n_steps, max(1, n_steps // 20),
            beta=beta, nu=nu, r=3.0,
        )
        return dists[0], dists[-1], sim1

    results = _run_parallel([lambda b=b, n=n: one(b, n) for b, n in zip(betas, nus)])
    rows = []
    for (beta, nu), (d0, dT, sim1) in zip(zip(betas, nus), results):
        amp = dT / d0 if d0 > 0 else float("nan")
        if not math.isfinite(amp):
            raise PreconditionError(f"non-finite amplification at beta={beta}, nu={nu}")
        rows.append(
            {
                "beta_nu": beta * nu,
                "beta": beta,
                "nu": nu,
                "D0": d0,
                "DT": dT,
                "amplification": amp,
            }
        )
    rows.sort(key=lambda row: row["beta_nu"])
    report = ExperimentReport(kind="beta_nu_probe", seed=plan.seed)
    report.summary = rows
    report.curves["amplification_vs_beta_nu"] = (
        "beta*nu",
        "D(T)/D(0)",
        [([row["beta_nu"] for row in rows], [row["amplification"] for row in rows], "amplification")],
    )
    return report


# ---------------------------------------------------------------------------
# epsilon sweep

def run_epsilon_sweep(plan):
    """Regularization ladder: same spinodal data, decreasing clamp width."""
    eps_list = plan.params["epsilon_sweep.eps_list"]
    if len(eps_list) < 3:
        raise PreconditionError("epsilon sweep needs >= 3 decreasing entries")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError(f"epsilon list must be strictly decreasing, got {eps_list}")
    cfg = plan.base
    if abs(cfg["init.phi_mean"]) + cfg["init.noise_amp"] > 1.0 - max(eps_list):
        raise PreconditionError(
            "initial data must satisfy |phi| <= 1 - eps for every eps in the list"
        )
    base_pot = logarithmic_potential(cfg["potential.theta"], cfg["potential.theta_c"])
    base_mob = degenerate_mobility(cfg["mobility.n"])
    n_steps = int(round(cfg["time.t_final"] / cfg["time.dt"]))

    def one(eps):
        pot = regularize_potential(base_pot, eps)
        mob = regularize_mobility(base_mob, eps)
        entropy = EntropyFunction(mob)
        sim = _simulation_from(cfg, pot=pot, mob=mob)
        overshoot = [overshoot_functional(sim.state.phi)]
        ent = [entropy_functional(sim.state.phi, entropy)]
        for _ in range(n_steps):
            sim.step()
            overshoot.append(overshoot_functional(sim.state.phi))
            ent.append(entropy_functional(sim.state.phi, entropy))
        return sim, overshoot, ent

    results = _run_parallel([lambda e=e: one(e) for e in eps_list])
    report = ExperimentReport(kind="epsilon_sweep", seed=plan.seed)
    terminal_overshoot = []
    over_series, ent_series = [], []
    for eps, (sim, overshoot, ent) in zip(eps_list, results):
        times = [rec.t for rec in sim.ledger.records]
        terminal_overshoot.append(overshoot[-1])
        report.ledgers[f"eps{eps:g}"] = sim.ledger
        report.summary.append(
            {
                "eps": eps,
                "initial_overshoot": overshoot[0],
                "terminal_overshoot": overshoot[-1],
                "max_overshoot": max(overshoot),
                "entropy_initial": ent[0],
                "entropy_max": max(ent),
                "phi_max": max(rec.phi_max for rec in sim.ledger.records),
            }
        )
        over_series.append((times, overshoot, f"eps={eps:g}"))
        ent_series.append((times, ent, f"eps={eps:g}"))

    report.notes["terminal_overshoots"] = terminal_overshoot
    report.notes["weakly_decreasing"] = all(
        b <= a + 1e-14 for a, b in zip(terminal_overshoot, terminal_overshoot[1:])
    )

    # companion run with the raw logarithmic potential: |phi| must stay < 1
    log_mob = regularize_mobility(base_mob, eps_list[0])
    sim_log = _simulation_from(cfg, pot=base_pot, mob=log_mob)
    for _ in range(n_steps):
        sim_log.step()
    report.ledgers["logarithmic"] = sim_log.ledger
    report.notes["log_phi_max"] = max(rec.phi_max for rec in sim_log.ledger.records)

    report.curves["overshoot_vs_time"] = ("t", "overshoot functional", over_series)
    report.curves["entropy_vs_time"] = ("t", "entropy functional", ent_series)
    report.curves["terminal_overshoot_vs_eps"] = (
        "eps", "terminal overshoot",
        [(list(eps_list), terminal_overshoot, "overshoot")],
    )
    return report
