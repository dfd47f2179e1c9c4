//! Run orchestration: build a case, march it to the final time, and
//! collect diagnostics along the way.

use std::time::Instant;

use crate::baselines::SchemeKind;
use crate::cases::{self, CaseParams, Problem};
use crate::config::RunConfig;
use crate::diag;
use crate::eos::ConservedState;
use crate::grid::{compute_dt, fill_ghosts, BoundaryRule, BoundaryRules, FieldSet, Grid};
use crate::scheme::SchemeParams;
use crate::snapshot::write_snapshot;
use crate::time::{Stepper, StepperKind};
use crate::{Error, Result};

/// Diagnostics collected over one run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub case: String,
    pub scheme: SchemeKind,
    pub order: u8,
    pub resolution: (usize, usize),
    pub mach: f64,
    pub t_final: f64,
    pub steps: u64,
    pub wall_seconds: f64,
    /// L1 errors of `[rho, mom1, mom2, energy]` against the exact solution
    /// at the final time; absent when the case has none.
    pub l1: Option<[f64; 4]>,
    /// Decimated `(t, kinetic energy)` samples, always including the first
    /// and last step.
    pub kinetic_energy_history: Vec<(f64, f64)>,
    /// Final kinetic energy as a percentage of the initial one; absent for
    /// initial data at rest.
    pub kinetic_energy_retention: Option<f64>,
    /// Largest per-cell discrete entropy inequality residual seen over the
    /// run; recorded only for first-order relaxation runs.
    pub max_entropy_residual: Option<f64>,
    /// Smallest interior density over all completed steps.
    pub min_rho: f64,
    /// Smallest interior pressure over all completed steps.
    pub min_p: f64,
    /// Grid-frequency (odd-even) amplitude of each velocity component at
    /// the final time.
    pub checkerboard_u: [f64; 2],
    pub checkerboard_p: f64,
    /// RMS fluctuation of each velocity component at the final time, the
    /// scale against which the checkerboard amplitude is judged.
    pub rms_u: [f64; 2],
    pub rms_p: f64,
}

impl RunReport {
    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "case {}: scheme {}, order {}, {}x{}, mach {}, t_final {}\n\
             steps {}, wall {:.3} s\n",
            self.case,
            self.scheme.name(),
            self.order,
            self.resolution.0,
            self.resolution.1,
            self.mach,
            self.t_final,
            self.steps,
            self.wall_seconds,
        );
        if let Some(l1) = self.l1 {
            out.push_str(&format!(
                "L1 = rho {:.6e}, mom1 {:.6e}, mom2 {:.6e}, energy {:.6e}\n",
                l1[0], l1[1], l1[2], l1[3]
            ));
        }
        out.push_str(&format!("min rho {:.6e}, min p {:.6e}\n", self.min_rho, self.min_p));
        if let Some(pct) = self.kinetic_energy_retention {
            out.push_str(&format!("kinetic energy retention {pct:.2} %\n"));
        }
        if let Some(res) = self.max_entropy_residual {
            out.push_str(&format!("max entropy residual {res:.6e}\n"));
        }
        out.push_str(&format!(
            "checkerboard u1 {:.3e}, u2 {:.3e}, p {:.3e} (rms u1 {:.3e}, u2 {:.3e}, p {:.3e})\n",
            self.checkerboard_u[0],
            self.checkerboard_u[1],
            self.checkerboard_p,
            self.rms_u[0],
            self.rms_u[1],
            self.rms_p,
        ));
        out
    }
}

/// A finished run: the report plus the final state for further inspection.
#[derive(Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub problem: Problem,
    pub grid: Grid,
    pub fields: FieldSet,
}

/// Bounded `(t, kinetic energy)` series: once 4096 samples accumulate the
/// series is thinned to every other entry and the sampling stride doubles.
struct KineticEnergyHistory {
    samples: Vec<(f64, f64)>,
    stride: u64,
    count: u64,
}

impl KineticEnergyHistory {
    fn new() -> Self {
        KineticEnergyHistory { samples: Vec::new(), stride: 1, count: 0 }
    }

    /// Record a sample if the stride calls for one; `ke` is only evaluated
    /// when the sample is kept.
    fn push(&mut self, t: f64, ke: impl FnOnce() -> f64) {
        if self.count % self.stride == 0 {
            if self.samples.len() >= 4096 {
                let mut k = 0;
                self.samples.retain(|_| {
                    k += 1;
                    (k - 1) % 2 == 0
                });
                self.stride *= 2;
            }
            self.samples.push((t, ke()));
        }
        self.count += 1;
    }

    fn push_final(&mut self, t: f64, ke: f64) {
        match self.samples.last() {
            Some(&(last_t, _)) if last_t == t => {}
            _ => self.samples.push((t, ke)),
        }
    }
}

fn track_minima(
    grid: &Grid,
    fields: &FieldSet,
    params: &SchemeParams,
    min_rho: &mut f64,
    min_p: &mut f64,
) -> Result<()> {
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let q = params.gas.cons_to_prim(&fields.cons[grid.idx(i, j)], params.mach, i, j)?;
            *min_rho = min_rho.min(q.rho);
            *min_p = min_p.min(q.p);
        }
    }
    Ok(())
}

fn reference_solution(problem: &Problem, grid: &Grid, t: f64) -> Option<Vec<ConservedState>> {
    if !problem.has_exact() {
        return None;
    }
    let mut cons =
        vec![ConservedState { rho: 1.0, mom: [0.0, 0.0], energy: 1.0 }; grid.n_cells()];
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let [x, y] = grid.cell_center(i, j);
            let q = problem.exact_solution(x, y, t)?;
            cons[grid.idx(i, j)] = problem.gas.prim_to_cons(&q, problem.mach);
        }
    }
    Some(cons)
}

fn snapshot_path(dir: &std::path::Path, step: u64) -> std::path::PathBuf {
    dir.join(format!("snapshot_{step:06}.csv"))
}

/// Execute one configured run to its final time.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let case_params = CaseParams {
        mach: config.mach,
        eta: config.eta,
        vortex_cutoff: config.vortex_cutoff,
        rho_bar: config.rho_bar,
    };
    let problem = cases::build(&config.case, &case_params)?;

    let nx = config.nx.unwrap_or(problem.default_resolution.0);
    let ny = config.ny.unwrap_or(problem.default_resolution.1);
    let t_final = config.t_final.unwrap_or(problem.t_final);
    let rules = match config.boundary {
        Some(rule) => BoundaryRules::uniform(rule),
        None => problem.boundary,
    };
    rules.validate()?;
    for rule in [rules.x_lo, rules.x_hi, rules.y_lo, rules.y_hi] {
        match rule {
            BoundaryRule::DirichletExact if !problem.has_exact() => {
                return Err(Error::UsageError(format!(
                    "case '{}' has no exact solution; dirichlet-exact boundaries need one",
                    problem.name
                )));
            }
            BoundaryRule::HydrostaticFill if !problem.has_hydrostatic() => {
                return Err(Error::UsageError(format!(
                    "case '{}' has no hydrostatic profile; hydrostatic-fill boundaries need one",
                    problem.name
                )));
            }
            _ => {}
        }
    }

    let params = SchemeParams {
        gas: problem.gas,
        mach: problem.mach,
        beta: config.beta,
        kind: config.scheme,
        mode: problem.rho_bar_mode,
        order: config.order,
        mhat_k: config.mhat_k,
        beta_retry: true,
    };
    params.validate()?;

    let grid = problem.grid(nx, ny)?;
    let mut fields = problem.setup(&grid)?;

    let stepper_kind = if config.order == 1 { StepperKind::Euler } else { StepperKind::SspRk3 };
    let mut stepper = Stepper::new(stepper_kind, &grid);
    let monitor_entropy = config.order == 1 && config.scheme != SchemeKind::RusanovNwb;

    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)
            .map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
        write_snapshot(&grid, &fields, params.gas, params.mach, &snapshot_path(dir, 0))?;
    }

    let mut min_rho = f64::INFINITY;
    let mut min_p = f64::INFINITY;
    track_minima(&grid, &fields, &params, &mut min_rho, &mut min_p)?;
    let ke_initial = diag::kinetic_energy(&grid, &fields.cons);
    let mut history = KineticEnergyHistory::new();
    history.push(0.0, || ke_initial);

    let mut before = if monitor_entropy { Some(fields.clone()) } else { None };
    let mut max_entropy_residual = None;

    let start = Instant::now();
    let mut t = 0.0;
    let mut steps: u64 = 0;
    let mut last_snapshot_step = 0;
    let stop = 1e-14 * t_final.max(1.0);
    while t_final - t > stop {
        let dt = compute_dt(params.gas, &grid, &fields, params.mach, config.cfl, params.law(), params.mhat_k)?
            .min(t_final - t);
        if let Some(b) = before.as_mut() {
            fill_ghosts(&grid, &mut fields, &rules, t, &problem, params.gas, params.mach)?;
            b.clone_from(&fields);
        }
        stepper.advance(&params, &grid, &mut fields, &rules, &problem, t, dt)?;
        if let Some(b) = before.as_ref() {
            let res = diag::entropy_residual(&params, &grid, b, &fields, dt)?;
            let worst = max_entropy_residual.get_or_insert(f64::NEG_INFINITY);
            *worst = worst.max(res);
        }
        t += dt;
        steps += 1;
        track_minima(&grid, &fields, &params, &mut min_rho, &mut min_p)?;
        history.push(t, || diag::kinetic_energy(&grid, &fields.cons));
        if let (Some(dir), Some(every)) = (&config.output_dir, config.snapshot_every) {
            if steps % every as u64 == 0 {
                write_snapshot(&grid, &fields, params.gas, params.mach, &snapshot_path(dir, steps))?;
                last_snapshot_step = steps;
            }
        }
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    if let Some(dir) = &config.output_dir {
        if steps > last_snapshot_step {
            write_snapshot(&grid, &fields, params.gas, params.mach, &snapshot_path(dir, steps))?;
        }
    }

    let ke_final = diag::kinetic_energy(&grid, &fields.cons);
    history.push_final(t, ke_final);
    let kinetic_energy_retention =
        if ke_initial > 0.0 { Some(100.0 * ke_final / ke_initial) } else { None };

    let l1 = match reference_solution(&problem, &grid, t) {
        Some(reference) => Some(diag::l1_error(&grid, &fields.cons, &reference)?),
        None => None,
    };

    let u1 = diag::primitive_component(&grid, &fields, params.gas, params.mach, |q| q.u[0])?;
    let u2 = diag::primitive_component(&grid, &fields, params.gas, params.mach, |q| q.u[1])?;
    let p = diag::primitive_component(&grid, &fields, params.gas, params.mach, |q| q.p)?;

    let report = RunReport {
        case: config.case.clone(),
        scheme: config.scheme,
        order: config.order,
        resolution: (nx, ny),
        mach: params.mach,
        t_final,
        steps,
        wall_seconds,
        l1,
        kinetic_energy_history: history.samples,
        kinetic_energy_retention,
        max_entropy_residual,
        min_rho,
        min_p,
        checkerboard_u: [
            diag::checkerboard_amplitude(&grid, &u1)?,
            diag::checkerboard_amplitude(&grid, &u2)?,
        ],
        checkerboard_p: diag::checkerboard_amplitude(&grid, &p)?,
        rms_u: [diag::rms_fluctuation(&grid, &u1)?, diag::rms_fluctuation(&grid, &u2)?],
        rms_p: diag::rms_fluctuation(&grid, &p)?,
    };
    Ok(RunOutput { report, problem, grid, fields })
}

/// L1 errors and observed convergence rates over a sequence of grids.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub case: String,
    pub scheme: SchemeKind,
    pub order: u8,
    pub levels: Vec<usize>,
    /// Per-level L1 errors of `[rho, mom1, mom2, energy]`.
    pub errors: Vec<[f64; 4]>,
    /// `errors.len() - 1` rows of observed rates between consecutive levels.
    pub rates: Vec<[f64; 4]>,
}

impl ConvergenceReport {
    pub fn summary(&self) -> String {
        let mut out = format!(
            "case {}: scheme {}, order {}\n{:>6} {:>13} {:>13} {:>13} {:>13}\n",
            self.case,
            self.scheme.name(),
            self.order,
            "N",
            "rho",
            "mom1",
            "mom2",
            "energy"
        );
        for (k, (n, err)) in self.levels.iter().zip(self.errors.iter()).enumerate() {
            out.push_str(&format!(
                "{:>6} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}\n",
                n, err[0], err[1], err[2], err[3]
            ));
            if k < self.rates.len() {
                let r = self.rates[k];
                out.push_str(&format!(
                    "{:>6} {:>13.2} {:>13.2} {:>13.2} {:>13.2}\n",
                    "rate", r[0], r[1], r[2], r[3]
                ));
            }
        }
        out
    }
}

/// Run the configured case on each grid level and report errors and rates.
/// The case must provide an exact solution.
pub fn convergence(config: &RunConfig, levels: &[usize]) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::UsageError("convergence study needs at least one level".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UsageError(format!(
            "levels must be strictly increasing, got {levels:?}"
        )));
    }
    let mut errors = Vec::with_capacity(levels.len());
    for &n in levels {
        let mut level_config = config.clone();
        level_config.nx = Some(n);
        level_config.ny = Some(n);
        level_config.output_dir = None;
        level_config.snapshot_every = None;
        let out = run(&level_config)?;
        let l1 = out.report.l1.ok_or_else(|| {
            Error::UsageError(format!(
                "case '{}' has no exact solution; convergence cannot be measured",
                out.report.case
            ))
        })?;
        errors.push(l1);
    }
    let mut rates = Vec::new();
    for k in 1..levels.len() {
        let refine = (levels[k] as f64 / levels[k - 1] as f64).ln();
        let mut row = [0.0; 4];
        for v in 0..4 {
            row[v] = (errors[k - 1][v] / errors[k][v]).ln() / refine;
        }
        rates.push(row);
    }
    Ok(ConvergenceReport {
        case: config.case.clone(),
        scheme: config.scheme,
        order: config.order,
        levels: levels.to_vec(),
        errors,
        rates,
    })
}
