//! Time steppers: forward Euler and the three-stage SSP Runge-Kutta
//! scheme.
//!
//! The RK combinations are applied in increment form,
//! `u <- u0 + w ((u_stage + dt L) - u0)`, so a stationary state (spatial
//! operator exactly zero) passes through every stage bitwise unchanged;
//! the usual convex-combination form can wobble in the last bit because
//! `3/4 u + 1/4 u` need not round back to `u`.

use crate::eos::ConservedState;
use crate::grid::{fill_ghosts, BoundaryProvider, BoundaryRules, FieldSet, Grid};
use crate::scheme::{residual, SchemeParams, Workspace};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepperKind {
    Euler,
    SspRk3,
}

impl StepperKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(StepperKind::Euler),
            "ssprk3" => Ok(StepperKind::SspRk3),
            other => Err(Error::UsageError(format!(
                "unknown time stepper '{other}' (expected euler or ssprk3)"
            ))),
        }
    }
}

/// Stepper with reusable stage buffers.
pub struct Stepper {
    pub kind: StepperKind,
    ws: Workspace,
    l: Vec<[f64; 4]>,
    u0: Vec<ConservedState>,
}

impl Stepper {
    pub fn new(kind: StepperKind, grid: &Grid) -> Self {
        Stepper {
            kind,
            ws: Workspace::new(grid),
            l: vec![[0.0; 4]; grid.n_cells()],
            u0: vec![ConservedState { rho: 1.0, mom: [0.0, 0.0], energy: 1.0 }; grid.n_cells()],
        }
    }

    /// Advance `fields` from `t` to `t + dt`. Ghosts are refilled before
    /// every stage at the stage time (`t`, `t + dt`, `t + dt/2`), so
    /// time-dependent Dirichlet data stays consistent.
    pub fn advance(
        &mut self,
        params: &SchemeParams,
        grid: &Grid,
        fields: &mut FieldSet,
        rules: &BoundaryRules,
        provider: &dyn BoundaryProvider,
        t: f64,
        dt: f64,
    ) -> Result<()> {
        let ws = &mut self.ws;
        let l = &mut self.l;
        let mut op = |stage_t: f64, f: &mut FieldSet, l: &mut Vec<[f64; 4]>| -> Result<()> {
            fill_ghosts(grid, f, rules, stage_t, provider, params.gas, params.mach)?;
            residual(params, grid, f, ws, l)
        };
        match self.kind {
            StepperKind::Euler => {
                op(t, fields, l)?;
                apply(&mut fields.cons, l, dt);
            }
            StepperKind::SspRk3 => {
                self.u0.copy_from_slice(&fields.cons);
                op(t, fields, l)?;
                apply(&mut fields.cons, l, dt);
                op(t + dt, fields, l)?;
                combine(&mut fields.cons, &self.u0, l, dt, 0.25);
                op(t + 0.5 * dt, fields, l)?;
                combine(&mut fields.cons, &self.u0, l, dt, 2.0 / 3.0);
            }
        }
        Ok(())
    }
}

fn apply(cons: &mut [ConservedState], l: &[[f64; 4]], dt: f64) {
    for (w, dl) in cons.iter_mut().zip(l.iter()) {
        w.rho += dt * dl[0];
        w.mom[0] += dt * dl[1];
        w.mom[1] += dt * dl[2];
        w.energy += dt * dl[3];
    }
}

/// `u <- u0 + w ((u + dt l) - u0)`, the increment form of the SSP convex
/// combination `(1 - w) u0 + w (u + dt l)`.
fn combine(cons: &mut [ConservedState], u0: &[ConservedState], l: &[[f64; 4]], dt: f64, w: f64) {
    for ((s, base), dl) in cons.iter_mut().zip(u0.iter()).zip(l.iter()) {
        s.rho = base.rho + w * ((s.rho + dt * dl[0]) - base.rho);
        s.mom[0] = base.mom[0] + w * ((s.mom[0] + dt * dl[1]) - base.mom[0]);
        s.mom[1] = base.mom[1] + w * ((s.mom[1] + dt * dl[2]) - base.mom[1]);
        s.energy = base.energy + w * ((s.energy + dt * dl[3]) - base.energy);
    }
}
