//! Unsplit finite-volume update operator.
//!
//! For each direction the interface fluxes and the face-centered gravity
//! source halves are accumulated into a per-cell bracket; the spatial
//! operator is `L = -sum_d bracket_d / dx_d` and a forward-Euler step is
//! `w + dt L`. The pressure part of the momentum flux is accumulated in
//! unscaled units and divided by `M^2` once per cell, after the source
//! half has been subtracted, so on a discrete hydrostatic equilibrium the
//! bracket is exactly zero and the update leaves every bit unchanged.
//!
//! Second order reconstructs primitive traces per direction; the
//! well-balancing closure data (`rho_bar`, potential jump) always comes
//! from the flanking cell centers, never from the traces.

use crate::baselines::{rusanov_residual, SchemeKind};
use crate::eos::{GasModel, PrimitiveState};
use crate::grid::{effective_mach_speed, FieldSet, Grid};
use crate::recon::{evaluate_at_faces, limited_slopes, SlopeSet};
use crate::riemann::{
    closure_data, sgn, solve_face, FaceInput, FaceSolution, RhoBarMode, SpeedLaw,
};
use crate::{Error, Result};

/// Everything that parameterizes the spatial operator.
#[derive(Clone, Copy, Debug)]
pub struct SchemeParams {
    pub gas: GasModel,
    /// Reference Mach number of the dimensionless formulation.
    pub mach: f64,
    /// Relaxation speed safety factor (default 1.1).
    pub beta: f64,
    pub kind: SchemeKind,
    pub mode: RhoBarMode,
    /// Spatial order, 1 or 2.
    pub order: u8,
    /// Optional coarse-grid floor constant for the acoustic speed scaling.
    pub mhat_k: Option<f64>,
    /// Retry a face once with doubled beta if the internal-energy guard
    /// trips (off by default).
    pub beta_retry: bool,
}

impl SchemeParams {
    /// Relaxation speed law corresponding to the scheme kind; the Rusanov
    /// baseline shares the one-speed CFL scaling.
    pub fn law(&self) -> SpeedLaw {
        match self.kind {
            SchemeKind::TwoSpeed => SpeedLaw::TwoSpeed,
            SchemeKind::OneSpeed | SchemeKind::RusanovNwb => SpeedLaw::OneSpeed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mach > 0.0 && self.mach.is_finite()) {
            return Err(Error::UsageError(format!("mach must be positive, got {}", self.mach)));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::UsageError(format!(
                "beta must be at least 1 for positivity, got {}",
                self.beta
            )));
        }
        if self.order != 1 && self.order != 2 {
            return Err(Error::UsageError(format!("order must be 1 or 2, got {}", self.order)));
        }
        if let Some(k) = self.mhat_k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::UsageError(format!("mhat_k must be positive, got {k}")));
            }
        }
        Ok(())
    }
}

/// Scratch buffers reused across operator evaluations.
pub struct Workspace {
    pub(crate) prim: Vec<PrimitiveState>,
    pub(crate) slopes: Vec<SlopeSet>,
    /// Per-cell bracket accumulator of one direction:
    /// `[mass, normal momentum (advective), normal momentum (pressure,
    /// unscaled), transverse momentum, energy]`.
    pub(crate) acc: Vec<[f64; 5]>,
}

impl Workspace {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n_cells();
        Workspace {
            prim: vec![PrimitiveState { rho: 1.0, u: [0.0, 0.0], p: 1.0 }; n],
            slopes: vec![SlopeSet::default(); n],
            acc: vec![[0.0; 5]; n],
        }
    }
}

fn solve_face_guarded(
    params: &SchemeParams,
    face: &FaceInput,
    rb: f64,
    dz: f64,
) -> Result<FaceSolution> {
    match solve_face(params.gas, face, params.beta, params.law(), rb, dz) {
        Err(Error::FacePositivity { .. }) if params.beta_retry => {
            solve_face(params.gas, face, 2.0 * params.beta, params.law(), rb, dz)
        }
        other => other,
    }
}

/// One sweep direction.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

struct AxisView {
    axis: Axis,
    /// Spacing along the sweep.
    d: f64,
}

impl AxisView {
    /// Grid-frame velocity reordered to (normal, transverse).
    fn swap_in(&self, q: &PrimitiveState) -> PrimitiveState {
        match self.axis {
            Axis::X => *q,
            Axis::Y => PrimitiveState { rho: q.rho, u: [q.u[1], q.u[0]], p: q.p },
        }
    }
}

/// Evaluate the spatial operator `L` into `out` (length `grid.n_cells()`,
/// ghost entries left at zero). Ghost cells of `fields` must be filled for
/// the stage time beforehand.
pub fn residual(
    params: &SchemeParams,
    grid: &Grid,
    fields: &FieldSet,
    ws: &mut Workspace,
    out: &mut [[f64; 4]],
) -> Result<()> {
    assert_eq!(out.len(), grid.n_cells());
    assert_eq!(ws.prim.len(), grid.n_cells());
    for v in out.iter_mut() {
        *v = [0.0; 4];
    }

    if params.kind == SchemeKind::RusanovNwb {
        return rusanov_residual(params, grid, fields, ws, out);
    }

    convert_bands(params, grid, fields, &mut ws.prim)?;

    sweep(params, grid, fields, ws, AxisView { axis: Axis::X, d: grid.dx }, out)?;
    if !grid.is_1d() {
        sweep(params, grid, fields, ws, AxisView { axis: Axis::Y, d: grid.dy }, out)?;
    }
    Ok(())
}

/// Convert conserved to primitive values on the cross-shaped band the
/// sweeps read: full rows for interior `j`, full columns for interior `i`.
/// Corner ghosts are never touched.
pub(crate) fn convert_bands(
    params: &SchemeParams,
    grid: &Grid,
    fields: &FieldSet,
    prim: &mut [PrimitiveState],
) -> Result<()> {
    let gas = params.gas;
    for j in grid.interior_y() {
        for i in 0..grid.width() {
            let c = grid.idx(i, j);
            prim[c] = gas.cons_to_prim(&fields.cons[c], params.mach, i, j)?;
        }
    }
    if grid.is_1d() {
        return Ok(());
    }
    for i in grid.interior_x() {
        for j in (0..grid.ghost).chain(grid.ghost + grid.ny..grid.height()) {
            let c = grid.idx(i, j);
            prim[c] = gas.cons_to_prim(&fields.cons[c], params.mach, i, j)?;
        }
    }
    Ok(())
}

fn sweep(
    params: &SchemeParams,
    grid: &Grid,
    fields: &FieldSet,
    ws: &mut Workspace,
    view: AxisView,
    out: &mut [[f64; 4]],
) -> Result<()> {
    let g = grid.ghost;
    let mach2 = params.mach * params.mach;
    let mach_speed = effective_mach_speed(params.mach, params.mhat_k, view.d);
    let (n_normal, n_lines) = match view.axis {
        Axis::X => (grid.nx, grid.interior_y()),
        Axis::Y => (grid.ny, grid.interior_x()),
    };
    let cell = |k: usize, line: usize| -> usize {
        match view.axis {
            Axis::X => grid.idx(k, line),
            Axis::Y => grid.idx(line, k),
        }
    };

    for a in ws.acc.iter_mut() {
        *a = [0.0; 5];
    }

    if params.order == 2 {
        for line in n_lines.clone() {
            for k in g - 1..g + n_normal + 1 {
                let (lo, mid, hi) = (cell(k - 1, line), cell(k, line), cell(k + 1, line));
                let hs3 = match &fields.hs {
                    Some(hs) => [Some(hs[lo]), Some(hs[mid]), Some(hs[hi])],
                    None => [None; 3],
                };
                ws.slopes[mid] = limited_slopes(
                    params.gas,
                    [&ws.prim[lo], &ws.prim[mid], &ws.prim[hi]],
                    [fields.phi[lo], fields.phi[mid], fields.phi[hi]],
                    params.mode,
                    hs3,
                    view.d,
                )?;
            }
        }
    }

    for line in n_lines.clone() {
        for k in g - 1..g + n_normal {
            let c0 = cell(k, line);
            let c1 = cell(k + 1, line);
            let (hs_l, hs_r) = match &fields.hs {
                Some(hs) => (Some(hs[c0]), Some(hs[c1])),
                None => (None, None),
            };
            let (rb, dz, _) = closure_data(
                params.mode,
                &ws.prim[c0],
                &ws.prim[c1],
                fields.phi[c0],
                fields.phi[c1],
                hs_l,
                hs_r,
            )?;

            let (left, right) = if params.order == 2 {
                let tl = evaluate_at_faces(&ws.prim[c0], &ws.slopes[c0], view.d)[1];
                let tr = evaluate_at_faces(&ws.prim[c1], &ws.slopes[c1], view.d)[0];
                (tl, tr)
            } else {
                (ws.prim[c0], ws.prim[c1])
            };

            let mut face = FaceInput::new(
                view.swap_in(&left),
                view.swap_in(&right),
                fields.phi[c0],
                fields.phi[c1],
                params.mach,
                params.mode,
            );
            face.mach_speed = mach_speed;
            face.hs_l = hs_l;
            face.hs_r = hs_r;

            let sol = solve_face_guarded(params, &face, rb, dz)?;
            let s = sgn(sol.v_star);
            let f = &sol.flux;

            if k >= g {
                // This face is the cell's high side: + flux, low source half.
                let a = &mut ws.acc[c0];
                a[0] += f.mass;
                a[1] += f.mom_advect;
                a[2] += f.mom_press - 0.5 * (s - 1.0) * sol.g;
                a[3] += f.mom_transverse;
                a[4] += f.energy - 0.5 * (s - 1.0) * sol.g * sol.v_star;
            }
            if k + 1 < g + n_normal {
                // And the neighbour's low side: - flux, high source half.
                let a = &mut ws.acc[c1];
                a[0] -= f.mass;
                a[1] -= f.mom_advect;
                a[2] += 0.5 * (s + 1.0) * sol.g - f.mom_press;
                a[3] -= f.mom_transverse;
                a[4] += 0.5 * (s + 1.0) * sol.g * sol.v_star - f.energy;
            }
        }
    }

    let inv_d = 1.0 / view.d;
    for line in n_lines {
        for k in g..g + n_normal {
            let c = cell(k, line);
            let a = &ws.acc[c];
            let mom_normal = a[1] + a[2] / mach2;
            let (m1, m2) = match view.axis {
                Axis::X => (mom_normal, a[3]),
                Axis::Y => (a[3], mom_normal),
            };
            out[c][0] -= a[0] * inv_d;
            out[c][1] -= m1 * inv_d;
            out[c][2] -= m2 * inv_d;
            out[c][3] -= a[4] * inv_d;
        }
    }
    Ok(())
}
