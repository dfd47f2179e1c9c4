//! Comparison schemes: the one-speed relaxation variant and a
//! non-well-balanced Rusanov scheme.
//!
//! The one-speed variant reuses the full relaxation pipeline with the
//! classical speeds `a = b = rho c (1 + beta X)`; it stays well-balanced
//! but loses the low-Mach accuracy of the two-speed choice. The Rusanov
//! scheme is deliberately not well-balanced: plain minmod reconstruction
//! without the hydrostatic pressure transformation and a centered cell
//! source, the canonical treatment whose equilibrium noise the
//! perturbation experiments expose.

use crate::eos::PrimitiveState;
use crate::grid::{FieldSet, Grid};
use crate::recon::minmod;
use crate::riemann::{solve_face_first_order, FaceInput, FaceSolution, SpeedLaw};
use crate::scheme::{convert_bands, SchemeParams, Workspace};
use crate::{Error, Result};

/// Spatial scheme selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// Low-Mach two-speed relaxation solver (the default).
    TwoSpeed,
    /// Classical one-speed relaxation solver.
    OneSpeed,
    /// Rusanov flux, plain minmod limiting, centered gravity source.
    RusanovNwb,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "two-speed" => Ok(SchemeKind::TwoSpeed),
            "one-speed" => Ok(SchemeKind::OneSpeed),
            "rusanov-nwb" => Ok(SchemeKind::RusanovNwb),
            other => Err(Error::UsageError(format!(
                "unknown scheme '{other}' (expected two-speed, one-speed or rusanov-nwb)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::TwoSpeed => "two-speed",
            SchemeKind::OneSpeed => "one-speed",
            SchemeKind::RusanovNwb => "rusanov-nwb",
        }
    }
}

/// Solve one face with the classical one-speed relaxation speeds.
pub fn one_speed_face(gas: crate::eos::GasModel, face: &FaceInput, beta: f64) -> Result<FaceSolution> {
    solve_face_first_order(gas, face, beta, SpeedLaw::OneSpeed)
}

/// Physical flux of the dimensionless equations in face-normal order
/// `[mass, normal momentum, transverse momentum, energy]`, with the
/// pressure contribution carried at `1/M^2` scaling.
fn physical_flux(gas: crate::eos::GasModel, q: &PrimitiveState, mach: f64) -> [f64; 4] {
    let m2 = mach * mach;
    let e_int = q.p / ((gas.gamma() - 1.0) * q.rho);
    let kinetic = 0.5 * m2 * q.rho * (q.u[0] * q.u[0] + q.u[1] * q.u[1]);
    let energy = q.rho * e_int + kinetic;
    [
        q.rho * q.u[0],
        q.rho * q.u[0] * q.u[0] + q.p / m2,
        q.rho * q.u[0] * q.u[1],
        (energy + q.p) * q.u[0],
    ]
}

/// Conserved state of a primitive trace in face-normal order.
fn conserved_of(gas: crate::eos::GasModel, q: &PrimitiveState, mach: f64) -> [f64; 4] {
    let m2 = mach * mach;
    let e_int = q.p / ((gas.gamma() - 1.0) * q.rho);
    let kinetic = 0.5 * m2 * q.rho * (q.u[0] * q.u[0] + q.u[1] * q.u[1]);
    [q.rho, q.rho * q.u[0], q.rho * q.u[1], q.rho * e_int + kinetic]
}

/// The Rusanov spatial operator; same contract as the relaxation
/// operator's `residual`.
pub fn rusanov_residual(
    params: &SchemeParams,
    grid: &Grid,
    fields: &FieldSet,
    ws: &mut Workspace,
    out: &mut [[f64; 4]],
) -> Result<()> {
    convert_bands(params, grid, fields, &mut ws.prim)?;
    rusanov_sweep(params, grid, fields, ws, true, out)?;
    if !grid.is_1d() {
        rusanov_sweep(params, grid, fields, ws, false, out)?;
    }
    Ok(())
}

fn rusanov_sweep(
    params: &SchemeParams,
    grid: &Grid,
    fields: &FieldSet,
    ws: &mut Workspace,
    x_axis: bool,
    out: &mut [[f64; 4]],
) -> Result<()> {
    let gas = params.gas;
    let g = grid.ghost;
    let mach = params.mach;
    let m2 = mach * mach;
    let (n_normal, n_lines, d) = if x_axis {
        (grid.nx, grid.interior_y(), grid.dx)
    } else {
        (grid.ny, grid.interior_x(), grid.dy)
    };
    let cell = |k: usize, line: usize| -> usize {
        if x_axis {
            grid.idx(k, line)
        } else {
            grid.idx(line, k)
        }
    };
    let swap = |q: &PrimitiveState| -> PrimitiveState {
        if x_axis {
            *q
        } else {
            PrimitiveState { rho: q.rho, u: [q.u[1], q.u[0]], p: q.p }
        }
    };

    // Plain minmod slopes of all primitives; stored as (rho, u_n, u_t, p)
    // in the accumulator scratch.
    if params.order == 2 {
        for line in n_lines.clone() {
            for k in g - 1..g + n_normal + 1 {
                let (lo, mid, hi) = (cell(k - 1, line), cell(k, line), cell(k + 1, line));
                let (a, b, c) = (&ws.prim[lo], &ws.prim[mid], &ws.prim[hi]);
                ws.acc[mid] = [
                    minmod((b.rho - a.rho) / d, (c.rho - b.rho) / d),
                    minmod((b.u[0] - a.u[0]) / d, (c.u[0] - b.u[0]) / d),
                    minmod((b.u[1] - a.u[1]) / d, (c.u[1] - b.u[1]) / d),
                    minmod((b.p - a.p) / d, (c.p - b.p) / d),
                    0.0,
                ];
            }
        }
    }

    let trace = |c: usize, side: f64, ws: &Workspace| -> PrimitiveState {
        if params.order == 2 {
            let s = &ws.acc[c];
            let h = side * 0.5 * d;
            PrimitiveState {
                rho: ws.prim[c].rho + h * s[0],
                u: [ws.prim[c].u[0] + h * s[1], ws.prim[c].u[1] + h * s[2]],
                p: ws.prim[c].p + h * s[3],
            }
        } else {
            ws.prim[c]
        }
    };

    for line in n_lines {
        let mut flux_lo = [0.0; 4];
        for k in g - 1..g + n_normal {
            let c0 = cell(k, line);
            let c1 = cell(k + 1, line);
            let left = swap(&trace(c0, 1.0, ws));
            let right = swap(&trace(c1, -1.0, ws));
            if left.rho <= 0.0 || left.p <= 0.0 || right.rho <= 0.0 || right.p <= 0.0 {
                return Err(Error::FacePositivity {
                    quantity: "reconstructed state",
                    value: left.rho.min(left.p).min(right.rho).min(right.p),
                    context: "rusanov reconstruction".to_string(),
                });
            }
            let fl = physical_flux(gas, &left, mach);
            let fr = physical_flux(gas, &right, mach);
            let wl = conserved_of(gas, &left, mach);
            let wr = conserved_of(gas, &right, mach);
            let c_l = gas.sound_speed(left.rho, left.p)?;
            let c_r = gas.sound_speed(right.rho, right.p)?;
            let lambda = (left.u[0].abs() + c_l / mach).max(right.u[0].abs() + c_r / mach);
            let mut f = [0.0; 4];
            for m in 0..4 {
                f[m] = 0.5 * (fl[m] + fr[m]) - 0.5 * lambda * (wr[m] - wl[m]);
            }

            if k >= g {
                // Completed cell c0: its low flux is flux_lo, high is f.
                let (un, phi_lo, phi_hi) = {
                    let lo = cell(k - 1, line);
                    let hi = cell(k + 1, line);
                    (ws.prim[c0].u[if x_axis { 0 } else { 1 }], fields.phi[lo], fields.phi[hi])
                };
                let dphi = (phi_hi - phi_lo) / (2.0 * d);
                let rho = ws.prim[c0].rho;
                let inv_d = 1.0 / d;
                let src_n = -rho * dphi / m2;
                let src_e = -rho * un * dphi;
                let (m_n, m_t) = (1usize, 2usize);
                let mut dmom = [0.0; 2];
                dmom[0] = -(f[m_n] - flux_lo[m_n]) * inv_d + src_n;
                dmom[1] = -(f[m_t] - flux_lo[m_t]) * inv_d;
                let (d1, d2) = if x_axis { (dmom[0], dmom[1]) } else { (dmom[1], dmom[0]) };
                out[c0][0] += -(f[0] - flux_lo[0]) * inv_d;
                out[c0][1] += d1;
                out[c0][2] += d2;
                out[c0][3] += -(f[3] - flux_lo[3]) * inv_d + src_e;
            }
            flux_lo = f;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{ConservedState, GasModel};
    use crate::grid::{fill_ghosts, BoundaryRule, BoundaryRules, NoAnalyticData};
    use crate::riemann::{solve_face, RhoBarMode};
    use crate::scheme::residual;
    use approx::assert_abs_diff_eq;

    fn gas() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    #[test]
    fn one_speed_matches_two_speed_at_sonic_and_above() {
        for mach in [1.0, 1.7, 10.0] {
            let left = PrimitiveState { rho: 1.0, u: [0.3, -0.1], p: 1.0 };
            let right = PrimitiveState { rho: 0.8, u: [0.1, 0.2], p: 0.9 };
            let face = FaceInput::new(left, right, 0.0, 0.1, mach, RhoBarMode::Arithmetic);
            let one = one_speed_face(gas(), &face, 1.1).unwrap();
            let (rb, dz, _) = crate::riemann::closure_data(
                RhoBarMode::Arithmetic,
                &left,
                &right,
                0.0,
                0.1,
                None,
                None,
            )
            .unwrap();
            let two = solve_face(gas(), &face, 1.1, SpeedLaw::TwoSpeed, rb, dz).unwrap();
            assert_eq!(one.v_star, two.v_star, "M = {mach}");
            assert_eq!(one.flux.mass, two.flux.mass);
            assert_eq!(one.flux.mom_advect, two.flux.mom_advect);
            assert_eq!(one.flux.mom_press, two.flux.mom_press);
            assert_eq!(one.flux.energy, two.flux.energy);
        }
    }

    #[test]
    fn one_speed_keeps_hydrostatic_pair_at_rest() {
        // Discrete isothermal pair: p jump exactly balanced by the sampled
        // closure. The well-balanced property does not depend on a, b.
        let left = PrimitiveState { rho: 1.21, u: [0.0, 0.0], p: 1.0 };
        let right = PrimitiveState { rho: 1.0, u: [0.0, 0.0], p: 0.9 };
        let mut face = FaceInput::new(left, right, 0.0, 0.0, 0.3, RhoBarMode::AprioriHydrostatic);
        face.hs_l = Some(crate::riemann::HydrostaticSample { rho: 1.21, p: 1.0 });
        face.hs_r = Some(crate::riemann::HydrostaticSample { rho: 1.0, p: 0.9 });
        let sol = one_speed_face(gas(), &face, 1.1).unwrap();
        assert_eq!(sol.v_star, 0.0);
        assert_eq!(sol.flux.mass, 0.0);
        assert_eq!(sol.pi_ls, 1.0);
        assert_eq!(sol.pi_rs, 0.9);
    }

    fn rusanov_params(order: u8) -> SchemeParams {
        SchemeParams {
            gas: gas(),
            mach: 1.0,
            beta: 1.1,
            kind: SchemeKind::RusanovNwb,
            mode: RhoBarMode::Arithmetic,
            order,
            mhat_k: None,
            beta_retry: false,
        }
    }

    #[test]
    fn rusanov_uniform_flat_potential_is_stationary() {
        let grid = Grid::new(8, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let w = gas().prim_to_cons(&PrimitiveState { rho: 1.2, u: [0.5, 0.2], p: 0.8 }, 1.0);
        let mut fields = FieldSet::constant(&grid, w);
        fill_ghosts(
            &grid,
            &mut fields,
            &BoundaryRules::uniform(BoundaryRule::Periodic),
            0.0,
            &NoAnalyticData,
            gas(),
            1.0,
        )
        .unwrap();
        let mut ws = Workspace::new(&grid);
        let mut l = vec![[0.0; 4]; grid.n_cells()];
        residual(&rusanov_params(2), &grid, &fields, &mut ws, &mut l).unwrap();
        for j in grid.interior_y() {
            for i in grid.interior_x() {
                for m in 0..4 {
                    assert_abs_diff_eq!(l[grid.idx(i, j)][m], 0.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn rusanov_conserves_mass_periodically() {
        let grid = Grid::new(16, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = FieldSet::constant(&grid, ConservedState { rho: 1.0, mom: [0.0, 0.0], energy: 1.0 });
        for i in 0..grid.width() {
            let [x, _] = grid.cell_center(i, grid.ghost);
            let q = PrimitiveState {
                rho: 1.0 + 0.4 * (2.0 * std::f64::consts::PI * x).sin(),
                u: [0.6, 0.0],
                p: 1.0,
            };
            fields.cons[grid.idx(i, grid.ghost)] = gas().prim_to_cons(&q, 1.0);
            fields.phi[grid.idx(i, grid.ghost)] = (2.0 * std::f64::consts::PI * x).cos() * 0.05;
        }
        let params = rusanov_params(2);
        let mut ws = Workspace::new(&grid);
        let mut l = vec![[0.0; 4]; grid.n_cells()];
        let rules = BoundaryRules::uniform(BoundaryRule::Periodic);
        let mass_before: f64 = grid.interior_x().map(|i| fields.cons[grid.idx(i, grid.ghost)].rho).sum();
        for _ in 0..5 {
            fill_ghosts(&grid, &mut fields, &rules, 0.0, &NoAnalyticData, gas(), 1.0).unwrap();
            residual(&params, &grid, &fields, &mut ws, &mut l).unwrap();
            for (w, dl) in fields.cons.iter_mut().zip(l.iter()) {
                w.rho += 0.002 * dl[0];
                w.mom[0] += 0.002 * dl[1];
                w.mom[1] += 0.002 * dl[2];
                w.energy += 0.002 * dl[3];
            }
        }
        let mass_after: f64 = grid.interior_x().map(|i| fields.cons[grid.idx(i, grid.ghost)].rho).sum();
        assert_abs_diff_eq!(mass_after, mass_before, epsilon = 1e-13 * mass_before);
    }

    #[test]
    fn rusanov_disturbs_hydrostatic_equilibrium() {
        // The same sampled profile the relaxation scheme keeps bitwise
        // still; Rusanov's residual must be visibly nonzero.
        let grid = Grid::new(8, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = FieldSet::constant(&grid, ConservedState { rho: 1.0, mom: [0.0, 0.0], energy: 1.0 });
        for i in 0..grid.width() {
            let [x, _] = grid.cell_center(i, grid.ghost);
            fields.phi[grid.idx(i, grid.ghost)] = 1.21 * x;
            let q = PrimitiveState {
                rho: 1.21 * (-1.21 * x).exp(),
                u: [0.0, 0.0],
                p: (-1.21 * x).exp(),
            };
            fields.cons[grid.idx(i, grid.ghost)] = gas().prim_to_cons(&q, 1.0);
        }
        let mut ws = Workspace::new(&grid);
        let mut l = vec![[0.0; 4]; grid.n_cells()];
        residual(&rusanov_params(1), &grid, &fields, &mut ws, &mut l).unwrap();
        let max_mom: f64 = grid
            .interior_x()
            .map(|i| l[grid.idx(i, grid.ghost)][1].abs())
            .fold(0.0, f64::max);
        assert!(max_mom > 1e-4, "centered source should not balance the flux, got {max_mom}");
    }
}
