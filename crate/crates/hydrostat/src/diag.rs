//! Run metrics: error norms, convergence orders, kinetic energy, the
//! discrete entropy-inequality monitor and the checkerboard amplitude.

use crate::baselines::SchemeKind;
use crate::eos::{ConservedState, GasModel, PrimitiveState};
use crate::grid::{effective_mach_speed, FieldSet, Grid};
use crate::riemann::{solve_face_first_order, FaceInput, FaceSolution};
use crate::scheme::SchemeParams;
use crate::{Error, Result};

/// L1 norm of the difference between two conserved fields, per variable
/// `(rho, rho u1, rho u2, E)`, integrated over the interior cells.
pub fn l1_error(grid: &Grid, a: &[ConservedState], b: &[ConservedState]) -> Result<[f64; 4]> {
    if a.len() != grid.n_cells() || b.len() != grid.n_cells() {
        return Err(Error::UsageError(format!(
            "field shapes differ: {} and {} cells on a grid with {}",
            a.len(),
            b.len(),
            grid.n_cells()
        )));
    }
    let vol = grid.cell_volume();
    let mut err = [0.0; 4];
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let c = grid.idx(i, j);
            err[0] += (a[c].rho - b[c].rho).abs();
            err[1] += (a[c].mom[0] - b[c].mom[0]).abs();
            err[2] += (a[c].mom[1] - b[c].mom[1]).abs();
            err[3] += (a[c].energy - b[c].energy).abs();
        }
    }
    for e in &mut err {
        *e *= vol;
    }
    Ok(err)
}

/// Experimental order of convergence from two errors on grids refined by a
/// factor of two.
pub fn eoc(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}

/// Physical kinetic energy `sum 1/2 rho |u|^2 dV` over the interior. The
/// reference-Mach scaling of the stored total energy plays no role here,
/// so retention ratios are comparable across Mach numbers.
pub fn kinetic_energy(grid: &Grid, cons: &[ConservedState]) -> f64 {
    let vol = grid.cell_volume();
    let mut sum = 0.0;
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let w = &cons[grid.idx(i, j)];
            sum += 0.5 * (w.mom[0] * w.mom[0] + w.mom[1] * w.mom[1]) / w.rho;
        }
    }
    sum * vol
}

/// Amplitude of the odd-even (Nyquist) mode of a scalar field:
/// `|sum_i (-1)^i (q_i - mean)| / N` per grid line, maximized over all
/// rows and columns.
pub fn checkerboard_amplitude(grid: &Grid, field: &[f64]) -> Result<f64> {
    if field.len() != grid.n_cells() {
        return Err(Error::UsageError(format!(
            "field has {} cells, grid has {}",
            field.len(),
            grid.n_cells()
        )));
    }
    let mut amp: f64 = 0.0;
    for j in grid.interior_y() {
        let mut mean = 0.0;
        for i in grid.interior_x() {
            mean += field[grid.idx(i, j)];
        }
        mean /= grid.nx as f64;
        let mut alt = 0.0;
        let mut sign = 1.0;
        for i in grid.interior_x() {
            alt += sign * (field[grid.idx(i, j)] - mean);
            sign = -sign;
        }
        amp = amp.max(alt.abs() / grid.nx as f64);
    }
    if !grid.is_1d() {
        for i in grid.interior_x() {
            let mut mean = 0.0;
            for j in grid.interior_y() {
                mean += field[grid.idx(i, j)];
            }
            mean /= grid.ny as f64;
            let mut alt = 0.0;
            let mut sign = 1.0;
            for j in grid.interior_y() {
                alt += sign * (field[grid.idx(i, j)] - mean);
                sign = -sign;
            }
            amp = amp.max(alt.abs() / grid.ny as f64);
        }
    }
    Ok(amp)
}

/// Root-mean-square deviation of a scalar field from its interior mean;
/// the natural normalization for the checkerboard amplitude.
pub fn rms_fluctuation(grid: &Grid, field: &[f64]) -> Result<f64> {
    if field.len() != grid.n_cells() {
        return Err(Error::UsageError(format!(
            "field has {} cells, grid has {}",
            field.len(),
            grid.n_cells()
        )));
    }
    let n = (grid.nx * grid.ny) as f64;
    let mut mean = 0.0;
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            mean += field[grid.idx(i, j)];
        }
    }
    mean /= n;
    let mut var = 0.0;
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let d = field[grid.idx(i, j)] - mean;
            var += d * d;
        }
    }
    Ok((var / n).sqrt())
}

/// Normalized cross-correlation of two equally long samples: the cosine of
/// the angle between the mean-removed vectors, 1 for identical shapes, 0
/// for uncorrelated ones. Returns an error when a sample has no variance.
pub fn normalized_cross_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::UsageError(format!(
            "cross-correlation needs equal nonempty samples, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::UsageError(
            "cross-correlation is undefined for a constant sample".into(),
        ));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Extract one scalar component of the primitive fields on the interior
/// (ghost entries of the returned buffer are zero).
pub fn primitive_component(
    grid: &Grid,
    fields: &FieldSet,
    gas: GasModel,
    mach: f64,
    component: impl Fn(&PrimitiveState) -> f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.n_cells()];
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let c = grid.idx(i, j);
            let q = gas.cons_to_prim(&fields.cons[c], mach, i, j)?;
            out[c] = component(&q);
        }
    }
    Ok(out)
}

fn entropy_density(gas: GasModel, mach: f64, w: &ConservedState, i: usize, j: usize) -> Result<f64> {
    let rho = w.rho;
    if !(rho > 0.0) {
        return Err(Error::InadmissibleState { i, j, rho, e: f64::NAN });
    }
    let kinetic = 0.5 * mach * mach * (w.mom[0] * w.mom[0] + w.mom[1] * w.mom[1]) / rho;
    let e = (w.energy - kinetic) / rho;
    Ok(rho * gas.specific_entropy(rho, e)?)
}

fn upwind_entropy(gas: GasModel, face: &FaceInput, sol: &FaceSolution) -> Result<f64> {
    let side = if sol.sigma_minus > 0.0 || sol.v_star >= 0.0 {
        &face.left
    } else {
        &face.right
    };
    gas.specific_entropy(side.rho, gas.internal_energy(side))
}

fn monitor_face(
    params: &SchemeParams,
    face: &FaceInput,
) -> Result<FaceSolution> {
    match solve_face_first_order(params.gas, face, params.beta, params.law()) {
        Err(Error::FacePositivity { .. }) if params.beta_retry => {
            solve_face_first_order(params.gas, face, 2.0 * params.beta, params.law())
        }
        other => other,
    }
}

/// Maximum over interior cells of the discrete entropy-inequality residual
/// of one first-order step,
/// `eta(w_new) - eta(w_old) + sum_axes (dt/dd)(G_hi - G_lo)`,
/// where `eta = rho s` and the numerical entropy flux `G` is the mass flux
/// of the face solution times the specific entropy advected through
/// `x/t = 0`. Nonpositive up to round-off whenever the relaxation speeds
/// satisfy the subcharacteristic condition, which the speed choice
/// enforces by construction.
///
/// `before` must carry the same ghost values the step itself saw (fill
/// ghosts at the step's start time before calling), and `after` must be
/// the result of a first-order forward-Euler step of size `dt` from it.
pub fn entropy_residual(
    params: &SchemeParams,
    grid: &Grid,
    before: &FieldSet,
    after: &FieldSet,
    dt: f64,
) -> Result<f64> {
    if params.kind == SchemeKind::RusanovNwb {
        return Err(Error::UsageError(
            "the entropy monitor is defined for the relaxation schemes only".into(),
        ));
    }
    let g = grid.ghost;
    let placeholder = PrimitiveState { rho: 0.0, u: [0.0, 0.0], p: 0.0 };
    let mut prim = vec![placeholder; grid.n_cells()];
    for j in grid.interior_y() {
        for i in (g - 1)..(g + grid.nx + 1) {
            let c = grid.idx(i, j);
            prim[c] = params.gas.cons_to_prim(&before.cons[c], params.mach, i, j)?;
        }
    }
    if !grid.is_1d() {
        for i in grid.interior_x() {
            for j in [g - 1, g + grid.ny] {
                let c = grid.idx(i, j);
                prim[c] = params.gas.cons_to_prim(&before.cons[c], params.mach, i, j)?;
            }
        }
    }

    let mut div_g = vec![0.0; grid.n_cells()];
    let axes: &[bool] = if grid.is_1d() { &[false] } else { &[false, true] };
    for &transverse in axes {
        let (n_line, n_cross, d) = if transverse {
            (grid.ny, grid.nx, grid.dy)
        } else {
            (grid.nx, grid.ny, grid.dx)
        };
        let scale = dt / d;
        for line in g..(g + n_cross) {
            for k in (g - 1)..(g + n_line) {
                let (c_lo, c_hi) = if transverse {
                    (grid.idx(line, k), grid.idx(line, k + 1))
                } else {
                    (grid.idx(k, line), grid.idx(k + 1, line))
                };
                let (mut left, mut right) = (prim[c_lo], prim[c_hi]);
                if transverse {
                    left.u.swap(0, 1);
                    right.u.swap(0, 1);
                }
                let mut face = FaceInput::new(
                    left,
                    right,
                    before.phi[c_lo],
                    before.phi[c_hi],
                    params.mach,
                    params.mode,
                );
                face.mach_speed = effective_mach_speed(params.mach, params.mhat_k, d);
                if let Some(hs) = &before.hs {
                    face.hs_l = Some(hs[c_lo]);
                    face.hs_r = Some(hs[c_hi]);
                }
                let sol = monitor_face(params, &face)?;
                let flux = sol.flux.mass * upwind_entropy(params.gas, &face, &sol)?;
                div_g[c_lo] += scale * flux;
                div_g[c_hi] -= scale * flux;
            }
        }
    }

    let mut worst = f64::NEG_INFINITY;
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let c = grid.idx(i, j);
            let eta_old = entropy_density(params.gas, params.mach, &before.cons[c], i, j)?;
            let eta_new = entropy_density(params.gas, params.mach, &after.cons[c], i, j)?;
            worst = worst.max(eta_new - eta_old + div_g[c]);
        }
    }
    Ok(worst)
}
