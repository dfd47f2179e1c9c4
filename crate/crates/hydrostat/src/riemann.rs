//! Two-speed relaxation Riemann solver at a single grid face.
//!
//! The relaxation system replaces the pressure by an evolved surrogate `pi`
//! and the advection velocity by a surrogate `v`, both initialized at
//! equilibrium (`pi = p`, `v = u`, `Z = Phi`). Its Riemann solution consists
//! of four constant states separated by three linearly degenerate waves
//! `sigma^- < v* < sigma^+`; the intermediate states follow in closed form
//! from the Riemann invariants plus one closure relating the jump of `pi`
//! across the contact to the potential jump:
//!
//! ```text
//! pi_R* - pi_L* = -rho_bar * (Z_R - Z_L).
//! ```
//!
//! This closure is what makes discrete hydrostatic equilibria stationary:
//! on a hydrostatic pair the pressure jump cancels the closure term exactly
//! and the solver reproduces its inputs.
//!
//! Floating-point layout matters here. All intermediate states are written
//! in correction form (input state plus a correction built from the velocity
//! jump and the well-balancing residual `r = (p_R - p_L) + g`, with
//! `g = rho_bar * dZ` formed once per face), so that `r == 0.0` reproduces
//! the inputs bitwise. The momentum flux keeps its pressure part separate
//! from the advective part; the caller divides by `M^2` only after the
//! telescoping sum with the source halves has cancelled.

use crate::eos::{GasModel, PrimitiveState};
use crate::{Error, Result};

/// Density average used by the well-balancing closure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoBarMode {
    /// Plain arithmetic mean.
    Arithmetic,
    /// Logarithmic mean; exact for isothermal hydrostatic profiles.
    IsothermalLogMean,
    /// Power mean matched to polytropic hydrostatic profiles with
    /// exponent `gamma_eq` (the polytropic constant of the equilibrium,
    /// not necessarily the adiabatic exponent of the gas).
    Polytropic { gamma_eq: f64 },
    /// Arithmetic mean combined with a potential jump reconstructed from
    /// sampled hydrostatic profile values; balances arbitrary a-priori
    /// known equilibria exactly.
    AprioriHydrostatic,
}

/// Hydrostatic profile sample `(rho_hs, p_hs)` at a cell center, used by
/// [`RhoBarMode::AprioriHydrostatic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HydrostaticSample {
    pub rho: f64,
    pub p: f64,
}

/// Everything the face solver needs about one interface.
///
/// `left`/`right` hold the primitive trace values on both sides (cell
/// averages at first order, reconstructed face values at second order) with
/// `u[0]` the face-normal velocity. `phi_l`/`phi_r` and the hydrostatic
/// samples always refer to the flanking cell centers, as does the
/// well-balancing data `rb`/`dz` handed to [`intermediate_states`].
#[derive(Clone, Copy, Debug)]
pub struct FaceInput {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub phi_l: f64,
    pub phi_r: f64,
    /// Reference Mach number of the dimensionless formulation.
    pub mach: f64,
    /// Mach value used inside the acoustic speed scaling only. Equals
    /// `mach` unless the optional coarse-grid correction is active.
    pub mach_speed: f64,
    pub rho_bar_mode: RhoBarMode,
    pub hs_l: Option<HydrostaticSample>,
    pub hs_r: Option<HydrostaticSample>,
}

impl FaceInput {
    pub fn new(
        left: PrimitiveState,
        right: PrimitiveState,
        phi_l: f64,
        phi_r: f64,
        mach: f64,
        rho_bar_mode: RhoBarMode,
    ) -> Self {
        FaceInput {
            left,
            right,
            phi_l,
            phi_r,
            mach,
            mach_speed: mach,
            rho_bar_mode,
            hs_l: None,
            hs_r: None,
        }
    }

    pub fn with_hydrostatic(mut self, hs_l: HydrostaticSample, hs_r: HydrostaticSample) -> Self {
        self.hs_l = Some(hs_l);
        self.hs_r = Some(hs_r);
        self
    }
}

/// Relaxation speed selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedLaw {
    /// Low-Mach two-speed choice: `a = rho c (1 + beta X) / min(1, M)`,
    /// `b = rho min(1, M) c (1 + beta X)`, `a_q = min(1, M) c`.
    TwoSpeed,
    /// Classical single-speed choice `a = b = rho c (1 + beta X)`,
    /// `a_q = c`; its numerical diffusion degrades as `M -> 0`.
    OneSpeed,
}

/// The six per-face relaxation speeds.
///
/// Invariants on construction: `a >= b > 0` on both sides and
/// `b / rho >= a_q`.
#[derive(Clone, Copy, Debug)]
pub struct RelaxationSpeeds {
    pub a_l: f64,
    pub a_r: f64,
    pub b_l: f64,
    pub b_r: f64,
    pub aq_l: f64,
    pub aq_r: f64,
}

/// Decomposed numerical flux through a face, oriented along the face
/// normal.
///
/// The physical momentum flux is `mom_advect + mom_press / M^2`; the
/// pressure part is kept unscaled so callers can cancel it against the
/// source terms before dividing.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaceFlux {
    pub mass: f64,
    pub mom_advect: f64,
    pub mom_press: f64,
    pub mom_transverse: f64,
    pub energy: f64,
}

impl FaceFlux {
    /// Assembled 3-component flux `(mass, normal momentum, energy)`.
    pub fn components(&self, mach: f64) -> [f64; 3] {
        [
            self.mass,
            self.mom_advect + self.mom_press / (mach * mach),
            self.energy,
        ]
    }
}

/// Full solution of the face Riemann problem.
#[derive(Clone, Copy, Debug)]
pub struct FaceSolution {
    pub v_star: f64,
    pub rho_ls: f64,
    pub rho_rs: f64,
    pub u_ls: f64,
    pub u_rs: f64,
    pub pi_ls: f64,
    pub pi_rs: f64,
    pub e_ls: f64,
    pub e_rs: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    /// Well-balancing atom `g = rho_bar * dZ`, formed once and reused by
    /// closure, speeds and source terms.
    pub g: f64,
    /// Density average used in the source halves.
    pub rho_bar: f64,
    pub flux: FaceFlux,
    /// Source half `S^+` applied to the right cell of this face,
    /// components `(mass, momentum, energy)`; the momentum component
    /// carries the `1/M^2` factor.
    pub src_plus: [f64; 3],
    /// Source half `S^-` applied to the left cell of this face.
    pub src_minus: [f64; 3],
}

/// Density average of the selected mode.
///
/// The logarithmic and power means switch to series forms when the inputs
/// are close, so they never divide two cancelling differences.
pub fn rho_bar(mode: RhoBarMode, left: &PrimitiveState, right: &PrimitiveState) -> f64 {
    let (rho_l, rho_r) = (left.rho, right.rho);
    match mode {
        RhoBarMode::Arithmetic | RhoBarMode::AprioriHydrostatic => 0.5 * (rho_l + rho_r),
        RhoBarMode::IsothermalLogMean => {
            let zeta = rho_l / rho_r;
            let f = (zeta - 1.0) / (zeta + 1.0);
            let u = f * f;
            // The series threshold keeps the first dropped term, u^4/9,
            // below resolution; a looser switch would leak the truncation
            // error into the hydrostatic balance.
            let big_f = if u < 1e-4 {
                1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0
            } else {
                zeta.ln() / (2.0 * f)
            };
            0.5 * (rho_l + rho_r) / big_f
        }
        RhoBarMode::Polytropic { gamma_eq } => {
            let m = 0.5 * (rho_l + rho_r);
            let eps = (rho_r - rho_l) / m;
            let e2 = eps * eps;
            // As with the logarithmic mean, switch early enough that the
            // first dropped term of the expansion stays below resolution.
            if e2 < 1e-6 {
                let g2 = gamma_eq - 2.0;
                let c2 = g2 / 12.0;
                let c4 = g2 * (gamma_eq - 3.0) * (gamma_eq - 4.0) / 480.0
                    - g2 * g2 * (gamma_eq - 3.0) / 288.0;
                m * (1.0 + c2 * e2 + c4 * e2 * e2)
            } else {
                (gamma_eq - 1.0) / gamma_eq * (rho_r.powf(gamma_eq) - rho_l.powf(gamma_eq))
                    / (rho_r.powf(gamma_eq - 1.0) - rho_l.powf(gamma_eq - 1.0))
            }
        }
    }
}

/// Potential jump `dZ` across the face.
///
/// Analytic modes take the difference of the cell-center potentials; the
/// a-priori mode reconstructs the jump from the sampled hydrostatic
/// profile, `dZ = -(p_hs_R - p_hs_L) / mean(rho_hs)`.
pub fn potential_jump(mode: RhoBarMode, face: &FaceInput) -> Result<f64> {
    match mode {
        RhoBarMode::AprioriHydrostatic => {
            let (hl, hr) = match (face.hs_l, face.hs_r) {
                (Some(hl), Some(hr)) => (hl, hr),
                _ => return Err(Error::MissingHydrostaticSamples),
            };
            Ok(-(hr.p - hl.p) / (0.5 * (hl.rho + hr.rho)))
        }
        _ => Ok(face.phi_r - face.phi_l),
    }
}

/// Well-balancing product `g = rho_bar * dZ` for given cell-based closure
/// data.
///
/// In the a-priori mode the product is re-associated as
/// `-(p_hs_R - p_hs_L) * ((rho_L + rho_R) / (rho_hs_L + rho_hs_R))`: the
/// density ratio is formed first, so on a discretely hydrostatic pair it is
/// exactly `1.0` and `g` cancels the pressure jump bitwise.
pub fn wb_product(
    mode: RhoBarMode,
    rb: f64,
    dz: f64,
    hs_l: Option<HydrostaticSample>,
    hs_r: Option<HydrostaticSample>,
) -> Result<f64> {
    match mode {
        RhoBarMode::AprioriHydrostatic => {
            let (hl, hr) = match (hs_l, hs_r) {
                (Some(hl), Some(hr)) => (hl, hr),
                _ => return Err(Error::MissingHydrostaticSamples),
            };
            // 2 rb = rho_L + rho_R for the arithmetic mean this mode uses.
            Ok(-(hr.p - hl.p) * ((rb + rb) / (hl.rho + hr.rho)))
        }
        _ => Ok(rb * dz),
    }
}

fn wb_atom(face: &FaceInput, rb: f64, dz: f64) -> Result<f64> {
    wb_product(face.rho_bar_mode, rb, dz, face.hs_l, face.hs_r)
}

/// Closure data `(rho_bar, dZ, g)` of a face, from the flanking cell-center
/// states. At second order this must be fed from cell averages, not
/// reconstructed traces, so that the pressure-slope transformation and the
/// face closure cancel exactly on discrete equilibria.
pub fn closure_data(
    mode: RhoBarMode,
    left: &PrimitiveState,
    right: &PrimitiveState,
    phi_l: f64,
    phi_r: f64,
    hs_l: Option<HydrostaticSample>,
    hs_r: Option<HydrostaticSample>,
) -> Result<(f64, f64, f64)> {
    let rb = rho_bar(mode, left, right);
    let dz = match mode {
        RhoBarMode::AprioriHydrostatic => {
            let (hl, hr) = match (hs_l, hs_r) {
                (Some(hl), Some(hr)) => (hl, hr),
                _ => return Err(Error::MissingHydrostaticSamples),
            };
            -(hr.p - hl.p) / (0.5 * (hl.rho + hr.rho))
        }
        _ => phi_r - phi_l,
    };
    let g = wb_product(mode, rb, dz, hs_l, hs_r)?;
    Ok((rb, dz, g))
}

/// Relaxation speeds for a face.
///
/// `X^L` and `X^R` measure how far the face is from mechanical equilibrium,
/// ```text
/// X^L = ( M (v_L - v_R)_+ + (r)_+  / (rho_L aq_L + rho_R aq_R) ) / c_L,
/// X^R = ( M (v_L - v_R)_+ + (-r)_+ / (rho_L aq_L + rho_R aq_R) ) / c_R,
/// ```
/// with `r = (p_R - p_L) + g` and `(x)_+ = max(x, 0)`; they vanish at
/// equilibrium and guarantee positive intermediate densities for
/// `beta >= 1`.
pub fn relaxation_speeds(
    gas: GasModel,
    face: &FaceInput,
    beta: f64,
    law: SpeedLaw,
) -> Result<RelaxationSpeeds> {
    let rb = rho_bar(face.rho_bar_mode, &face.left, &face.right);
    let dz = potential_jump(face.rho_bar_mode, face)?;
    let g = wb_atom(face, rb, dz)?;
    relaxation_speeds_with_atom(gas, face, beta, law, g)
}

/// As [`relaxation_speeds`], but with the well-balancing atom `g` supplied
/// by the caller (the scheme computes it from cell-center data so that the
/// same value feeds speeds, closure and sources).
pub fn relaxation_speeds_with_atom(
    gas: GasModel,
    face: &FaceInput,
    beta: f64,
    law: SpeedLaw,
    g: f64,
) -> Result<RelaxationSpeeds> {
    let (wl, wr) = (&face.left, &face.right);
    let c_l = gas.sound_speed(wl.rho, wl.p)?;
    let c_r = gas.sound_speed(wr.rho, wr.p)?;
    let m = face.mach_speed.min(1.0);
    let (scale_a, scale_b, aq_l, aq_r) = match law {
        SpeedLaw::TwoSpeed => (1.0 / m, m, m * c_l, m * c_r),
        SpeedLaw::OneSpeed => (1.0, 1.0, c_l, c_r),
    };

    let r = (wr.p - wl.p) + g;
    let dv_plus = (face.mach * (wl.u[0] - wr.u[0])).max(0.0);
    let denom = wl.rho * aq_l + wr.rho * aq_r;
    let x_l = (dv_plus + r.max(0.0) / denom) / c_l;
    let x_r = (dv_plus + (-r).max(0.0) / denom) / c_r;

    Ok(RelaxationSpeeds {
        a_l: wl.rho * c_l * (1.0 + beta * x_l) * scale_a,
        a_r: wr.rho * c_r * (1.0 + beta * x_r) * scale_a,
        b_l: wl.rho * c_l * (1.0 + beta * x_l) * scale_b,
        b_r: wr.rho * c_r * (1.0 + beta * x_r) * scale_b,
        aq_l,
        aq_r,
    })
}

/// Threshold below which the `(v - u)^2 / (a/b - 1)` term of the internal
/// energy update is dropped. With equilibrium input data and `a = b` the
/// term is an exact `0/0` with value zero (the wave curves then keep
/// `u - v` constant, so `v* = u_L* = u_R*`).
const AB_DEGENERATE: f64 = 1e-12;

/// Intermediate states of the face Riemann problem.
///
/// `rb`/`dz` are the closure data; at second order the caller provides
/// values computed from the flanking cell centers, not from the
/// reconstructed trace values, which is what keeps the scheme exactly
/// well-balanced. Everything is evaluated in correction form so that a
/// vanishing residual reproduces the input states bitwise (up to the
/// `1/(1/rho)` round trip in the densities).
pub fn intermediate_states(
    gas: GasModel,
    face: &FaceInput,
    speeds: &RelaxationSpeeds,
    rb: f64,
    dz: f64,
) -> Result<FaceSolution> {
    let (wl, wr) = (&face.left, &face.right);
    let m = face.mach;
    let g = wb_atom(face, rb, dz)?;
    let (a_l, a_r, b_l, b_r) = (speeds.a_l, speeds.a_r, speeds.b_l, speeds.b_r);

    let (v_l, v_r) = (wl.u[0], wr.u[0]);
    let (pi_l, pi_r) = (wl.p, wr.p);
    let e_l = gas.internal_energy(wl);
    let e_r = gas.internal_energy(wr);

    let dv = v_l - v_r;
    let r = (pi_r - pi_l) + g;
    let b_sum = b_l + b_r;

    let v_star = (m * (b_l * v_l + b_r * v_r) - r) / (m * b_sum);
    let corr_l = (m * b_r * dv + r) / (a_l * b_sum);
    let corr_r = (m * b_l * dv - r) / (a_r * b_sum);
    let tau_ls = 1.0 / wl.rho - corr_l;
    let tau_rs = 1.0 / wr.rho - corr_r;
    let u_ls = v_l - (b_l / m) * corr_l;
    let u_rs = v_r + (b_r / m) * corr_r;
    let pi_ls = pi_l + b_l * (r + m * b_r * dv) / b_sum;
    let pi_rs = pi_r - b_r * (r - m * b_l * dv) / b_sum;

    let e_star = |e0: f64, pi0: f64, pi_s: f64, v0: f64, u0: f64, u_s: f64, a: f64, b: f64| {
        let mut e = e0 + (pi_s * pi_s - pi0 * pi0) / (2.0 * a * b);
        let ratio = a / b - 1.0;
        if ratio >= AB_DEGENERATE {
            let w_s = v_star - u_s;
            let w0 = v0 - u0;
            e += (w_s * w_s - w0 * w0) / (2.0 * ratio);
        }
        e
    };
    let e_ls = e_star(e_l, pi_l, pi_ls, v_l, v_l, u_ls, a_l, b_l);
    let e_rs = e_star(e_r, pi_r, pi_rs, v_r, v_r, u_rs, a_r, b_r);

    let face_context = || {
        format!(
            "left = {:?}, right = {:?}, phi = ({}, {}), M = {}, speeds = {:?}",
            wl, wr, face.phi_l, face.phi_r, m, speeds
        )
    };
    if !(tau_ls > 0.0) || !(tau_rs > 0.0) {
        return Err(Error::FacePositivity {
            quantity: "intermediate specific volume",
            value: tau_ls.min(tau_rs),
            context: face_context(),
        });
    }
    if !(e_ls > 0.0) || !(e_rs > 0.0) {
        return Err(Error::FacePositivity {
            quantity: "intermediate internal energy",
            value: e_ls.min(e_rs),
            context: face_context(),
        });
    }

    Ok(FaceSolution {
        v_star,
        rho_ls: 1.0 / tau_ls,
        rho_rs: 1.0 / tau_rs,
        u_ls,
        u_rs,
        pi_ls,
        pi_rs,
        e_ls,
        e_rs,
        sigma_minus: v_l - a_l / (m * wl.rho),
        sigma_plus: v_r + a_r / (m * wr.rho),
        g,
        rho_bar: rb,
        flux: FaceFlux::default(),
        src_plus: [0.0; 3],
        src_minus: [0.0; 3],
    })
}

/// Sign convention of the scheme: `sgn(0) = +1`. The contact sits on the
/// face when `v* = 0`, and picking the left-side state there is what makes
/// hydrostatic states exactly stationary.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Numerical flux and source halves for a solved face.
///
/// The flux is the solution sampled along `x/t = 0`:
/// upstream state beyond the outer waves, intermediate flux between them,
/// selected by `sigma^-`, `v*`, `sigma^+`. Transverse momentum is advected
/// passively with the mass flux (upwinded by the sign of `v*`), and the
/// transverse kinetic energy rides along in the energy flux.
pub fn interface_flux(gas: GasModel, face: &FaceInput, sol: &mut FaceSolution) {
    let m = face.mach;
    let m2 = m * m;

    let exact = |w: &PrimitiveState| {
        let e = gas.internal_energy(w);
        let un = w.u[0];
        let energy_1d = w.rho * e + 0.5 * m2 * w.rho * un * un;
        FaceFlux {
            mass: w.rho * un,
            mom_advect: w.rho * un * un,
            mom_press: w.p,
            mom_transverse: 0.0,
            energy: (energy_1d + w.p) * un,
        }
    };
    let starred = |rho_s: f64, u_s: f64, pi_s: f64, e_s: f64, v_star: f64| {
        let energy_1d = rho_s * e_s + 0.5 * m2 * rho_s * u_s * u_s;
        FaceFlux {
            mass: rho_s * v_star,
            mom_advect: rho_s * u_s * v_star,
            mom_press: pi_s,
            mom_transverse: 0.0,
            energy: (energy_1d + pi_s) * v_star,
        }
    };

    let mut flux = if sol.sigma_minus > 0.0 {
        exact(&face.left)
    } else if sol.v_star >= 0.0 {
        starred(sol.rho_ls, sol.u_ls, sol.pi_ls, sol.e_ls, sol.v_star)
    } else if sol.sigma_plus > 0.0 {
        starred(sol.rho_rs, sol.u_rs, sol.pi_rs, sol.e_rs, sol.v_star)
    } else {
        exact(&face.right)
    };

    let ut_upwind = if sol.v_star >= 0.0 {
        face.left.u[1]
    } else {
        face.right.u[1]
    };
    flux.mom_transverse = flux.mass * ut_upwind;
    flux.energy += flux.mass * (0.5 * m2 * ut_upwind * ut_upwind);

    let s = sgn(sol.v_star);
    let rb = sol.rho_bar;
    sol.flux = flux;
    sol.src_plus = [
        0.0,
        -(s + 1.0) * rb / m2,
        -(s + 1.0) * rb * sol.v_star,
    ];
    sol.src_minus = [0.0, (s - 1.0) * rb / m2, (s - 1.0) * rb * sol.v_star];
}

/// Solve a face end to end: speeds, intermediate states, flux and sources.
///
/// `rb`/`dz` follow the same cell-center convention as
/// [`intermediate_states`].
pub fn solve_face(
    gas: GasModel,
    face: &FaceInput,
    beta: f64,
    law: SpeedLaw,
    rb: f64,
    dz: f64,
) -> Result<FaceSolution> {
    let g = wb_atom(face, rb, dz)?;
    let speeds = relaxation_speeds_with_atom(gas, face, beta, law, g)?;
    let mut sol = intermediate_states(gas, face, &speeds, rb, dz)?;
    interface_flux(gas, face, &mut sol);
    Ok(sol)
}

/// Convenience variant of [`solve_face`] that derives `rb` and `dz` from
/// the face's own trace states (correct at first order, where traces and
/// cell centers coincide).
pub fn solve_face_first_order(
    gas: GasModel,
    face: &FaceInput,
    beta: f64,
    law: SpeedLaw,
) -> Result<FaceSolution> {
    let rb = rho_bar(face.rho_bar_mode, &face.left, &face.right);
    let dz = potential_jump(face.rho_bar_mode, face)?;
    solve_face(gas, face, beta, law, rb, dz)
}
