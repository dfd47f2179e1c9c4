//! Ideal-gas equation of state and variable conversions.
//!
//! All quantities are dimensionless. The total energy carries the square of
//! the reference Mach number `M` in its kinetic part,
//!
//! ```text
//! E = rho e + 1/2 M^2 rho |u|^2,
//! ```
//!
//! so conversions between conserved and primitive variables depend on `M`.
//! The specific entropy uses the convention `s = -(ln e + (gamma-1) ln tau)`
//! with `tau = 1/rho`, which satisfies `-T ds = de + p dtau` with a positive
//! temperature; in this convention admissible entropy production makes the
//! cell-integrated `rho s` decrease.

use crate::{Error, Result};

/// Calorically ideal gas, `p = (gamma - 1) rho e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    gamma: f64,
}

/// Primitive state `(rho, u, p)` of one cell.
///
/// At faces the convention is that `u[0]` is the face-normal velocity and
/// `u[1]` the transverse one; callers swap components for y-faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
}

/// Conserved state `(rho, rho u, E)` of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::NonPhysical {
                quantity: "adiabatic exponent gamma",
                value: gamma,
            });
        }
        Ok(GasModel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Pressure `p = (gamma - 1) rho e`.
    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "density",
                value: rho,
            });
        }
        if !(e > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "specific internal energy",
                value: e,
            });
        }
        Ok((self.gamma - 1.0) * rho * e)
    }

    /// Adiabatic sound speed `c = sqrt(gamma p / rho)`.
    pub fn sound_speed(&self, rho: f64, p: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "density",
                value: rho,
            });
        }
        if !(p > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "pressure",
                value: p,
            });
        }
        Ok((self.gamma * p / rho).sqrt())
    }

    /// Specific entropy `s = -(ln e + (gamma - 1) ln tau)`, `tau = 1/rho`.
    pub fn specific_entropy(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "density",
                value: rho,
            });
        }
        if !(e > 0.0) {
            return Err(Error::NonPhysical {
                quantity: "specific internal energy",
                value: e,
            });
        }
        let tau = 1.0 / rho;
        Ok(-(e.ln() + (self.gamma - 1.0) * tau.ln()))
    }

    /// Specific internal energy from a primitive state, `e = p/((gamma-1) rho)`.
    pub fn internal_energy(&self, q: &PrimitiveState) -> f64 {
        q.p / ((self.gamma - 1.0) * q.rho)
    }

    /// Decode a conserved state. Fails with cell context `(i, j)` when the
    /// state lies outside the admissible set (`rho <= 0` or `e <= 0`).
    pub fn cons_to_prim(
        &self,
        w: &ConservedState,
        mach: f64,
        i: usize,
        j: usize,
    ) -> Result<PrimitiveState> {
        let rho = w.rho;
        if !(rho > 0.0) {
            return Err(Error::InadmissibleState { i, j, rho, e: f64::NAN });
        }
        let u = [w.mom[0] / rho, w.mom[1] / rho];
        let kinetic = 0.5 * mach * mach * rho * (u[0] * u[0] + u[1] * u[1]);
        let e = (w.energy - kinetic) / rho;
        if !(e > 0.0) {
            return Err(Error::InadmissibleState { i, j, rho, e });
        }
        Ok(PrimitiveState {
            rho,
            u,
            p: (self.gamma - 1.0) * rho * e,
        })
    }

    /// Encode a primitive state; exact inverse of [`GasModel::cons_to_prim`]
    /// up to rounding.
    pub fn prim_to_cons(&self, q: &PrimitiveState, mach: f64) -> ConservedState {
        let e = self.internal_energy(q);
        let kinetic = 0.5 * mach * mach * q.rho * (q.u[0] * q.u[0] + q.u[1] * q.u[1]);
        ConservedState {
            rho: q.rho,
            mom: [q.rho * q.u[0], q.rho * q.u[1]],
            energy: q.rho * e + kinetic,
        }
    }

    /// Total energy of a primitive state under Mach scaling `M`.
    pub fn total_energy(&self, q: &PrimitiveState, mach: f64) -> f64 {
        self.prim_to_cons(q, mach).energy
    }
}
