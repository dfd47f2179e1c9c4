//! Cartesian grid, field storage, ghost cells, boundary rules and the CFL
//! time-step bound.
//!
//! Storage is row-major over the padded index space `(nx + 2 ghost) x
//! (ny + 2 ghost)`; 1D runs use `ny = 1`. The gravitational potential and
//! the optional hydrostatic profile are sampled once at every cell center
//! (ghosts included) and never change during a run, so boundary filling
//! only touches the conserved fields.

use crate::eos::{ConservedState, GasModel, PrimitiveState};
use crate::riemann::{HydrostaticSample, SpeedLaw};
use crate::{Error, Result};

/// Uniform Cartesian grid with a ghost-cell frame.
#[derive(Clone, Debug)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Lower-left corner of the physical domain.
    pub origin: [f64; 2],
    pub ghost: usize,
}

impl Grid {
    /// Grid over `[lower, upper]` with `nx * ny` interior cells.
    pub fn new(nx: usize, ny: usize, lower: [f64; 2], upper: [f64; 2], ghost: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::UsageError("grid needs at least one cell per direction".into()));
        }
        if ghost == 0 {
            return Err(Error::UsageError("ghost layer must be at least one cell wide".into()));
        }
        let dx = (upper[0] - lower[0]) / nx as f64;
        let dy = if ny > 1 { (upper[1] - lower[1]) / ny as f64 } else { dx };
        if !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::UsageError(format!(
                "degenerate cell sizes dx = {dx}, dy = {dy}"
            )));
        }
        Ok(Grid { nx, ny, dx, dy, origin: lower, ghost })
    }

    /// Padded cell count in x.
    pub fn width(&self) -> usize {
        self.nx + 2 * self.ghost
    }

    /// Padded cell count in y.
    pub fn height(&self) -> usize {
        self.ny + 2 * self.ghost
    }

    pub fn n_cells(&self) -> usize {
        self.width() * self.height()
    }

    /// Linear index of padded coordinates `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.width() + i
    }

    /// Center of the cell at padded coordinates `(i, j)`; ghosts extend the
    /// uniform spacing beyond the domain.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let gi = i as f64 - self.ghost as f64;
        let gj = j as f64 - self.ghost as f64;
        [
            self.origin[0] + (gi + 0.5) * self.dx,
            self.origin[1] + (gj + 0.5) * self.dy,
        ]
    }

    /// Iterator bounds of the interior region, `ghost .. ghost + n`.
    pub fn interior_x(&self) -> std::ops::Range<usize> {
        self.ghost..self.ghost + self.nx
    }

    pub fn interior_y(&self) -> std::ops::Range<usize> {
        self.ghost..self.ghost + self.ny
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn cell_volume(&self) -> f64 {
        if self.is_1d() {
            self.dx
        } else {
            self.dx * self.dy
        }
    }
}

/// Conserved fields plus the static per-cell potential and (optionally)
/// the sampled hydrostatic profile.
#[derive(Clone, Debug)]
pub struct FieldSet {
    pub cons: Vec<ConservedState>,
    pub phi: Vec<f64>,
    pub hs: Option<Vec<HydrostaticSample>>,
}

impl FieldSet {
    pub fn constant(grid: &Grid, state: ConservedState) -> Self {
        FieldSet {
            cons: vec![state; grid.n_cells()],
            phi: vec![0.0; grid.n_cells()],
            hs: None,
        }
    }
}

/// Boundary treatment of one side of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Wrap around to the opposite side.
    Periodic,
    /// Evaluate the case's exact solution at the ghost centers and the
    /// current time.
    DirichletExact,
    /// Copy the nearest interior cell.
    ZeroGradient,
    /// Evaluate the case's hydrostatic equilibrium profile at the ghost
    /// centers (time independent).
    HydrostaticFill,
}

impl BoundaryRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(BoundaryRule::Periodic),
            "dirichlet-exact" => Ok(BoundaryRule::DirichletExact),
            "zero-gradient" => Ok(BoundaryRule::ZeroGradient),
            "hydrostatic-fill" => Ok(BoundaryRule::HydrostaticFill),
            other => Err(Error::UsageError(format!(
                "unknown boundary rule '{other}' (expected periodic, dirichlet-exact, zero-gradient or hydrostatic-fill)"
            ))),
        }
    }
}

/// Per-side boundary rules.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryRules {
    pub x_lo: BoundaryRule,
    pub x_hi: BoundaryRule,
    pub y_lo: BoundaryRule,
    pub y_hi: BoundaryRule,
}

impl BoundaryRules {
    pub fn uniform(rule: BoundaryRule) -> Self {
        BoundaryRules { x_lo: rule, x_hi: rule, y_lo: rule, y_hi: rule }
    }

    pub fn validate(&self) -> Result<()> {
        let paired = (self.x_lo == BoundaryRule::Periodic) == (self.x_hi == BoundaryRule::Periodic)
            && (self.y_lo == BoundaryRule::Periodic) == (self.y_hi == BoundaryRule::Periodic);
        if paired {
            Ok(())
        } else {
            Err(Error::UsageError(
                "periodic boundaries must pair up with the opposite side".into(),
            ))
        }
    }
}

/// Source of ghost-cell states for the non-trivial boundary rules.
///
/// Cases implement this; `exact_state` may be unavailable (cases without a
/// closed-form solution) and `hydrostatic_state` likewise.
pub trait BoundaryProvider {
    fn exact_state(&self, x: f64, y: f64, t: f64) -> Option<PrimitiveState>;
    fn hydrostatic_state(&self, x: f64, y: f64) -> Option<PrimitiveState>;
}

/// A provider with no analytic information; only periodic and
/// zero-gradient rules work with it.
pub struct NoAnalyticData;

impl BoundaryProvider for NoAnalyticData {
    fn exact_state(&self, _x: f64, _y: f64, _t: f64) -> Option<PrimitiveState> {
        None
    }
    fn hydrostatic_state(&self, _x: f64, _y: f64) -> Option<PrimitiveState> {
        None
    }
}

fn ghost_state(
    rule: BoundaryRule,
    provider: &dyn BoundaryProvider,
    gas: GasModel,
    mach: f64,
    x: f64,
    y: f64,
    t: f64,
) -> Result<Option<ConservedState>> {
    match rule {
        BoundaryRule::Periodic | BoundaryRule::ZeroGradient => Ok(None),
        BoundaryRule::DirichletExact => {
            let q = provider.exact_state(x, y, t).ok_or_else(|| {
                Error::UsageError("dirichlet-exact boundary needs a case with an exact solution".into())
            })?;
            Ok(Some(gas.prim_to_cons(&q, mach)))
        }
        BoundaryRule::HydrostaticFill => {
            let q = provider.hydrostatic_state(x, y).ok_or_else(|| {
                Error::UsageError("hydrostatic-fill boundary needs a case with an equilibrium profile".into())
            })?;
            Ok(Some(gas.prim_to_cons(&q, mach)))
        }
    }
}

/// Fill the ghost frame of the conserved fields.
///
/// X-side ghosts are filled for interior rows and y-side ghosts for
/// interior columns; corner ghosts are never read by the dimension-wise
/// sweeps and stay untouched.
pub fn fill_ghosts(
    grid: &Grid,
    fields: &mut FieldSet,
    rules: &BoundaryRules,
    t: f64,
    provider: &dyn BoundaryProvider,
    gas: GasModel,
    mach: f64,
) -> Result<()> {
    rules.validate()?;
    let g = grid.ghost;

    for j in grid.interior_y() {
        for k in 0..g {
            // Low-x ghost column k pairs with high-x ghost column.
            let lo = grid.idx(k, j);
            let hi = grid.idx(g + grid.nx + k, j);
            let [x_lo, y] = grid.cell_center(k, j);
            let [x_hi, _] = grid.cell_center(g + grid.nx + k, j);
            match rules.x_lo {
                BoundaryRule::Periodic => fields.cons[lo] = fields.cons[grid.idx(grid.nx + k, j)],
                BoundaryRule::ZeroGradient => fields.cons[lo] = fields.cons[grid.idx(g, j)],
                rule => {
                    if let Some(w) = ghost_state(rule, provider, gas, mach, x_lo, y, t)? {
                        fields.cons[lo] = w;
                    }
                }
            }
            match rules.x_hi {
                BoundaryRule::Periodic => fields.cons[hi] = fields.cons[grid.idx(g + k, j)],
                BoundaryRule::ZeroGradient => fields.cons[hi] = fields.cons[grid.idx(g + grid.nx - 1, j)],
                rule => {
                    if let Some(w) = ghost_state(rule, provider, gas, mach, x_hi, y, t)? {
                        fields.cons[hi] = w;
                    }
                }
            }
        }
    }

    if grid.is_1d() {
        return Ok(());
    }
    for i in grid.interior_x() {
        for k in 0..g {
            let lo = grid.idx(i, k);
            let hi = grid.idx(i, g + grid.ny + k);
            let [x, y_lo] = grid.cell_center(i, k);
            let [_, y_hi] = grid.cell_center(i, g + grid.ny + k);
            match rules.y_lo {
                BoundaryRule::Periodic => fields.cons[lo] = fields.cons[grid.idx(i, grid.ny + k)],
                BoundaryRule::ZeroGradient => fields.cons[lo] = fields.cons[grid.idx(i, g)],
                rule => {
                    if let Some(w) = ghost_state(rule, provider, gas, mach, x, y_lo, t)? {
                        fields.cons[lo] = w;
                    }
                }
            }
            match rules.y_hi {
                BoundaryRule::Periodic => fields.cons[hi] = fields.cons[grid.idx(i, g + k)],
                BoundaryRule::ZeroGradient => fields.cons[hi] = fields.cons[grid.idx(i, g + grid.ny - 1)],
                rule => {
                    if let Some(w) = ghost_state(rule, provider, gas, mach, x, y_hi, t)? {
                        fields.cons[hi] = w;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Mach number handed to the two-speed law, normally the physical Mach
/// number.
///
/// With the optional coarse-grid floor `k` the product `M min(1, M)`
/// controlling the acoustic speed `a / (M rho)` is lifted to
/// `max(M min(1, M), k dx)`, so on coarse grids the time step scales with
/// `k dx` instead of `M^2`. The anti-diffusive weight `min(1, M)` cannot
/// exceed one, so the floor saturates at the one-speed level `M`.
pub fn effective_mach_speed(mach: f64, mhat_k: Option<f64>, dx: f64) -> f64 {
    match mhat_k {
        None => mach,
        Some(k) => {
            let product = (mach * mach.min(1.0)).max(k * dx).min(mach);
            product / mach
        }
    }
}

/// Effective Mach product `M * min(1, M)` entering the acoustic wave speed
/// `a / (M rho)` of the CFL bound.
fn mach_speed_product(mach: f64, law: SpeedLaw, mhat_k: Option<f64>, dx: f64) -> f64 {
    match law {
        SpeedLaw::TwoSpeed => mach * effective_mach_speed(mach, mhat_k, dx).min(1.0),
        SpeedLaw::OneSpeed => mach,
    }
}

/// Largest stable time step under the half-CFL condition.
///
/// The bound uses the equilibrium relaxation speed of each cell (its own
/// state on both sides of a virtual face, so the jump terms vanish):
/// `max(|u - a/(M rho)|, |u + a/(M rho)|)` per direction, with
/// `a/(M rho) = c / (M min(1, M))` for the two-speed law and `c / M` for
/// the one-speed law. In 2D the step is the minimum over both directions.
pub fn compute_dt(
    gas: GasModel,
    grid: &Grid,
    fields: &FieldSet,
    mach: f64,
    cfl: f64,
    law: SpeedLaw,
    mhat_k: Option<f64>,
) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::UsageError(format!("cfl must lie in (0, 0.5], got {cfl}")));
    }
    let mut max_x: f64 = 0.0;
    let mut max_y: f64 = 0.0;
    let prod_x = mach_speed_product(mach, law, mhat_k, grid.dx);
    let prod_y = mach_speed_product(mach, law, mhat_k, grid.dy);
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let q = gas.cons_to_prim(&fields.cons[grid.idx(i, j)], mach, i, j)?;
            let c = gas.sound_speed(q.rho, q.p)?;
            let sx = q.u[0].abs() + c / prod_x;
            max_x = max_x.max(sx);
            if !grid.is_1d() {
                let sy = q.u[1].abs() + c / prod_y;
                max_y = max_y.max(sy);
            }
        }
    }
    if !max_x.is_finite() || (!grid.is_1d() && !max_y.is_finite()) {
        return Err(Error::TimeIntegration("non-finite wave speed in CFL bound".into()));
    }
    let dt_x = cfl * grid.dx / max_x;
    let dt = if grid.is_1d() { dt_x } else { dt_x.min(cfl * grid.dy / max_y) };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::TimeIntegration(format!("degenerate time step {dt}")));
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gas() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    fn rest_fields(grid: &Grid) -> FieldSet {
        let w = gas().prim_to_cons(&PrimitiveState { rho: 1.0, u: [0.0, 0.0], p: 1.0 }, 1.0);
        FieldSet::constant(grid, w)
    }

    #[test]
    fn grid_geometry() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        assert_eq!(grid.width(), 8);
        assert!(grid.is_1d());
        assert_abs_diff_eq!(grid.dx, 0.25);
        // First interior cell center sits half a cell in.
        let [x, _] = grid.cell_center(2, 0);
        assert_abs_diff_eq!(x, 0.125);
        // Ghost centers extend the spacing outward.
        let [x, _] = grid.cell_center(0, 0);
        assert_abs_diff_eq!(x, -0.375);
    }

    /// Densities of the single physical row (j = ghost) of a 1D grid.
    fn physical_row(grid: &Grid, fields: &FieldSet) -> Vec<f64> {
        (0..grid.width()).map(|i| fields.cons[grid.idx(i, grid.ghost)].rho).collect()
    }

    #[test]
    fn periodic_ghosts_wrap() {
        // Four cells with ghost width two: low ghosts take interior cells
        // 3 and 4 (one-based), high ghosts take 1 and 2.
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = rest_fields(&grid);
        for i in 0..grid.width() {
            fields.cons[grid.idx(i, grid.ghost)].rho = i as f64 + 1.0;
        }
        // The physical row carries values 1..8; interior cells hold 3,4,5,6.
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
        let rho = physical_row(&grid, &fields);
        assert_eq!(&rho[..2], &[5.0, 6.0], "low ghosts wrap from the high end");
        assert_eq!(&rho[6..], &[3.0, 4.0], "high ghosts wrap from the low end");
    }

    #[test]
    fn zero_gradient_copies_edge_cell() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = rest_fields(&grid);
        for i in 0..grid.width() {
            fields.cons[grid.idx(i, grid.ghost)].rho = i as f64 + 1.0;
        }
        fill_ghosts(
            &grid,
            &mut fields,
            &BoundaryRules::uniform(BoundaryRule::ZeroGradient),
            0.0,
            &NoAnalyticData,
            gas(),
            1.0,
        )
        .unwrap();
        let rho = physical_row(&grid, &fields);
        assert_eq!(&rho[..2], &[3.0, 3.0]);
        assert_eq!(&rho[6..], &[6.0, 6.0]);
    }

    #[test]
    fn unpaired_periodic_is_rejected() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = rest_fields(&grid);
        let rules = BoundaryRules {
            x_lo: BoundaryRule::Periodic,
            x_hi: BoundaryRule::ZeroGradient,
            y_lo: BoundaryRule::ZeroGradient,
            y_hi: BoundaryRule::ZeroGradient,
        };
        assert!(fill_ghosts(&grid, &mut fields, &rules, 0.0, &NoAnalyticData, gas(), 1.0).is_err());
    }

    #[test]
    fn dirichlet_needs_exact_solution() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let mut fields = rest_fields(&grid);
        let err = fill_ghosts(
            &grid,
            &mut fields,
            &BoundaryRules::uniform(BoundaryRule::DirichletExact),
            0.0,
            &NoAnalyticData,
            gas(),
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn dt_rest_state() {
        let grid = Grid::new(10, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let fields = rest_fields(&grid);
        let dt = compute_dt(gas(), &grid, &fields, 1.0, 0.45, SpeedLaw::TwoSpeed, None).unwrap();
        assert_relative_eq!(dt, 0.038_031_941_462_783_246, max_relative = 1e-14);
    }

    #[test]
    fn dt_low_mach_scaling() {
        let grid = Grid::new(10, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let fields = rest_fields(&grid);
        let dt1 = compute_dt(gas(), &grid, &fields, 1.0, 0.45, SpeedLaw::TwoSpeed, None).unwrap();
        let dt01 = compute_dt(gas(), &grid, &fields, 0.1, 0.45, SpeedLaw::TwoSpeed, None).unwrap();
        // Two-speed wave speed grows like 1/M^2 at rest.
        assert_relative_eq!(dt01, dt1 * 0.01, max_relative = 1e-13);
        let dt01_one = compute_dt(gas(), &grid, &fields, 0.1, 0.45, SpeedLaw::OneSpeed, None).unwrap();
        assert_relative_eq!(dt01_one, dt1 * 0.1, max_relative = 1e-13);
    }

    #[test]
    fn dt_grid_floor_overrides_small_mach() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let fields = rest_fields(&grid);
        let mach = 0.5;
        let k = 1.4;
        // k dx = 0.35 sits between M^2 = 0.25 and M = 0.5: the floor takes
        // over and dt scales with k dx instead of M^2.
        let dt = compute_dt(gas(), &grid, &fields, mach, 0.45, SpeedLaw::TwoSpeed, Some(k)).unwrap();
        let dt_plain = compute_dt(gas(), &grid, &fields, mach, 0.45, SpeedLaw::TwoSpeed, None).unwrap();
        assert_relative_eq!(dt, dt_plain * (k * grid.dx) / (mach * mach), max_relative = 1e-13);
        // Far below M^2 the floor is inert.
        let dt_tiny = compute_dt(gas(), &grid, &fields, mach, 0.45, SpeedLaw::TwoSpeed, Some(1e-9)).unwrap();
        assert_relative_eq!(dt_tiny, dt_plain, max_relative = 1e-15);
        // A huge floor saturates at the one-speed level.
        let dt_sat = compute_dt(gas(), &grid, &fields, mach, 0.45, SpeedLaw::TwoSpeed, Some(1e3)).unwrap();
        let dt_one = compute_dt(gas(), &grid, &fields, mach, 0.45, SpeedLaw::OneSpeed, None).unwrap();
        assert_relative_eq!(dt_sat, dt_one, max_relative = 1e-15);
    }

    #[test]
    fn dt_rejects_bad_cfl() {
        let grid = Grid::new(4, 1, [0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let fields = rest_fields(&grid);
        assert!(compute_dt(gas(), &grid, &fields, 1.0, 0.6, SpeedLaw::TwoSpeed, None).is_err());
        assert!(compute_dt(gas(), &grid, &fields, 1.0, 0.0, SpeedLaw::TwoSpeed, None).is_err());
    }
}
