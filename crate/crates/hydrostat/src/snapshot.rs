//! CSV snapshots of the solution fields.
//!
//! One row per interior cell, row-major (y outer, x inner), every value
//! printed with 17 significant digits so a read-back reproduces the fields
//! bit for bit. Identical inputs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::eos::GasModel;
use crate::grid::{FieldSet, Grid};
use crate::{Error, Result};

/// Column header of every snapshot file.
pub const SNAPSHOT_HEADER: &str = "x,y,rho,u1,u2,p,E,e,mach";

/// Render the snapshot CSV into a string.
///
/// The `mach` column holds the local Mach number `M |u| / c`.
pub fn snapshot_string(grid: &Grid, fields: &FieldSet, gas: GasModel, mach: f64) -> Result<String> {
    let mut out = String::with_capacity(64 * (grid.nx * grid.ny + 1));
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for j in grid.interior_y() {
        for i in grid.interior_x() {
            let c = grid.idx(i, j);
            let w = &fields.cons[c];
            let q = gas.cons_to_prim(w, mach, i, j)?;
            let e = gas.internal_energy(&q);
            let sound = gas.sound_speed(q.rho, q.p)?;
            let local = mach * (q.u[0] * q.u[0] + q.u[1] * q.u[1]).sqrt() / sound;
            let [x, y] = grid.cell_center(i, j);
            writeln!(
                out,
                "{x:.16e},{y:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{e:.16e},{local:.16e}",
                q.rho, q.u[0], q.u[1], q.p, w.energy
            )
            .expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

/// Write the snapshot CSV to `path`.
pub fn write_snapshot(
    grid: &Grid,
    fields: &FieldSet,
    gas: GasModel,
    mach: f64,
    path: &Path,
) -> Result<()> {
    let text = snapshot_string(grid, fields, gas, mach)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One parsed snapshot row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotRow {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
    pub energy: f64,
    pub e: f64,
    pub mach: f64,
}

/// Parse a snapshot file written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Vec<SnapshotRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SNAPSHOT_HEADER => {}
        other => {
            return Err(Error::UsageError(format!(
                "not a snapshot file: expected header '{SNAPSHOT_HEADER}', found {other:?}"
            )));
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut v = [0.0; 9];
        let mut parts = line.split(',');
        for (k, slot) in v.iter_mut().enumerate() {
            let field = parts.next().ok_or_else(|| {
                Error::UsageError(format!(
                    "snapshot row {} has {} columns, expected 9",
                    lineno + 2,
                    k
                ))
            })?;
            *slot = field.trim().parse::<f64>().map_err(|_| {
                Error::UsageError(format!(
                    "snapshot row {}: cannot parse '{field}' as a number",
                    lineno + 2
                ))
            })?;
        }
        if parts.next().is_some() {
            return Err(Error::UsageError(format!(
                "snapshot row {} has more than 9 columns",
                lineno + 2
            )));
        }
        rows.push(SnapshotRow {
            x: v[0],
            y: v[1],
            rho: v[2],
            u1: v[3],
            u2: v[4],
            p: v[5],
            energy: v[6],
            e: v[7],
            mach: v[8],
        });
    }
    Ok(rows)
}
