//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys may appear once.
//! Unknown keys are rejected so typos cannot silently fall back to
//! defaults.
//!
//! Keys: `case` (required), `scheme` (two-speed | one-speed | rusanov-nwb),
//! `order` (1 | 2), `rho_bar` (arithmetic | isothermal | polytropic |
//! apriori), `gamma_eq` (exponent for `rho_bar = polytropic`), `mach`,
//! `beta`, `cfl`, `nx`, `ny`, `t_final`, `boundary` (uniform override),
//! `mhat_k`, `output_dir`, `snapshot_every`, `eta` (perturbation case),
//! `vortex_cutoff` (gresho-vortex case).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::baselines::SchemeKind;
use crate::grid::BoundaryRule;
use crate::riemann::RhoBarMode;
use crate::{Error, Result};

/// Parsed run configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: String,
    pub scheme: SchemeKind,
    /// Spatial order of the scheme; order 1 steps with forward Euler,
    /// order 2 with SSP-RK3.
    pub order: u8,
    /// Interface density mean override; `None` keeps the case default.
    pub rho_bar: Option<RhoBarMode>,
    pub mach: Option<f64>,
    pub beta: f64,
    pub cfl: f64,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub t_final: Option<f64>,
    pub boundary: Option<BoundaryRule>,
    pub mhat_k: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub snapshot_every: Option<usize>,
    pub eta: Option<f64>,
    pub vortex_cutoff: Option<f64>,
}

impl RunConfig {
    /// Configuration for `case` with every other key at its default.
    pub fn for_case(case: &str) -> Self {
        RunConfig {
            case: case.to_string(),
            scheme: SchemeKind::TwoSpeed,
            order: 2,
            rho_bar: None,
            mach: None,
            beta: 1.1,
            cfl: 0.45,
            nx: None,
            ny: None,
            t_final: None,
            boundary: None,
            mhat_k: None,
            output_dir: None,
            snapshot_every: None,
            eta: None,
            vortex_cutoff: None,
        }
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| {
        Error::UsageError(format!("key '{key}': cannot parse '{value}' as a number"))
    })
}

fn parse_count(key: &str, value: &str) -> Result<usize> {
    let n = value.parse::<usize>().map_err(|_| {
        Error::UsageError(format!("key '{key}': cannot parse '{value}' as a positive integer"))
    })?;
    if n == 0 {
        return Err(Error::UsageError(format!("key '{key}' must be at least 1")));
    }
    Ok(n)
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let x = parse_number(key, value)?;
    if !(x > 0.0) {
        return Err(Error::UsageError(format!("key '{key}' must be positive, got {value}")));
    }
    Ok(x)
}

/// Parse configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut case = None;
    let mut config = RunConfig::for_case("");
    let mut rho_bar_name: Option<String> = None;
    let mut gamma_eq: Option<f64> = None;
    let mut seen = HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::UsageError(format!("line {}: expected 'key = value', found '{line}'", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(Error::UsageError(format!("line {}: key '{key}' has no value", lineno + 1)));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::UsageError(format!("line {}: key '{key}' appears twice", lineno + 1)));
        }
        match key {
            "case" => case = Some(value.to_string()),
            "scheme" => config.scheme = SchemeKind::parse(value)?,
            "order" => {
                config.order = match value {
                    "1" => 1,
                    "2" => 2,
                    other => {
                        return Err(Error::UsageError(format!(
                            "key 'order' must be 1 or 2, got {other}"
                        )));
                    }
                }
            }
            "rho_bar" => rho_bar_name = Some(value.to_string()),
            "gamma_eq" => {
                let x = parse_number(key, value)?;
                if !(x > 1.0) {
                    return Err(Error::UsageError(format!(
                        "key 'gamma_eq' must exceed 1, got {value}"
                    )));
                }
                gamma_eq = Some(x);
            }
            "mach" => config.mach = Some(parse_positive(key, value)?),
            "beta" => config.beta = parse_positive(key, value)?,
            "cfl" => {
                let x = parse_positive(key, value)?;
                if x > 0.5 {
                    return Err(Error::UsageError(format!(
                        "key 'cfl' must lie in (0, 0.5], got {value}"
                    )));
                }
                config.cfl = x;
            }
            "nx" => config.nx = Some(parse_count(key, value)?),
            "ny" => config.ny = Some(parse_count(key, value)?),
            "t_final" => {
                let x = parse_number(key, value)?;
                if !(x >= 0.0) {
                    return Err(Error::UsageError(format!(
                        "key 't_final' must be nonnegative, got {value}"
                    )));
                }
                config.t_final = Some(x);
            }
            "boundary" => config.boundary = Some(BoundaryRule::parse(value)?),
            "mhat_k" => config.mhat_k = Some(parse_positive(key, value)?),
            "output_dir" => config.output_dir = Some(PathBuf::from(value)),
            "snapshot_every" => config.snapshot_every = Some(parse_count(key, value)?),
            "eta" => {
                let x = parse_number(key, value)?;
                if !x.is_finite() {
                    return Err(Error::UsageError(format!(
                        "key 'eta' must be finite, got {value}"
                    )));
                }
                config.eta = Some(x);
            }
            "vortex_cutoff" => config.vortex_cutoff = Some(parse_positive(key, value)?),
            other => {
                return Err(Error::UsageError(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )));
            }
        }
    }

    config.case = case.ok_or_else(|| Error::UsageError("missing required key 'case'".into()))?;
    config.rho_bar = match rho_bar_name.as_deref() {
        None => None,
        Some("arithmetic") => Some(RhoBarMode::Arithmetic),
        Some("isothermal") => Some(RhoBarMode::IsothermalLogMean),
        Some("apriori") => Some(RhoBarMode::AprioriHydrostatic),
        Some("polytropic") => {
            let gamma_eq = gamma_eq.ok_or_else(|| {
                Error::UsageError("rho_bar = polytropic needs the 'gamma_eq' key".into())
            })?;
            Some(RhoBarMode::Polytropic { gamma_eq })
        }
        Some(other) => {
            return Err(Error::UsageError(format!(
                "unknown rho_bar '{other}' (expected arithmetic, isothermal, polytropic or apriori)"
            )));
        }
    };
    if gamma_eq.is_some() && !matches!(config.rho_bar, Some(RhoBarMode::Polytropic { .. })) {
        return Err(Error::UsageError(
            "key 'gamma_eq' only applies together with rho_bar = polytropic".into(),
        ));
    }
    Ok(config)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
