//! EPS sizing calculators and the component failure-rate library.
//!
//! Note that the battery capacity uses a `(N - 1) V_cdis - V_d` voltage term
//! and the array power carries a `V_max / V_min` factor on the peak-demand
//! term; common textbook arrangements of both formulas differ. Fractional
//! cell and string counts round up.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_LIBRARY: &str = include_str!("../data/components.toml");

/// Ratios within this relative distance of an integer are treated as that
/// integer before rounding up, so `18 / 3.6` sizes to 5 cells.
const CEIL_SNAP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("{name} = {value} V must be positive")]
    NonPositiveVoltage { name: &'static str, value: f64 },
    #[error("{name} = {value} must be in (0, 1]")]
    NonPositiveEfficiency { name: &'static str, value: f64 },
    #[error("{name} = {value} must be positive")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("capacity denominator {0} is not positive")]
    DegenerateDenominator(f64),
    #[error("need 0 <= failed ({failed}) <= total ({total}) and total > 0")]
    BadCounts { failed: u64, total: u64 },
    #[error("inspection interval {0} h must be positive")]
    NonPositiveInterval(f64),
    #[error("unknown component: {0}")]
    UnknownComponent(String),
    #[error("component library: {0}")]
    Library(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, SizingError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(SizingError::NonPositiveInput { name, value })
    }
}

fn voltage(name: &'static str, value: f64) -> Result<f64, SizingError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(SizingError::NonPositiveVoltage { name, value })
    }
}

fn efficiency(name: &'static str, value: f64) -> Result<f64, SizingError> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(SizingError::NonPositiveEfficiency { name, value })
    }
}

fn ceil_count(ratio: f64) -> u64 {
    let nearest = ratio.round();
    let c = if (ratio - nearest).abs() <= CEIL_SNAP * nearest.abs() {
        nearest
    } else {
        ratio.ceil()
    };
    (c as u64).max(1)
}

/// Series cells needed to reach the line voltage: `ceil(V_line / V_cell)`.
pub fn cell_count(v_line: f64, v_cell: f64) -> Result<u64, SizingError> {
    let v_line = voltage("v_line", v_line)?;
    let v_cell = voltage("v_cell", v_cell)?;
    Ok(ceil_count(v_line / v_cell))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatterySizingInput {
    /// Line voltage, V.
    pub v_line: f64,
    /// Average cell discharge voltage, V.
    pub v_cell: f64,
    /// Eclipse-phase load, W.
    pub p_e: f64,
    /// Eclipse duration, h.
    pub t_e: f64,
    /// Parallel batteries.
    pub n_b: u32,
    /// Discharge converter efficiency.
    pub eta_dis: f64,
    /// Average discharge voltage, V.
    pub v_cdis: f64,
    /// Voltage drop term, V.
    pub v_d: f64,
    /// Depth of discharge.
    pub dod: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatterySizing {
    pub cells: u64,
    pub capacity_ah: f64,
}

/// `C = P_e T_e / (N_b eta_dis [(N - 1) V_cdis - V_d] DOD)` with `N` from
/// [`cell_count`].
pub fn battery_capacity(input: &BatterySizingInput) -> Result<BatterySizing, SizingError> {
    let cells = cell_count(input.v_line, input.v_cell)?;
    let eta = efficiency("eta_dis", input.eta_dis)?;
    let dod = efficiency("dod", input.dod)?;
    if !(input.p_e >= 0.0 && input.t_e >= 0.0) {
        return Err(SizingError::NonPositiveInput {
            name: if input.p_e >= 0.0 { "t_e" } else { "p_e" },
            value: if input.p_e >= 0.0 { input.t_e } else { input.p_e },
        });
    }
    let denominator = input.n_b as f64 * eta * ((cells - 1) as f64 * input.v_cdis - input.v_d) * dod;
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(SizingError::DegenerateDenominator(denominator));
    }
    Ok(BatterySizing {
        cells,
        capacity_ah: input.p_e * input.t_e / denominator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySizingInput {
    /// Power conversion efficiency.
    pub eta_pc: f64,
    /// Maximum-power tracking deviation efficiency.
    pub eta_d: f64,
    /// Average load, W.
    pub p_av: f64,
    /// Peak load, W.
    pub p_p: f64,
    /// Peak-demand time, h.
    pub t_p: f64,
    /// Sunlight time, h.
    pub t_s: f64,
    /// Battery voltage bounds, V.
    pub v_max: f64,
    pub v_min: f64,
    /// Bus voltage, V.
    pub v_bus: f64,
    /// End-of-life cell maximum-power voltage, V.
    pub v_mp_eol: f64,
    /// End-of-life cell maximum-power current, A.
    pub i_mp_eol: f64,
}

/// `P_sa = (P_av + (P_p t_p / t_s)(V_max / V_min)) / (eta_pc eta_d)`.
pub fn array_power(input: &ArraySizingInput) -> Result<f64, SizingError> {
    let eta_pc = efficiency("eta_pc", input.eta_pc)?;
    let eta_d = efficiency("eta_d", input.eta_d)?;
    let t_s = positive("t_s", input.t_s)?;
    let v_max = voltage("v_max", input.v_max)?;
    let v_min = voltage("v_min", input.v_min)?;
    for (name, v) in [("p_av", input.p_av), ("p_p", input.p_p), ("t_p", input.t_p)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(SizingError::NonPositiveInput { name, value: v });
        }
    }
    Ok((input.p_av + input.p_p * input.t_p / t_s * (v_max / v_min)) / (eta_pc * eta_d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrayLayout {
    /// `P_sa / V_bus`, A.
    pub bus_current: f64,
    /// `ceil(V_bus / V_mp_eol)`.
    pub series_cells: u64,
    /// `ceil(I_bus / I_mp_eol)`.
    pub parallel_strings: u64,
}

pub fn array_layout(p_sa: f64, input: &ArraySizingInput) -> Result<ArrayLayout, SizingError> {
    let p_sa = positive("p_sa", p_sa)?;
    let v_bus = positive("v_bus", input.v_bus)?;
    let v_mp = positive("v_mp_eol", input.v_mp_eol)?;
    let i_mp = positive("i_mp_eol", input.i_mp_eol)?;
    let bus_current = p_sa / v_bus;
    Ok(ArrayLayout {
        bus_current,
        series_cells: ceil_count(v_bus / v_mp),
        parallel_strings: ceil_count(bus_current / i_mp),
    })
}

/// Empirical failure rate `(1 / t_int) (N_f / N_t)`, per hour.
pub fn estimate_lambda(t_int: f64, failed: u64, total: u64) -> Result<f64, SizingError> {
    if !(t_int.is_finite() && t_int > 0.0) {
        return Err(SizingError::NonPositiveInterval(t_int));
    }
    if total == 0 || failed > total {
        return Err(SizingError::BadCounts { failed, total });
    }
    Ok(failed as f64 / total as f64 / t_int)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentEntry {
    pub name: String,
    /// Failures per hour.
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub temperature_c: f64,
}

impl ComponentEntry {
    pub fn midpoint(&self) -> f64 {
        (self.lambda_low + self.lambda_high) / 2.0
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    format: u32,
    unit_scale: f64,
    temperature_c: f64,
    component: Vec<LibraryRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryRow {
    name: String,
    lambda_low: f64,
    lambda_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLibrary {
    entries: Vec<ComponentEntry>,
}

impl ComponentLibrary {
    /// The library compiled into the crate.
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_LIBRARY).expect("bundled component library parses")
    }

    pub fn bundled_source() -> &'static str {
        BUNDLED_LIBRARY
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SizingError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| SizingError::Library(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SizingError> {
        let file: LibraryFile = toml::from_str(text).map_err(|e| SizingError::Library(e.to_string()))?;
        if file.format != 1 {
            return Err(SizingError::Library(format!("unsupported format {}", file.format)));
        }
        if !(file.unit_scale > 0.0 && file.unit_scale.is_finite()) {
            return Err(SizingError::Library(format!(
                "unit_scale {} must be positive",
                file.unit_scale
            )));
        }
        // dividing by an exact 10^k gives the correctly rounded value, so
        // 2000 x 1e-9 comes out identical to the literal 2e-6
        let per = (1.0 / file.unit_scale).round();
        let scale = |v: f64| {
            if per * file.unit_scale == 1.0 {
                v / per
            } else {
                v * file.unit_scale
            }
        };
        let mut entries = Vec::with_capacity(file.component.len());
        for row in file.component {
            let entry = ComponentEntry {
                lambda_low: scale(row.lambda_low),
                lambda_high: scale(row.lambda_high),
                temperature_c: file.temperature_c,
                name: row.name,
            };
            if !(entry.lambda_low > 0.0 && entry.lambda_low <= entry.lambda_high) {
                return Err(SizingError::Library(format!(
                    "{}: need 0 < lambda_low <= lambda_high",
                    entry.name
                )));
            }
            if entries
                .iter()
                .any(|e: &ComponentEntry| e.name.eq_ignore_ascii_case(&entry.name))
            {
                return Err(SizingError::Library(format!("duplicate component {}", entry.name)));
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ComponentEntry] {
        &self.entries
    }

    /// Case-insensitive lookup by component name.
    pub fn lookup(&self, name: &str) -> Result<&ComponentEntry, SizingError> {
        self.find(name)
            .ok_or_else(|| SizingError::UnknownComponent(name.to_string()))
    }

    pub fn find(&self, name: &str) -> Option<&ComponentEntry> {
        let name = name.trim();
        self.entries.iter().find(|e| e.name.eq_ignore_ascii_case(name))
    }
}
