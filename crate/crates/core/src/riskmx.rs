//! Likelihood-by-severity risk matrix.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BINS: usize = 5;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("item {name:?}: severity {severity} outside 1..=5")]
    BadSeverity { name: String, severity: u8 },
    #[error("invalid risk configuration: {0}")]
    BadConfig(String),
    #[error("risk items: {0}")]
    Items(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskItem {
    pub name: String,
    pub probability: f64,
    pub severity: u8,
}

impl RiskItem {
    pub fn new(name: impl Into<String>, probability: f64, severity: u8) -> Self {
        Self {
            name: name.into(),
            probability,
            severity,
        }
    }

    pub fn check(&self) -> Result<(), RiskError> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(RiskError::OutOfRange(self.probability));
        }
        if !(1..=BINS as u8).contains(&self.severity) {
            return Err(RiskError::BadSeverity {
                name: self.name.clone(),
                severity: self.severity,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green,
    Yellow,
    Red,
}

impl Color {
    pub fn letter(self) -> char {
        match self {
            Color::Green => 'G',
            Color::Yellow => 'Y',
            Color::Red => 'R',
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Green => "green",
            Color::Yellow => "yellow",
            Color::Red => "red",
        })
    }
}

/// Bin edges and the diagonal-sum color map.
///
/// A probability below `likelihood_thresholds[k]` falls in bin `k + 1`;
/// anything at or above the last edge is bin 5. A cell is red when
/// likelihood plus severity reaches `red_min_sum`, yellow from
/// `yellow_min_sum`, green otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    pub likelihood_thresholds: [f64; BINS - 1],
    pub yellow_min_sum: u8,
    pub red_min_sum: u8,
}

impl Default for RiskConfig {
    fn default() -> Self {
        Self {
            likelihood_thresholds: [1e-6, 1e-4, 1e-2, 1e-1],
            yellow_min_sum: 5,
            red_min_sum: 8,
        }
    }
}

impl RiskConfig {
    pub fn check(&self) -> Result<(), RiskError> {
        let t = &self.likelihood_thresholds;
        if !t.iter().all(|x| *x > 0.0 && *x <= 1.0) || !t.windows(2).all(|w| w[0] < w[1]) {
            return Err(RiskError::BadConfig(
                "likelihood thresholds must be strictly ascending within (0, 1]".into(),
            ));
        }
        if !(2 <= self.yellow_min_sum && self.yellow_min_sum <= self.red_min_sum && self.red_min_sum <= 11) {
            return Err(RiskError::BadConfig(
                "color sums must satisfy 2 <= yellow_min_sum <= red_min_sum <= 11".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RiskError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RiskError::BadConfig(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, RiskError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn likelihood_bin(&self, probability: f64) -> Result<u8, RiskError> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(RiskError::OutOfRange(probability));
        }
        let below = self.likelihood_thresholds.iter().position(|&edge| probability < edge);
        Ok(below.map_or(BINS, |k| k + 1) as u8)
    }

    pub fn color(&self, likelihood: u8, severity: u8) -> Color {
        let sum = likelihood + severity;
        if sum >= self.red_min_sum {
            Color::Red
        } else if sum >= self.yellow_min_sum {
            Color::Yellow
        } else {
            Color::Green
        }
    }
}

/// Bin with the default thresholds.
pub fn likelihood_bin(probability: f64) -> Result<u8, RiskError> {
    RiskConfig::default().likelihood_bin(probability)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCell {
    pub likelihood: u8,
    pub severity: u8,
    pub color: Color,
    pub count: usize,
    pub items: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskMatrix {
    /// Row-major by likelihood bin, then severity.
    pub cells: Vec<RiskCell>,
    pub config: RiskConfig,
}

impl RiskMatrix {
    pub fn cell(&self, likelihood: u8, severity: u8) -> &RiskCell {
        &self.cells[(likelihood as usize - 1) * BINS + severity as usize - 1]
    }

    pub fn total(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum()
    }

    /// Likelihood 5 at the top, severity increasing to the right.
    pub fn render_text(&self) -> String {
        let mut out = String::from("likelihood \\ severity    1     2     3     4     5\n");
        for l in (1..=BINS as u8).rev() {
            out.push_str(&format!("{l:>22}"));
            for s in 1..=BINS as u8 {
                let c = self.cell(l, s);
                out.push_str(&format!("  {}{:>3}", c.color.letter(), c.count));
            }
            out.push('\n');
        }
        out.push_str(&format!("items: {}\n", self.total()));
        out
    }
}

pub fn classify(items: &[RiskItem], config: &RiskConfig) -> Result<RiskMatrix, RiskError> {
    config.check()?;
    let mut cells: Vec<RiskCell> = (1..=BINS as u8)
        .flat_map(|l| (1..=BINS as u8).map(move |s| (l, s)))
        .map(|(likelihood, severity)| RiskCell {
            likelihood,
            severity,
            color: config.color(likelihood, severity),
            count: 0,
            items: Vec::new(),
        })
        .collect();
    for item in items {
        item.check()?;
        let l = config.likelihood_bin(item.probability)?;
        let cell = &mut cells[(l as usize - 1) * BINS + item.severity as usize - 1];
        cell.count += 1;
        cell.items.push(item.name.clone());
    }
    Ok(RiskMatrix {
        cells,
        config: config.clone(),
    })
}

/// CSV with header `name,probability,severity`.
pub fn read_items_csv<R: std::io::Read>(reader: R) -> Result<Vec<RiskItem>, RiskError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let items = rdr
        .deserialize()
        .collect::<Result<Vec<RiskItem>, _>>()
        .map_err(|e| RiskError::Items(e.to_string()))?;
    for item in &items {
        item.check()?;
    }
    Ok(items)
}
