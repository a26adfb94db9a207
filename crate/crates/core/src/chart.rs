//! Coordinate charts on the control manifolds and points expressed in them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Control-manifold chart.
///
/// Coordinate orderings are fixed:
/// * `Cpn { n }`: `(θ_1..θ_n, φ_1..φ_n)`
/// * `CpnCartesian { n }`: `(x_1, y_1, .., x_n, y_n)` with `z_α = x_α + i y_α = θ_α e^{iφ_α}`
/// * `Optical1`: `(x, y, r1, θ1)` with `λ = x + iy`, `μ = r1 e^{iθ1}`
/// * `Optical2`: `(r2, θ2, r3, θ3)` with `ζ = r2 e^{iθ2}`, `ξ = r3 e^{iθ3}`
/// * `Su2Int`: `(α, β, γ)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "chart")]
pub enum Chart {
    #[serde(rename = "CPN")]
    Cpn { n: usize },
    #[serde(rename = "CPN_CARTESIAN")]
    CpnCartesian { n: usize },
    #[serde(rename = "OPTICAL1")]
    Optical1,
    #[serde(rename = "OPTICAL2")]
    Optical2,
    #[serde(rename = "SU2INT")]
    Su2Int,
}

impl Chart {
    pub fn dim(&self) -> usize {
        match *self {
            Chart::Cpn { n } | Chart::CpnCartesian { n } => 2 * n,
            Chart::Optical1 | Chart::Optical2 => 4,
            Chart::Su2Int => 3,
        }
    }

    /// Coordinate names in positional order.
    pub fn coordinate_names(&self) -> Vec<String> {
        match *self {
            Chart::Cpn { n } => (1..=n)
                .map(|a| format!("theta_{a}"))
                .chain((1..=n).map(|a| format!("phi_{a}")))
                .collect(),
            Chart::CpnCartesian { n } => {
                (1..=n).flat_map(|a| [format!("x_{a}"), format!("y_{a}")]).collect()
            }
            Chart::Optical1 => ["x", "y", "r1", "theta1"].map(String::from).to_vec(),
            Chart::Optical2 => ["r2", "theta2", "r3", "theta3"].map(String::from).to_vec(),
            Chart::Su2Int => ["alpha", "beta", "gamma"].map(String::from).to_vec(),
        }
    }

    /// Positional index of a named coordinate.
    pub fn coordinate_index(&self, name: &str) -> Result<usize> {
        self.coordinate_names()
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parameter(format!("chart {self} has no coordinate '{name}'")))
    }

    pub fn check_index(&self, mu: usize) -> Result<()> {
        if mu < self.dim() {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "coordinate index {mu} out of range for chart {self} (dimension {})",
                self.dim()
            )))
        }
    }

    pub fn expect(&self, other: Chart) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::Chart { expected: self.to_string(), found: other.to_string() })
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Cpn { n } => write!(f, "CPN({n})"),
            Chart::CpnCartesian { n } => write!(f, "CPN_CARTESIAN({n})"),
            Chart::Optical1 => write!(f, "OPTICAL1"),
            Chart::Optical2 => write!(f, "OPTICAL2"),
            Chart::Su2Int => write!(f, "SU2INT"),
        }
    }
}

/// A point of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
}

impl ControlPoint {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "chart {chart} needs {} coordinates, got {}",
                chart.dim(),
                coords.len()
            )));
        }
        Ok(Self { chart, coords })
    }

    pub fn origin(chart: Chart) -> Self {
        Self { chart, coords: vec![0.0; chart.dim()] }
    }

    /// Copy with coordinate `mu` shifted by `delta`.
    pub fn shifted(&self, mu: usize, delta: f64) -> Self {
        let mut p = self.clone();
        p.coords[mu] += delta;
        p
    }
}
