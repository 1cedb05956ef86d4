//! The N×N result type shared by every estimator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Which pairwise measure a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Correlation,
    MutualInformation,
    TransferEntropy,
    KmDrift,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Correlation,
        Measure::MutualInformation,
        Measure::TransferEntropy,
        Measure::KmDrift,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Correlation => "correlation",
            Measure::MutualInformation => "mutual_information",
            Measure::TransferEntropy => "transfer_entropy",
            Measure::KmDrift => "km_drift",
        }
    }

    /// Directed measures keep `values[i][j] != values[j][i]`.
    pub fn is_directed(self) -> bool {
        matches!(self, Measure::TransferEntropy | Measure::KmDrift)
    }

    pub fn units(self) -> Units {
        match self {
            Measure::Correlation => Units::Dimensionless,
            Measure::MutualInformation | Measure::TransferEntropy => Units::Bits,
            Measure::KmDrift => Units::PerStep,
        }
    }

    /// Signed measures get a diverging color scale around zero.
    pub fn is_signed(self) -> bool {
        matches!(self, Measure::Correlation | Measure::KmDrift)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "correlation" | "corr" => Ok(Measure::Correlation),
            "mutual_information" | "mi" => Ok(Measure::MutualInformation),
            "transfer_entropy" | "te" => Ok(Measure::TransferEntropy),
            "km_drift" | "km" | "drift" => Ok(Measure::KmDrift),
            other => Err(Error::config("measure", format!("unknown measure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Bits,
    Dimensionless,
    PerStep,
}

/// A square matrix of one pairwise measure over a fixed list of assets.
///
/// Orientation is the same for every directed measure: `values[i][j]` is the
/// influence of asset `j` on asset `i` (transfer entropy `j → i`, or the drift
/// coefficient of `x_j` in `dx_i/dt`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub asset_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub measure: Measure,
    pub directed: bool,
    pub units: Units,
    /// Estimator parameters and conventions, embedded in every output.
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl InteractionMatrix {
    pub fn new(asset_ids: Vec<String>, values: Vec<Vec<f64>>, measure: Measure) -> Result<Self> {
        let n = asset_ids.len();
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!(
                "matrix must be {n}x{n} to match asset ids"
            )));
        }
        let directed = measure.is_directed();
        if !directed {
            for i in 0..n {
                for j in 0..i {
                    if (values[i][j] - values[j][i]).abs() > 1e-12 {
                        return Err(Error::InvalidInput(format!(
                            "{measure} matrix must be symmetric, [{i}][{j}] differs"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            asset_ids,
            values,
            measure,
            directed,
            units: measure.units(),
            params: Map::new(),
        })
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asset_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Mean of all entries with `i != j`; `None` for a 1×1 matrix.
    pub fn off_diagonal_mean(&self) -> Option<f64> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += self.values[i][j];
                }
            }
        }
        Some(sum / (n * (n - 1)) as f64)
    }

    /// Off-diagonal entries as `(to, from, value)` triples in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| {
            (0..n)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.values[i][j]))
        })
    }
}
