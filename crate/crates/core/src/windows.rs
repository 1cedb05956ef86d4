//! Time-resolved estimates over sliding or segmented windows.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorParams};
use crate::matrix::{InteractionMatrix, Measure};
use crate::stats::ReturnsMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WindowSpec {
    Sliding { length: usize, stride: usize },
    Segmented { segments: usize },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Segmented { segments: 10 }
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSpec::Sliding { length, stride } => write!(f, "sliding:{length}:{stride}"),
            WindowSpec::Segmented { segments } => write!(f, "{segments}"),
        }
    }
}

/// `"10"` or `"segmented:10"` for K blocks, `"sliding:250:50"` for length 250 stride 50.
impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("windows", format!("expected K, segmented:K or sliding:LEN:STRIDE, got '{s}'"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            [k] => Ok(WindowSpec::Segmented { segments: num(k)? }),
            ["segmented", k] => Ok(WindowSpec::Segmented { segments: num(k)? }),
            ["sliding", len, stride] => Ok(WindowSpec::Sliding {
                length: num(len)?,
                stride: num(stride)?,
            }),
            ["sliding", len] => {
                let length = num(len)?;
                Ok(WindowSpec::Sliding { length, stride: length })
            }
            _ => Err(bad()),
        }
    }
}

/// Window boundaries as half-open index ranges. Depends only on `(len, spec)`.
///
/// Sliding windows start at multiples of `stride` and must fit entirely.
/// Segmented windows are K contiguous blocks; the first `len mod K` are one longer.
pub fn make_windows(len: usize, spec: &WindowSpec) -> Result<Vec<Range<usize>>> {
    match *spec {
        WindowSpec::Sliding { length, stride } => {
            if length == 0 || stride == 0 {
                return Err(Error::config("windows", "length and stride must be positive"));
            }
            if length > len {
                return Err(Error::WindowTooLarge { length, available: len });
            }
            Ok((0..)
                .map(|k| k * stride)
                .take_while(|start| start + length <= len)
                .map(|start| start..start + length)
                .collect())
        }
        WindowSpec::Segmented { segments } => {
            if segments == 0 {
                return Err(Error::config("windows", "segment count must be positive"));
            }
            if segments > len {
                return Err(Error::WindowTooLarge { length: segments, available: len });
            }
            let (base, extra) = (len / segments, len % segments);
            let mut start = 0;
            Ok((0..segments)
                .map(|k| {
                    let size = base + usize::from(k < extra);
                    let w = start..start + size;
                    start += size;
                    w
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    pub start_index: usize,
    /// Exclusive.
    pub end_index: usize,
    pub start_date: NaiveDate,
    /// Inclusive: date of the last row in the window.
    pub end_date: NaiveDate,
    pub matrix: InteractionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedResult {
    pub measure: Measure,
    pub spec: WindowSpec,
    pub windows: Vec<Window>,
}

impl WindowedResult {
    pub fn asset_ids(&self) -> &[String] {
        &self.windows[0].matrix.asset_ids
    }

    /// Off-diagonal mean per window, in window order.
    pub fn off_diagonal_means(&self) -> Vec<f64> {
        self.windows
            .iter()
            .map(|w| w.matrix.off_diagonal_mean().unwrap_or(0.0))
            .collect()
    }
}

/// Runs `measure` on every window. Bins are re-fit inside each window.
pub fn evolve(
    returns: &ReturnsMatrix,
    spec: &WindowSpec,
    measure: Measure,
    params: &EstimatorParams,
) -> Result<WindowedResult> {
    let ranges = make_windows(returns.n_rows(), spec)?;
    let windows = ranges
        .into_par_iter()
        .enumerate()
        .map(|(index, range)| {
            let slice = returns.slice_rows(range.clone());
            let mut matrix = estimate(&slice, measure, params).map_err(|e| e.in_window(index))?;
            matrix
                .params
                .insert("bins_refit_per_window".into(), serde_json::Value::Bool(true));
            Ok(Window {
                index,
                start_index: range.start,
                end_index: range.end,
                start_date: returns.dates[range.start],
                end_date: returns.dates[range.end - 1],
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowedResult {
        measure,
        spec: *spec,
        windows,
    })
}
