//! Returns, descriptive statistics and the Pearson correlation matrix.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AlignedPanel;
use crate::matrix::{InteractionMatrix, Measure};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    #[default]
    Log,
    Simple,
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Log => "log",
            ReturnKind::Simple => "simple",
        })
    }
}

impl FromStr for ReturnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnKind::Log),
            "simple" => Ok(ReturnKind::Simple),
            other => Err(Error::config("return_kind", format!("expected log or simple, got '{other}'"))),
        }
    }
}

/// Fractional returns, one column per asset. Row `t` is dated by the later
/// of the two prices it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsMatrix {
    pub asset_ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<Vec<f64>>,
    pub kind: ReturnKind,
}

impl ReturnsMatrix {
    pub fn new(
        asset_ids: Vec<String>,
        dates: Vec<NaiveDate>,
        columns: Vec<Vec<f64>>,
        kind: ReturnKind,
    ) -> Result<Self> {
        if asset_ids.is_empty() || asset_ids.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} asset ids for {} columns",
                asset_ids.len(),
                columns.len()
            )));
        }
        for (id, col) in asset_ids.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::LengthMismatch(col.len(), dates.len()));
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite return in '{id}' at row {t}")));
            }
        }
        Ok(Self {
            asset_ids,
            dates,
            columns,
            kind,
        })
    }

    /// Builds a matrix for data without a calendar, dating row `t` as
    /// 2000-01-01 plus `t` days.
    pub fn from_columns(asset_ids: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let len = columns.first().map_or(0, Vec::len);
        Self::new(asset_ids, synthetic_dates(len), columns, ReturnKind::Log)
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn column(&self, asset: usize) -> &[f64] {
        &self.columns[asset]
    }

    /// Rows `range` of every column.
    pub fn slice_rows(&self, range: Range<usize>) -> ReturnsMatrix {
        ReturnsMatrix {
            asset_ids: self.asset_ids.clone(),
            dates: self.dates[range.clone()].to_vec(),
            columns: self.columns.iter().map(|c| c[range.clone()].to_vec()).collect(),
            kind: self.kind,
        }
    }
}

pub fn synthetic_dates(len: usize) -> Vec<NaiveDate> {
    let origin = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    (0..len)
        .map(|t| origin.checked_add_days(Days::new(t as u64)).unwrap())
        .collect()
}

pub fn compute_returns(panel: &AlignedPanel, kind: ReturnKind) -> Result<ReturnsMatrix> {
    if panel.n_dates() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: panel.n_dates(),
        });
    }
    let columns = panel
        .columns
        .iter()
        .map(|prices| {
            prices
                .windows(2)
                .map(|w| match kind {
                    ReturnKind::Log => (w[1] / w[0]).ln(),
                    ReturnKind::Simple => w[1] / w[0] - 1.0,
                })
                .collect()
        })
        .collect();
    ReturnsMatrix::new(
        panel.asset_ids.clone(),
        panel.dates[1..].to_vec(),
        columns,
        kind,
    )
}

/// Moments of one return column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetStats {
    pub asset_id: String,
    pub observations: usize,
    pub mean: f64,
    /// Sample standard deviation, denominator n − 1.
    pub std: f64,
    /// m3 / m2^{3/2} with central moments over n.
    pub skewness: f64,
    /// m4 / m2² − 3.
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub assets: Vec<AssetStats>,
    pub return_kind: ReturnKind,
    pub kurtosis_convention: String,
}

pub fn describe(returns: &ReturnsMatrix) -> Result<StatsSummary> {
    let assets = returns
        .asset_ids
        .iter()
        .zip(&returns.columns)
        .map(|(id, col)| describe_column(id, col))
        .collect::<Result<Vec<_>>>()?;
    Ok(StatsSummary {
        assets,
        return_kind: returns.kind,
        kurtosis_convention: "excess".to_string(),
    })
}

fn describe_column(id: &str, col: &[f64]) -> Result<AssetStats> {
    let n = col.len();
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    let nf = n as f64;
    let mean = col.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in col {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(Error::DegenerateSeries(id.to_string()));
    }
    let std = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    Ok(AssetStats {
        asset_id: id.to_string(),
        observations: n,
        mean,
        std,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Pearson correlation on the full sample: symmetric, unit diagonal, entries
/// clamped to [−1, 1].
pub fn correlation_matrix(returns: &ReturnsMatrix) -> Result<InteractionMatrix> {
    let rows = returns.n_rows();
    if rows < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: rows });
    }
    let n = returns.n_assets();
    let centered: Vec<Vec<f64>> = returns
        .columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / rows as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(k) = norms.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateSeries(returns.asset_ids[k].clone()));
    }

    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in 0..i {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(
        InteractionMatrix::new(returns.asset_ids.clone(), values, Measure::Correlation)?
            .with_param("estimator", "pearson")
            .with_param("samples", rows),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn panel(cols: Vec<Vec<f64>>) -> AlignedPanel {
        let t = cols[0].len();
        AlignedPanel {
            asset_ids: (0..cols.len()).map(|k| format!("a{k}")).collect(),
            dates: synthetic_dates(t),
            columns: cols,
        }
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let r = compute_returns(&panel(vec![vec![100.0; 3]]), ReturnKind::Log).unwrap();
        assert_eq!(r.column(0), &[0.0, 0.0]);
        assert_eq!(r.dates.len(), 2);
    }

    #[test]
    fn log_and_simple_returns() {
        let p = panel(vec![vec![100.0, 110.0]]);
        let log = compute_returns(&p, ReturnKind::Log).unwrap();
        assert!((log.column(0)[0] - 0.0953102).abs() < 1e-7);
        let simple = compute_returns(&p, ReturnKind::Simple).unwrap();
        assert!((simple.column(0)[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn symmetric_column_has_zero_mean_and_skew() {
        let col: Vec<f64> = (0..100).map(|k| if k % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let r = ReturnsMatrix::from_columns(vec!["x".into()], vec![col]).unwrap();
        let s = describe(&r).unwrap();
        assert_eq!(s.assets[0].mean, 0.0);
        assert_eq!(s.assets[0].skewness, 0.0);
        // two-point distribution: kurtosis 1, excess −2
        assert!((s.assets[0].excess_kurtosis + 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_degenerate() {
        let r = ReturnsMatrix::from_columns(vec!["x".into()], vec![vec![0.5; 10]]).unwrap();
        assert!(matches!(describe(&r), Err(Error::DegenerateSeries(_))));
        assert!(matches!(correlation_matrix(&r), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn duplicated_and_negated_columns() {
        let x = vec![0.1, -0.2, 0.05, 0.3, -0.1];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = ReturnsMatrix::from_columns(
            vec!["a".into(), "b".into(), "c".into()],
            vec![x.clone(), x, neg],
        )
        .unwrap();
        let c = correlation_matrix(&r).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((c.get(0, 2) + 1.0).abs() < 1e-12);
        assert_eq!(c.get(2, 2), 1.0);
    }

    fn brute_mean_std(col: &[f64]) -> (f64, f64) {
        let n = col.len() as f64;
        let mut mean = 0.0;
        for v in col {
            mean += v;
        }
        mean /= n;
        let mut ss = 0.0;
        for v in col {
            ss += (v - mean).powi(2);
        }
        (mean, (ss / (n - 1.0)).sqrt())
    }

    proptest! {
        #[test]
        fn log_returns_scale_invariant(
            prices in prop::collection::vec(1.0f64..1000.0, 3..40),
            scale in 0.01f64..100.0,
        ) {
            let a = compute_returns(&panel(vec![prices.clone()]), ReturnKind::Log).unwrap();
            let scaled: Vec<f64> = prices.iter().map(|p| p * scale).collect();
            let b = compute_returns(&panel(vec![scaled]), ReturnKind::Log).unwrap();
            for (x, y) in a.column(0).iter().zip(b.column(0)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn describe_matches_two_pass(col in prop::collection::vec(-1.0f64..1.0, 4..200)) {
            prop_assume!(col.iter().any(|v| *v != col[0]));
            let r = ReturnsMatrix::from_columns(vec!["x".into()], vec![col.clone()]).unwrap();
            let s = describe(&r).unwrap();
            let (mean, std) = brute_mean_std(&col);
            prop_assert!((s.assets[0].mean - mean).abs() < 1e-12);
            prop_assert!((s.assets[0].std - std).abs() < 1e-12);
        }

        #[test]
        fn correlation_affine_invariant(
            a in prop::collection::vec(-1.0f64..1.0, 10..60),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let b: Vec<f64> = a.iter().enumerate().map(|(k, v)| v * 0.5 + (k as f64 * 0.37).sin()).collect();
            let r1 = ReturnsMatrix::from_columns(vec!["a".into(), "b".into()], vec![a.clone(), b.clone()]).unwrap();
            let moved: Vec<f64> = a.iter().map(|v| v * scale + shift).collect();
            let r2 = ReturnsMatrix::from_columns(vec!["a".into(), "b".into()], vec![moved, b]).unwrap();
            let (Ok(c1), Ok(c2)) = (correlation_matrix(&r1), correlation_matrix(&r2)) else {
                return Ok(());
            };
            prop_assert!((c1.get(0, 1) - c2.get(0, 1)).abs() < 1e-9);
            prop_assert_eq!(c1.get(0, 1), c1.get(1, 0));
            prop_assert!(c1.get(0, 1).abs() <= 1.0);
        }
    }
}
