//! Linear drift matrix from conditional increment moments.
//!
//! Under the linear ansatz `dx/dt = A x`, the mean increment over a lag `dt`
//! conditioned on the current state is `⟨y_i⟩ = Σ_j ψ_ij x_j` with `ψ = dt·A`.
//! Multiplying by `x_j` and averaging unconditionally gives, per row `i`,
//!
//! ```text
//! ⟨y_i x_j⟩ = Σ_k ψ_ik ⟨x_k x_j⟩      for j = 1..N
//! ```
//!
//! an N×N system with the second-moment matrix on the left. Each row of `ψ`
//! is one solve of that system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{InteractionMatrix, Measure};
use crate::stats::ReturnsMatrix;

/// Condition estimate above which the moment matrix is treated as singular.
pub const SINGULAR_COND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftParams {
    /// Lag in observations.
    pub lag: usize,
    /// Time between consecutive observations; `A = ψ / (lag · step)`.
    pub step: f64,
    /// Subtract each column's mean before forming moments.
    pub center: bool,
    /// Tikhonov term added to the moment matrix diagonal.
    pub ridge: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        Self {
            lag: 1,
            step: 1.0,
            center: true,
            ridge: 0.0,
        }
    }
}

impl DriftParams {
    pub fn dt(&self) -> f64 {
        self.lag as f64 * self.step
    }
}

/// `cross[i][j] = ⟨y_i x_j⟩` and `second[k][j] = ⟨x_k x_j⟩`, averaged over
/// the `samples` times where the increment is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementMoments {
    pub cross: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
    pub samples: usize,
    pub centered: bool,
}

pub fn increment_moments(returns: &ReturnsMatrix, lag: usize, center: bool) -> Result<IncrementMoments> {
    moments_of_columns(&returns.columns, lag, center)
}

pub(crate) fn moments_of_columns(columns: &[Vec<f64>], lag: usize, center: bool) -> Result<IncrementMoments> {
    if lag == 0 {
        return Err(Error::InvalidInput("lag must be at least 1".into()));
    }
    let n = columns.len();
    let rows = columns.first().map_or(0, Vec::len);
    if rows <= lag {
        return Err(Error::TooFewSamples {
            needed: lag + 1,
            got: rows,
        });
    }
    let samples = rows - lag;

    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            if center {
                let mean = c.iter().sum::<f64>() / rows as f64;
                c.iter().map(|v| v - mean).collect()
            } else {
                c.clone()
            }
        })
        .collect();
    let increments: Vec<Vec<f64>> = centered
        .iter()
        .map(|c| (0..samples).map(|t| c[t + lag] - c[t]).collect())
        .collect();

    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a[..samples].iter().zip(&b[..samples]).map(|(x, y)| x * y).sum::<f64>() / samples as f64
    };
    let mut second = vec![vec![0.0; n]; n];
    for k in 0..n {
        for j in 0..=k {
            let v = dot(&centered[k], &centered[j]);
            second[k][j] = v;
            second[j][k] = v;
        }
    }
    let cross = (0..n)
        .map(|i| (0..n).map(|j| dot(&increments[i], &centered[j])).collect())
        .collect();
    Ok(IncrementMoments {
        cross,
        second,
        samples,
        centered: center,
    })
}

/// Result of the moment solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    /// `ψ = dt · A`, dimensionless.
    pub psi: Vec<Vec<f64>>,
    /// Drift matrix per unit time: `drift[i][j]` is the effect of `x_j` on `dx_i/dt`.
    pub drift: Vec<Vec<f64>>,
    pub dt: f64,
    pub moment_matrix: Vec<Vec<f64>>,
    /// 1-norm condition number of the (regularized) moment matrix.
    pub cond: f64,
    pub centered: bool,
    pub ridge: f64,
}

/// Solves `second · ψ_i = cross_i` for every row `i`.
pub fn solve_drift(moments: &IncrementMoments, dt: f64, ridge: f64) -> Result<DriftEstimate> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if ridge < 0.0 {
        return Err(Error::InvalidInput(format!("ridge must be non-negative, got {ridge}")));
    }
    let n = moments.second.len();
    if moments.cross.len() != n || moments.second.iter().chain(&moments.cross).any(|r| r.len() != n) {
        return Err(Error::InvalidInput("moment matrices must be square and equal size".into()));
    }
    let mut system = moments.second.clone();
    for (k, row) in system.iter_mut().enumerate() {
        row[k] += ridge;
    }

    let lu = Lu::factor(&system);
    let cond = lu.as_ref().map_or(f64::INFINITY, |lu| lu.cond_1(&system));
    let lu = match lu {
        Some(lu) if ridge > 0.0 || cond <= SINGULAR_COND => lu,
        _ => return Err(Error::SingularMomentMatrix { cond }),
    };

    let psi: Vec<Vec<f64>> = moments.cross.iter().map(|row| lu.solve(row)).collect();
    let drift = psi
        .iter()
        .map(|row| row.iter().map(|v| v / dt).collect())
        .collect();
    Ok(DriftEstimate {
        psi,
        drift,
        dt,
        moment_matrix: moments.second.clone(),
        cond,
        centered: moments.centered,
        ridge,
    })
}

pub fn estimate_drift(returns: &ReturnsMatrix, params: &DriftParams) -> Result<DriftEstimate> {
    let moments = increment_moments(returns, params.lag, params.center)?;
    solve_drift(&moments, params.dt(), params.ridge)
}

/// The drift matrix as a directed [`InteractionMatrix`] (`values[i][j]` = effect of `j` on `i`).
pub fn km_drift_matrix(returns: &ReturnsMatrix, params: &DriftParams) -> Result<InteractionMatrix> {
    let est = estimate_drift(returns, params)?;
    Ok(
        InteractionMatrix::new(returns.asset_ids.clone(), est.drift, Measure::KmDrift)?
            .with_param("lag", params.lag)
            .with_param("step", params.step)
            .with_param("dt", est.dt)
            .with_param("centered", est.centered)
            .with_param("ridge", est.ridge)
            .with_param("cond", est.cond)
            .with_param("orientation", "values[i][j] = effect of asset j on d/dt of asset i"),
    )
}

/// LU factorization with partial pivoting of a small dense matrix.
pub(crate) struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    /// `None` when a pivot is exactly zero.
    pub(crate) fn factor(a: &[Vec<f64>]) -> Option<Self> {
        let n = a.len();
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| lu[r][col].abs().total_cmp(&lu[s][col].abs()))
                .unwrap();
            if lu[pivot][col] == 0.0 || !lu[pivot][col].is_finite() {
                return None;
            }
            lu.swap(col, pivot);
            perm.swap(col, pivot);
            for r in col + 1..n {
                let f = lu[r][col] / lu[col][col];
                lu[r][col] = f;
                for c in col + 1..n {
                    lu[r][c] -= f * lu[col][c];
                }
            }
        }
        Some(Self { lu, perm })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r][c] * x[c];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }

    /// `‖A‖₁ · ‖A⁻¹‖₁`, with the inverse formed column by column.
    pub(crate) fn cond_1(&self, a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        let norm = |cols: &dyn Fn(usize) -> Vec<f64>| {
            (0..n)
                .map(|c| cols(c).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let a_norm = norm(&|c| a.iter().map(|row| row[c]).collect());
        let inv_norm = norm(&|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            self.solve(&e)
        });
        let cond = a_norm * inv_norm;
        if cond.is_finite() {
            cond
        } else {
            f64::INFINITY
        }
    }
}
