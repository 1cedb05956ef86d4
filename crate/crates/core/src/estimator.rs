//! One entry point that turns a returns matrix into any of the four measures.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::discretize::{bin_series, BinStrategy, SymbolSequence, DEFAULT_BINS};
use crate::error::Result;
use crate::infoflow::{mi_matrix, te_floor_matrix, te_matrix};
use crate::kmdrift::{km_drift_matrix, DriftParams};
use crate::matrix::{InteractionMatrix, Measure};
use crate::stats::{correlation_matrix, ReturnsMatrix};

/// Settings shared by all estimators. Fields a measure does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorParams {
    pub bins: usize,
    pub strategy: BinStrategy,
    /// Lag in observations, for transfer entropy and drift.
    pub dt: usize,
    /// Time per observation for the drift matrix.
    pub step: f64,
    pub center: bool,
    pub ridge: f64,
    /// Shuffled-source surrogates per TE pair; 0 disables the floor.
    pub surrogates: usize,
    pub seed: u64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            strategy: BinStrategy::Quantile,
            dt: 1,
            step: 1.0,
            center: true,
            ridge: 0.0,
            surrogates: 0,
            seed: 0,
        }
    }
}

impl EstimatorParams {
    pub fn drift(&self) -> DriftParams {
        DriftParams {
            lag: self.dt,
            step: self.step,
            center: self.center,
            ridge: self.ridge,
        }
    }
}

/// Discretizes every column with the configured bins and strategy.
pub fn discretize_all(returns: &ReturnsMatrix, params: &EstimatorParams) -> Result<Vec<SymbolSequence>> {
    returns
        .asset_ids
        .iter()
        .zip(&returns.columns)
        .map(|(id, col)| {
            bin_series(col, params.bins, params.strategy).map_err(|e| match e {
                crate::Error::DegenerateSeries(_) => crate::Error::DegenerateSeries(id.clone()),
                e => e,
            })
        })
        .collect()
}

fn binning_params(returns: &ReturnsMatrix, seqs: &[SymbolSequence], params: &EstimatorParams) -> Map<String, Value> {
    let edges: Map<String, Value> = returns
        .asset_ids
        .iter()
        .zip(seqs)
        .map(|(id, s)| (id.clone(), json!(s.edges())))
        .collect();
    let mut m = Map::new();
    m.insert("bins".into(), json!(params.bins));
    m.insert("strategy".into(), json!(params.strategy));
    m.insert("bin_edges".into(), Value::Object(edges));
    m
}

/// Full-sample estimate of `measure`.
pub fn estimate(returns: &ReturnsMatrix, measure: Measure, params: &EstimatorParams) -> Result<InteractionMatrix> {
    let mut m = match measure {
        Measure::Correlation => correlation_matrix(returns)?,
        Measure::KmDrift => km_drift_matrix(returns, &params.drift())?,
        Measure::MutualInformation => {
            let seqs = discretize_all(returns, params)?;
            let mut m = mi_matrix(&returns.asset_ids, &seqs)?;
            m.params.extend(binning_params(returns, &seqs, params));
            m
        }
        Measure::TransferEntropy => {
            let seqs = discretize_all(returns, params)?;
            let mut m = te_matrix(&returns.asset_ids, &seqs, params.dt)?;
            m.params.extend(binning_params(returns, &seqs, params));
            m.params.insert("surrogates".into(), json!(params.surrogates));
            if params.surrogates > 0 {
                let floor = te_floor_matrix(&returns.asset_ids, &seqs, params.dt, params.surrogates, params.seed)?;
                m.params.insert("seed".into(), json!(params.seed));
                m.params.insert("surrogate_floor".into(), json!(floor.values));
            }
            m
        }
    };
    m.params.insert("samples".into(), json!(returns.n_rows()));
    m.params.insert("return_kind".into(), json!(returns.kind));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_measure_runs_on_small_panel() {
        let a: Vec<f64> = (0..64).map(|t| ((t * 37 % 17) as f64 - 8.0) / 100.0).collect();
        let b: Vec<f64> = (0..64).map(|t| ((t * 11 % 13) as f64 - 6.0) / 100.0).collect();
        let r = ReturnsMatrix::from_columns(vec!["a".into(), "b".into()], vec![a, b]).unwrap();
        let params = EstimatorParams {
            bins: 4,
            surrogates: 3,
            ..Default::default()
        };
        for measure in Measure::ALL {
            let m = estimate(&r, measure, &params).unwrap();
            assert_eq!(m.measure, measure);
            assert_eq!(m.len(), 2);
            assert_eq!(m.params["samples"], json!(64));
        }
        let te = estimate(&r, Measure::TransferEntropy, &params).unwrap();
        assert!(te.params.contains_key("surrogate_floor"));
        assert!(te.params["bin_edges"]["a"].as_array().unwrap().len() == 5);
    }

    #[test]
    fn degenerate_column_names_asset() {
        let r = ReturnsMatrix::from_columns(
            vec!["flat".into(), "b".into()],
            vec![vec![0.0; 20], (0..20).map(|t| t as f64).collect()],
        )
        .unwrap();
        match estimate(&r, Measure::TransferEntropy, &EstimatorParams::default()) {
            Err(crate::Error::DegenerateSeries(id)) => assert_eq!(id, "flat"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
