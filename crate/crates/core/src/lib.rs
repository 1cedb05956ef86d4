//! Interaction networks for multi-asset price series.
//!
//! The pipeline loads daily closes ([`ingest`]), aligns them on common dates
//! and converts them to returns ([`stats`]), then estimates one of four
//! pairwise measures: Pearson correlation, mutual information, transfer
//! entropy ([`infoflow`] on symbols from [`discretize`]) or the linear drift
//! matrix of a multivariate Ornstein–Uhlenbeck fit ([`kmdrift`]). Estimates
//! can be tracked over time ([`windows`]) and exported as JSON, CSV, DOT or
//! SVG ([`netout`]). [`synth`] generates processes with known couplings.
//!
//! ```
//! use infonet::{estimate, EstimatorParams, Measure};
//! use infonet::synth::gen_var1;
//!
//! let a = vec![vec![0.5, 0.0], vec![0.6, 0.5]];
//! let returns = gen_var1(&a, 1.0, 20_000, 7, None).unwrap();
//! let te = estimate(&returns, Measure::TransferEntropy, &EstimatorParams::default()).unwrap();
//! // information flows from x1 into x2, not back
//! assert!(te.get(1, 0) > te.get(0, 1));
//! ```

pub mod cli;
pub mod discretize;
pub mod error;
pub mod estimator;
pub mod infoflow;
pub mod ingest;
pub mod kmdrift;
pub mod matrix;
pub mod netout;
pub mod stats;
pub mod synth;
pub mod windows;

pub use discretize::{bin_series, BinStrategy, SymbolSequence};
pub use error::{Error, Result};
pub use estimator::{estimate, EstimatorParams};
pub use ingest::{align, load_csv, AlignedPanel, CsvSchema, PriceSeries};
pub use matrix::{InteractionMatrix, Measure, Units};
pub use netout::{matrix_to_graph, Format, InteractionGraph, Provenance};
pub use stats::{compute_returns, describe, ReturnKind, ReturnsMatrix};
pub use windows::{evolve, WindowSpec, WindowedResult};
