//! Discretization of return columns into symbols, and lagged joint histograms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    #[default]
    Quantile,
    EqualWidth,
}

impl fmt::Display for BinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinStrategy::Quantile => "quantile",
            BinStrategy::EqualWidth => "equal_width",
        })
    }
}

impl FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "quantile" => Ok(BinStrategy::Quantile),
            "equal_width" => Ok(BinStrategy::EqualWidth),
            other => Err(Error::config(
                "strategy",
                format!("expected quantile or equal_width, got '{other}'"),
            )),
        }
    }
}

pub const DEFAULT_BINS: usize = 8;

/// A discretized series: symbols in `0..bins` plus the `bins + 1` edges
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSequence {
    symbols: Vec<u32>,
    bins: usize,
    edges: Vec<f64>,
}

impl SymbolSequence {
    /// Wraps already-discrete data. Edges are the integers `0..=bins`.
    pub fn from_symbols(symbols: Vec<u32>, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidInput("bin count must be positive".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= bins) {
            return Err(Error::InvalidInput(format!("symbol {s} outside 0..{bins}")));
        }
        Ok(Self {
            symbols,
            bins,
            edges: (0..=bins).map(|k| k as f64).collect(),
        })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Same alphabet and edges with replacement symbols (surrogate shuffles).
    pub fn with_symbols(&self, symbols: Vec<u32>) -> Self {
        debug_assert_eq!(symbols.len(), self.symbols.len());
        Self {
            symbols,
            bins: self.bins,
            edges: self.edges.clone(),
        }
    }
}

/// Discretizes `column` into at most `bins` symbols.
///
/// Quantile: cut points are the empirical quantiles `x_(⌈n·k/B⌉)` of the
/// sorted sample; a value equal to a cut point goes to the lower bin. Cut
/// points that coincide under ties, or with the maximum, are merged, so the
/// returned sequence may report fewer bins than requested. Only ranks matter,
/// so any strictly increasing transform of the data yields the same symbols.
///
/// Equal width: `bins` uniform intervals over `[min, max]`, left-closed, with
/// the maximum placed in the last bin.
pub fn bin_series(column: &[f64], bins: usize, strategy: BinStrategy) -> Result<SymbolSequence> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins, got {bins}")));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("column contains non-finite values".into()));
    }
    if column.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min == max {
        return Err(Error::DegenerateSeries(format!("all {} values equal {min}", column.len())));
    }

    match strategy {
        BinStrategy::Quantile => {
            let n = column.len();
            if n < bins {
                return Err(Error::TooFewSamples { needed: bins, got: n });
            }
            let mut sorted = column.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut cuts: Vec<f64> = Vec::with_capacity(bins - 1);
            for k in 1..bins {
                let rank = (n * k).div_ceil(bins);
                let q = sorted[rank - 1];
                if q < max && cuts.last().is_none_or(|&last| q > last) {
                    cuts.push(q);
                }
            }
            let symbols = column
                .iter()
                .map(|&v| cuts.partition_point(|&c| c < v) as u32)
                .collect();
            let mut edges = Vec::with_capacity(cuts.len() + 2);
            edges.push(min);
            edges.extend_from_slice(&cuts);
            edges.push(max);
            Ok(SymbolSequence {
                symbols,
                bins: cuts.len() + 1,
                edges,
            })
        }
        BinStrategy::EqualWidth => {
            let width = (max - min) / bins as f64;
            let mut edges: Vec<f64> = (0..bins).map(|k| min + k as f64 * width).collect();
            edges.push(max);
            let interior = &edges[1..bins];
            let symbols = column
                .iter()
                .map(|&v| (interior.partition_point(|&e| e <= v) as u32).min(bins as u32 - 1))
                .collect();
            Ok(SymbolSequence {
                symbols,
                bins,
                edges,
            })
        }
    }
}

/// Dense counts over the product of symbol alphabets, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointHistogram {
    dims: Vec<usize>,
    counts: Vec<u64>,
    total: u64,
}

const MAX_CELLS: usize = 1 << 24;

impl JointHistogram {
    pub fn from_counts(dims: Vec<usize>, counts: Vec<u64>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if dims.is_empty() || cells != counts.len() {
            return Err(Error::InvalidInput(format!(
                "{} counts for dims {dims:?}",
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyOverlap);
        }
        Ok(Self { dims, counts, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn count(&self, coords: &[usize]) -> u64 {
        self.counts[self.index(coords)]
    }

    pub fn probability(&self, coords: &[usize]) -> f64 {
        self.count(coords) as f64 / self.total as f64
    }

    /// Coordinates of a flat index.
    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Non-empty cells as `(coords, count)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (self.coords(i), c))
    }

    /// Sums out every axis not listed in `keep`; kept axes stay in the given order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<JointHistogram> {
        if keep.is_empty() || keep.iter().any(|&a| a >= self.dims.len()) {
            return Err(Error::InvalidInput(format!(
                "axes {keep:?} out of range for {} dims",
                self.dims.len()
            )));
        }
        let dims: Vec<usize> = keep.iter().map(|&a| self.dims[a]).collect();
        let mut counts = vec![0u64; dims.iter().product()];
        for (i, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let full = self.coords(i);
            let idx = keep.iter().zip(&dims).fold(0, |acc, (&a, &d)| acc * d + full[a]);
            counts[idx] += c;
        }
        Ok(JointHistogram {
            dims,
            counts,
            total: self.total,
        })
    }
}

/// Counts lagged symbol tuples.
///
/// Axis `a` reads `seqs[a]` at `lags[a]` steps before the most recent time in
/// the tuple: with lags `[0, 1]` the tuple is `(x[t+1], x[t])`. A single
/// sequence is broadcast over all lags. Only times where every lagged index is
/// valid are counted.
pub fn joint_histogram(seqs: &[&SymbolSequence], lags: &[usize]) -> Result<JointHistogram> {
    if lags.is_empty() || seqs.is_empty() {
        return Err(Error::InvalidInput("need at least one axis".into()));
    }
    if seqs.len() != 1 && seqs.len() != lags.len() {
        return Err(Error::InvalidInput(format!(
            "{} sequences for {} lags",
            seqs.len(),
            lags.len()
        )));
    }
    let len = seqs[0].len();
    if let Some(other) = seqs.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch(len, other.len()));
    }
    let axis_seq = |a: usize| if seqs.len() == 1 { seqs[0] } else { seqs[a] };

    let dims: Vec<usize> = (0..lags.len()).map(|a| axis_seq(a).bins()).collect();
    let cells: usize = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if cells > MAX_CELLS {
        return Err(Error::InvalidInput(format!("histogram of {cells} cells is too large")));
    }
    let max_lag = *lags.iter().max().unwrap();
    if len <= max_lag {
        return Err(Error::EmptyOverlap);
    }

    let mut counts = vec![0u64; cells];
    for t in 0..len - max_lag {
        let mut idx = 0;
        for (a, &lag) in lags.iter().enumerate() {
            idx = idx * dims[a] + axis_seq(a).symbols()[t + max_lag - lag] as usize;
        }
        counts[idx] += 1;
    }
    Ok(JointHistogram {
        dims,
        counts,
        total: (len - max_lag) as u64,
    })
}
