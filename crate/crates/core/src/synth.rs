//! Seeded synthetic processes with known interaction structure.
//!
//! All randomness comes from [`SynthRng`]: the ChaCha20 keystream (RFC 8439
//! block function, zero nonce, 64-bit block counter starting at 0) keyed with
//! the seed as 8 little-endian bytes followed by 24 zero bytes. Uniforms take
//! the top 53 bits of each 64-bit word (words are little-endian pairs of
//! keystream u32s). Normals use Box–Muller on two consecutive uniforms
//! `u1, u2`: `r = sqrt(−2 ln(1 − u1))`, first `r·cos(2πu2)`, then `r·sin(2πu2)`.

use chrono::Days;
use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::SymbolSequence;
use crate::error::{Error, Result};
use crate::ingest::PriceSeries;
use crate::stats::{synthetic_dates, ReturnsMatrix};

pub struct SynthRng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            inner: ChaCha20Rng::from_seed(key),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Generator selection plus parameters, as stored in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessSpec {
    /// `x` iid fair bits, `y[t+1] = x[t] XOR Bernoulli(epsilon)`.
    CoupledBinary { epsilon: f64, steps: usize, seed: u64 },
    /// Like `CoupledBinary`, but `y` is independent fair bits before `shift_at`
    /// (default: half of `steps`).
    RegimeShift {
        epsilon: f64,
        steps: usize,
        #[serde(default)]
        shift_at: Option<usize>,
        seed: u64,
    },
    /// `x[t+1] = A x[t] + sigma ξ[t]`.
    Var1 { matrix: Vec<Vec<f64>>, sigma: f64, steps: usize, seed: u64 },
    /// Euler–Maruyama for `dx = A x dt + sigma dW`.
    OuEuler {
        matrix: Vec<Vec<f64>>,
        sigma: f64,
        dt_sim: f64,
        steps: usize,
        seed: u64,
    },
}

/// Magnitude of the ± returns that encode binary symbols.
pub const BINARY_RETURN: f64 = 0.01;

impl ProcessSpec {
    pub fn seed(&self) -> u64 {
        match self {
            ProcessSpec::CoupledBinary { seed, .. }
            | ProcessSpec::RegimeShift { seed, .. }
            | ProcessSpec::Var1 { seed, .. }
            | ProcessSpec::OuEuler { seed, .. } => *seed,
        }
    }

    pub fn set_seed(&mut self, new: u64) {
        match self {
            ProcessSpec::CoupledBinary { seed, .. }
            | ProcessSpec::RegimeShift { seed, .. }
            | ProcessSpec::Var1 { seed, .. }
            | ProcessSpec::OuEuler { seed, .. } => *seed = new,
        }
    }

    /// Generates the panel. Binary processes become returns of ±[`BINARY_RETURN`].
    pub fn generate(&self) -> Result<ReturnsMatrix> {
        match self {
            ProcessSpec::CoupledBinary { epsilon, steps, seed } => {
                let (x, y) = gen_coupled_binary(*epsilon, *steps, *seed)?;
                binary_returns(&[x, y])
            }
            ProcessSpec::RegimeShift {
                epsilon,
                steps,
                shift_at,
                seed,
            } => {
                let (x, y) = gen_regime_shift(*epsilon, *steps, shift_at.unwrap_or(steps / 2), *seed)?;
                binary_returns(&[x, y])
            }
            ProcessSpec::Var1 {
                matrix,
                sigma,
                steps,
                seed,
            } => gen_var1(matrix, *sigma, *steps, *seed, None),
            ProcessSpec::OuEuler {
                matrix,
                sigma,
                dt_sim,
                steps,
                seed,
            } => gen_ou(matrix, *sigma, *dt_sim, *steps, *seed, None),
        }
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::UnstableSpec("steps must be at least 1".into()));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::UnstableSpec(format!("epsilon {epsilon} outside [0, 0.5]")));
    }
    Ok(())
}

/// `x` iid fair bits; `y[0]` a fair bit, `y[t+1] = x[t] XOR Bernoulli(ε)`.
///
/// Draw order: `y[0]`, then for each `t` the bit `x[t]` followed by the flip
/// for `y[t+1]` (omitted at the last step).
pub fn gen_coupled_binary(epsilon: f64, steps: usize, seed: u64) -> Result<(SymbolSequence, SymbolSequence)> {
    gen_regime_shift(epsilon, steps, 0, seed)
}

/// Coupled chain whose coupling switches on at `shift_at`: `y[t+1]` is a fresh
/// fair bit while `t + 1 < shift_at`, and `x[t] XOR Bernoulli(ε)` afterwards.
/// Both branches consume one uniform, so the `x` path does not depend on `shift_at`.
pub fn gen_regime_shift(
    epsilon: f64,
    steps: usize,
    shift_at: usize,
    seed: u64,
) -> Result<(SymbolSequence, SymbolSequence)> {
    check_epsilon(epsilon)?;
    check_steps(steps)?;
    let mut rng = SynthRng::new(seed);
    let mut x = Vec::with_capacity(steps);
    let mut y = Vec::with_capacity(steps);
    y.push(u32::from(rng.bernoulli(0.5)));
    for t in 0..steps {
        let bit = u32::from(rng.bernoulli(0.5));
        x.push(bit);
        if t + 1 < steps {
            let next = if t + 1 >= shift_at {
                bit ^ u32::from(rng.bernoulli(epsilon))
            } else {
                u32::from(rng.bernoulli(0.5))
            };
            y.push(next);
        }
    }
    Ok((SymbolSequence::from_symbols(x, 2)?, SymbolSequence::from_symbols(y, 2)?))
}

/// Encodes binary symbol sequences as ±[`BINARY_RETURN`] return columns.
pub fn binary_returns(seqs: &[SymbolSequence]) -> Result<ReturnsMatrix> {
    let ids = (1..=seqs.len()).map(|k| format!("x{k}")).collect();
    let cols = seqs
        .iter()
        .map(|s| {
            s.symbols()
                .iter()
                .map(|&b| if b == 1 { BINARY_RETURN } else { -BINARY_RETURN })
                .collect()
        })
        .collect();
    ReturnsMatrix::from_columns(ids, cols)
}

fn square(matrix: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|r| r.len() != n) {
        return Err(Error::UnstableSpec("coefficient matrix must be square and non-empty".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::UnstableSpec("coefficient matrix has non-finite entries".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| matrix[i][j]))
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_real_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn check_noise(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::UnstableSpec(format!("sigma {sigma} must be finite and non-negative")));
    }
    Ok(())
}

fn init_state(n: usize, x0: Option<&[f64]>) -> Result<Vec<f64>> {
    match x0 {
        None => Ok(vec![0.0; n]),
        Some(v) if v.len() == n => Ok(v.to_vec()),
        Some(v) => Err(Error::UnstableSpec(format!("initial state has {} entries, need {n}", v.len()))),
    }
}

/// Runs `x ← x + drift(x) + scale·ξ` and records `x` before each update.
fn iterate(
    transition: &[Vec<f64>],
    noise_scale: f64,
    steps: usize,
    seed: u64,
    mut x: Vec<f64>,
) -> Result<ReturnsMatrix> {
    let n = transition.len();
    let mut rng = SynthRng::new(seed);
    let mut cols = vec![Vec::with_capacity(steps); n];
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        for (col, &v) in cols.iter_mut().zip(&x) {
            col.push(v);
        }
        for (i, slot) in next.iter_mut().enumerate() {
            let drift: f64 = transition[i].iter().zip(&x).map(|(a, v)| a * v).sum();
            *slot = drift + noise_scale * rng.standard_normal();
        }
        std::mem::swap(&mut x, &mut next);
    }
    ReturnsMatrix::from_columns((1..=n).map(|k| format!("x{k}")).collect(), cols)
}

/// Euler–Maruyama path of `dx = A x dt + σ dW`, `steps` rows starting at `x0`
/// (zeros by default). Requires every eigenvalue of `A` to have negative real
/// part and `I + dt_sim·A` to have spectral radius below one.
pub fn gen_ou(
    a_true: &[Vec<f64>],
    sigma: f64,
    dt_sim: f64,
    steps: usize,
    seed: u64,
    x0: Option<&[f64]>,
) -> Result<ReturnsMatrix> {
    let a = square(a_true)?;
    check_noise(sigma)?;
    check_steps(steps)?;
    if !(dt_sim > 0.0) || !dt_sim.is_finite() {
        return Err(Error::UnstableSpec(format!("dt_sim {dt_sim} must be positive")));
    }
    let re = max_real_eigenvalue(&a);
    if re >= 0.0 {
        return Err(Error::UnstableSpec(format!("eigenvalue with real part {re} is not negative")));
    }
    let n = a.nrows();
    let euler = DMatrix::identity(n, n) + &a * dt_sim;
    let rho = spectral_radius(&euler);
    if rho >= 1.0 {
        return Err(Error::UnstableSpec(format!("I + dt_sim·A has spectral radius {rho}; reduce dt_sim")));
    }
    let transition: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| euler[(i, j)]).collect()).collect();
    iterate(&transition, sigma * dt_sim.sqrt(), steps, seed, init_state(n, x0)?)
}

/// `x[t+1] = A x[t] + σ ξ[t]` with spectral radius of `A` below one.
pub fn gen_var1(
    a_step: &[Vec<f64>],
    sigma: f64,
    steps: usize,
    seed: u64,
    x0: Option<&[f64]>,
) -> Result<ReturnsMatrix> {
    let a = square(a_step)?;
    check_noise(sigma)?;
    check_steps(steps)?;
    let rho = spectral_radius(&a);
    if rho >= 1.0 {
        return Err(Error::UnstableSpec(format!("spectral radius {rho} is not below 1")));
    }
    iterate(a_step, sigma, steps, seed, init_state(a.nrows(), x0)?)
}

/// iid standard normal panel scaled by `sigma`.
pub fn gen_white_noise(n: usize, sigma: f64, steps: usize, seed: u64) -> Result<ReturnsMatrix> {
    gen_var1(&vec![vec![0.0; n]; n], sigma, steps, seed, None)
}

/// Price paths whose log returns are the columns: `p[0] = start`,
/// `p[t+1] = p[t]·exp(r[t])`. Dated one day before the first return onwards.
pub fn to_price_series(returns: &ReturnsMatrix, start: f64) -> Result<Vec<PriceSeries>> {
    let mut dates = Vec::with_capacity(returns.n_rows() + 1);
    let first = returns
        .dates
        .first()
        .and_then(|d| d.checked_sub_days(Days::new(1)))
        .unwrap_or_else(|| synthetic_dates(1)[0]);
    dates.push(first);
    dates.extend_from_slice(&returns.dates);

    returns
        .asset_ids
        .iter()
        .zip(&returns.columns)
        .map(|(id, col)| {
            let mut level = start.ln();
            let mut obs = Vec::with_capacity(col.len() + 1);
            obs.push((dates[0], start));
            for (d, r) in dates[1..].iter().zip(col) {
                level += r;
                let p = level.exp();
                if !(p > 0.0) || !p.is_finite() {
                    return Err(Error::UnstableSpec(format!(
                        "price path for '{id}' leaves the representable range on {d}; use fewer steps"
                    )));
                }
                obs.push((*d, p));
            }
            PriceSeries::new(id.clone(), obs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chacha_reference_block() {
        // RFC 8439 A.1 test vector #1: zero key, zero nonce, counter 0
        // keystream begins 76 b8 e0 ad a0 f1 3d 90 40 5d 6a e5 53 86 bd 28
        let mut rng = SynthRng::new(0);
        assert_eq!(rng.next_u64(), 0x903d_f1a0_ade0_b876);
        assert_eq!(rng.next_u64(), 0x28bd_8653_e56a_5d40);
    }

    #[test]
    fn uniform_and_normal_moments() {
        let mut rng = SynthRng::new(7);
        let n = 200_000;
        let z: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn epsilon_zero_is_pure_shift() {
        let (x, y) = gen_coupled_binary(0.0, 500, 3).unwrap();
        assert_eq!(&y.symbols()[1..], &x.symbols()[..499]);
    }

    #[test]
    fn epsilon_out_of_range() {
        assert!(matches!(gen_coupled_binary(0.6, 10, 0), Err(Error::UnstableSpec(_))));
    }

    #[test]
    fn same_seed_same_path() {
        let a = gen_var1(&[vec![0.5, 0.1], vec![0.0, 0.3]], 1.0, 1000, 11, None).unwrap();
        let b = gen_var1(&[vec![0.5, 0.1], vec![0.0, 0.3]], 1.0, 1000, 11, None).unwrap();
        assert_eq!(a, b);
        let c = gen_var1(&[vec![0.5, 0.1], vec![0.0, 0.3]], 1.0, 1000, 12, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unstable_specs_rejected() {
        assert!(matches!(
            gen_ou(&[vec![0.1]], 0.1, 0.01, 10, 0, None),
            Err(Error::UnstableSpec(_))
        ));
        assert!(matches!(
            gen_ou(&[vec![-0.5, 0.0], vec![0.0, 0.1]], 0.1, 0.01, 10, 0, None),
            Err(Error::UnstableSpec(_))
        ));
        // stable in continuous time but the Euler step overshoots
        assert!(matches!(
            gen_ou(&[vec![-300.0]], 0.1, 0.01, 10, 0, None),
            Err(Error::UnstableSpec(_))
        ));
        assert!(matches!(
            gen_var1(&[vec![1.2]], 0.1, 10, 0, None),
            Err(Error::UnstableSpec(_))
        ));
    }

    #[test]
    fn noise_free_decay() {
        let r = gen_ou(&[vec![-1.0]], 0.0, 0.01, 5, 0, Some(&[1.0])).unwrap();
        let expect: Vec<f64> = (0..5).map(|k| 0.99f64.powi(k)).collect();
        for (a, b) in r.column(0).iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn prices_recover_log_returns() {
        let r = gen_var1(&[vec![0.3]], 0.01, 50, 5, None).unwrap();
        let prices = to_price_series(&r, 100.0).unwrap();
        assert_eq!(prices[0].len(), 51);
        let panel = crate::ingest::align(&prices).unwrap();
        let back = crate::stats::compute_returns(&panel, crate::stats::ReturnKind::Log).unwrap();
        for (a, b) in back.column(0).iter().zip(r.column(0)) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(back.dates, r.dates);
    }
}
