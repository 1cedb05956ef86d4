//! Plug-in Shannon entropy, mutual information and transfer entropy, all in bits.
//!
//! Every estimate is computed from empirical frequencies of one joint
//! histogram and its own marginals, so mutual information and transfer entropy
//! are non-negative by construction (tiny negative rounding is clamped to 0).
//! Empty cells contribute nothing (`0 · log 0 = 0`).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{joint_histogram, JointHistogram, SymbolSequence};
use crate::error::{Error, Result};
use crate::matrix::{InteractionMatrix, Measure};

/// Shannon entropy of the histogram's joint distribution.
pub fn entropy(hist: &JointHistogram) -> f64 {
    let n = hist.total() as f64;
    let h: f64 = hist
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Entropy of a single symbol sequence.
pub fn sequence_entropy(x: &SymbolSequence) -> Result<f64> {
    Ok(entropy(&joint_histogram(&[x], &[0])?))
}

pub fn mutual_information(x: &SymbolSequence, y: &SymbolSequence) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: x.len() });
    }
    let joint = joint_histogram(&[x, y], &[0, 0])?;
    Ok(mutual_information_from(&joint))
}

/// MI between the two axes of a 2-d histogram.
pub fn mutual_information_from(joint: &JointHistogram) -> f64 {
    let dims = joint.dims();
    let (nx, ny) = (dims[0], dims[1]);
    let mut cx = vec![0u64; nx];
    let mut cy = vec![0u64; ny];
    for (coords, c) in joint.nonzero() {
        cx[coords[0]] += c;
        cy[coords[1]] += c;
    }
    let n = joint.total() as f64;
    let mi: f64 = joint
        .nonzero()
        .map(|(coords, c)| {
            let c = c as f64;
            let ratio = c * n / (cx[coords[0]] as f64 * cy[coords[1]] as f64);
            c / n * ratio.log2()
        })
        .sum();
    mi.max(0.0)
}

/// Transfer entropy `source → target` with one step of history on each side:
///
/// `Σ p(i', i, j) · log2[ p(i' | i, j) / p(i' | i) ]`
///
/// where `i'` is the target `dt` steps ahead, `i` the target now and `j` the
/// source now.
pub fn transfer_entropy(source: &SymbolSequence, target: &SymbolSequence, dt: usize) -> Result<f64> {
    Ok(transfer_entropy_from(&te_histogram(source, target, dt)?))
}

/// The `(target[t+dt], target[t], source[t])` histogram.
pub fn te_histogram(source: &SymbolSequence, target: &SymbolSequence, dt: usize) -> Result<JointHistogram> {
    if dt == 0 {
        return Err(Error::InvalidInput("dt must be at least 1".into()));
    }
    if source.len() != target.len() {
        return Err(Error::LengthMismatch(source.len(), target.len()));
    }
    if target.len() < dt + 2 {
        return Err(Error::TooFewSamples {
            needed: dt + 2,
            got: target.len(),
        });
    }
    joint_histogram(&[target, target, source], &[0, dt, dt])
}

/// TE from a `(next, own past, source past)` histogram.
pub fn transfer_entropy_from(hist: &JointHistogram) -> f64 {
    let dims = hist.dims();
    let (na, nb, ns) = (dims[0], dims[1], dims[2]);
    let mut c_ab = vec![0u64; na * nb];
    let mut c_bs = vec![0u64; nb * ns];
    let mut c_b = vec![0u64; nb];
    for (k, c) in hist.nonzero() {
        c_ab[k[0] * nb + k[1]] += c;
        c_bs[k[1] * ns + k[2]] += c;
        c_b[k[1]] += c;
    }
    let n = hist.total() as f64;
    let te: f64 = hist
        .nonzero()
        .map(|(k, c)| {
            let c = c as f64;
            let num = c * c_b[k[1]] as f64;
            let den = c_bs[k[1] * ns + k[2]] as f64 * c_ab[k[0] * nb + k[1]] as f64;
            c / n * (num / den).log2()
        })
        .sum();
    te.max(0.0)
}

/// `H(x[t+dt] | x[t])`, the TE matrix diagonal.
pub fn conditional_entropy_rate(x: &SymbolSequence, dt: usize) -> Result<f64> {
    if dt == 0 {
        return Err(Error::InvalidInput("dt must be at least 1".into()));
    }
    let pair = joint_histogram(&[x], &[0, dt])?;
    let past = pair.marginalize(&[1])?;
    Ok((entropy(&pair) - entropy(&past)).max(0.0))
}

fn check_equal_lengths(seqs: &[SymbolSequence]) -> Result<()> {
    if let Some(first) = seqs.first() {
        if let Some(other) = seqs.iter().find(|s| s.len() != first.len()) {
            return Err(Error::LengthMismatch(first.len(), other.len()));
        }
    }
    Ok(())
}

/// Directed TE matrix: `values[i][j] = TE(j → i)`; the diagonal holds
/// `H(x_i[t+dt] | x_i[t])`.
pub fn te_matrix(asset_ids: &[String], seqs: &[SymbolSequence], dt: usize) -> Result<InteractionMatrix> {
    let n = seqs.len();
    if asset_ids.len() != n || n == 0 {
        return Err(Error::InvalidInput(format!("{} ids for {n} sequences", asset_ids.len())));
    }
    check_equal_lengths(seqs)?;

    let cells: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                conditional_entropy_rate(&seqs[i], dt)
            } else {
                transfer_entropy(&seqs[j], &seqs[i], dt)
            }
        })
        .collect::<Result<_>>()?;
    let values = cells.chunks(n).map(<[f64]>::to_vec).collect();
    Ok(InteractionMatrix::new(asset_ids.to_vec(), values, Measure::TransferEntropy)?
        .with_param("history_target", 1)
        .with_param("history_source", 1)
        .with_param("dt", dt)
        .with_param("diagonal", "conditional_entropy_rate"))
}

/// Symmetric MI matrix; the diagonal holds each sequence's own entropy.
pub fn mi_matrix(asset_ids: &[String], seqs: &[SymbolSequence]) -> Result<InteractionMatrix> {
    let n = seqs.len();
    if asset_ids.len() != n || n == 0 {
        return Err(Error::InvalidInput(format!("{} ids for {n} sequences", asset_ids.len())));
    }
    check_equal_lengths(seqs)?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let cells: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                sequence_entropy(&seqs[i])
            } else {
                mutual_information(&seqs[i], &seqs[j])
            }
        })
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(cells) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(InteractionMatrix::new(asset_ids.to_vec(), values, Measure::MutualInformation)?
        .with_param("diagonal", "entropy"))
}

/// Spread of TE after the source's time order is destroyed by shuffling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateFloor {
    pub mean: f64,
    pub std: f64,
    pub surrogates: usize,
}

/// TE of `count` shuffled copies of `source` into `target`.
///
/// Shuffles draw from ChaCha20 keyed by `seed` on stream `stream`, so distinct
/// pairs can use distinct streams under one seed.
pub fn surrogate_floor(
    source: &SymbolSequence,
    target: &SymbolSequence,
    dt: usize,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<SurrogateFloor> {
    if count == 0 {
        return Err(Error::InvalidInput("surrogate count must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut symbols = source.symbols().to_vec();
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        symbols.shuffle(&mut rng);
        let shuffled = source.with_symbols(symbols.clone());
        values.push(transfer_entropy(&shuffled, target, dt)?);
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = if count > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    Ok(SurrogateFloor {
        mean,
        std: var.sqrt(),
        surrogates: count,
    })
}

/// Surrogate floor for every ordered pair, laid out like [`te_matrix`]
/// (`values[i][j]` is the floor of `j → i`); the diagonal is zero.
pub fn te_floor_matrix(
    asset_ids: &[String],
    seqs: &[SymbolSequence],
    dt: usize,
    count: usize,
    seed: u64,
) -> Result<InteractionMatrix> {
    let n = seqs.len();
    check_equal_lengths(seqs)?;
    let cells: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                Ok(0.0)
            } else {
                surrogate_floor(&seqs[j], &seqs[i], dt, count, seed, k as u64).map(|f| f.mean)
            }
        })
        .collect::<Result<_>>()?;
    let values = cells.chunks(n).map(<[f64]>::to_vec).collect();
    Ok(InteractionMatrix::new(asset_ids.to_vec(), values, Measure::TransferEntropy)?
        .with_param("dt", dt)
        .with_param("surrogates", count)
        .with_param("seed", seed)
        .with_param("content", "surrogate_floor_mean"))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &[u32], bins: usize) -> SymbolSequence {
        SymbolSequence::from_symbols(s.to_vec(), bins).unwrap()
    }

    #[test]
    fn entropy_cases() {
        let uniform = JointHistogram::from_counts(vec![2], vec![5, 5]).unwrap();
        assert_eq!(entropy(&uniform), 1.0);
        let single = JointHistogram::from_counts(vec![3], vec![0, 7, 0]).unwrap();
        assert_eq!(entropy(&single), 0.0);
        // −(0.75·log2 0.75 + 0.25·log2 0.25) = 0.811278124459...
        let skew = JointHistogram::from_counts(vec![2], vec![3, 1]).unwrap();
        assert!((entropy(&skew) - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn mi_of_identity_is_entropy() {
        let x = seq(&[0, 1, 2, 2, 1, 0, 0, 3, 3, 1], 4);
        let mi = mutual_information(&x, &x).unwrap();
        assert!((mi - sequence_entropy(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mi_of_product_structure_is_zero() {
        let x = seq(&[0, 0, 1, 1], 2);
        let y = seq(&[0, 1, 0, 1], 2);
        assert_eq!(mutual_information(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn mi_length_mismatch() {
        assert!(matches!(
            mutual_information(&seq(&[0, 1, 0], 2), &seq(&[0, 1], 2)),
            Err(Error::LengthMismatch(3, 2))
        ));
    }

    #[test]
    fn alternating_target_has_zero_te() {
        let target: Vec<u32> = (0..200).map(|t| t % 2).collect();
        let source: Vec<u32> = (0..200).map(|t| ((t * 7 + t / 3) % 5) as u32 % 2).collect();
        let te = transfer_entropy(&seq(&source, 2), &seq(&target, 2), 1).unwrap();
        assert_eq!(te, 0.0);
    }

    #[test]
    fn shifted_copy_carries_one_bit() {
        // source: fixed pseudo-random bits; target[t+1] = source[t]
        let mut state = 0x2545_f491_u64;
        let source: Vec<u32> = (0..1000)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 40) as u32 & 1
            })
            .collect();
        let mut target = vec![0u32; 1000];
        target[1..].copy_from_slice(&source[..999]);
        let te = transfer_entropy(&seq(&source, 2), &seq(&target, 2), 1).unwrap();
        // brute force over the joint counts: TE = H(next | own past) − 0
        let h = te_histogram(&seq(&source, 2), &seq(&target, 2), 1).unwrap();
        let pair = h.marginalize(&[0, 1]).unwrap();
        let expected = entropy(&pair) - entropy(&pair.marginalize(&[1]).unwrap());
        assert!((te - expected).abs() < 1e-12);
        assert!((te - 1.0).abs() < 0.01, "te = {te}");
    }

    #[test]
    fn te_rejects_short_or_mismatched() {
        assert!(matches!(
            transfer_entropy(&seq(&[0, 1], 2), &seq(&[0, 1], 2), 1),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            transfer_entropy(&seq(&[0, 1, 0], 2), &seq(&[0, 1, 0, 1], 2), 1),
            Err(Error::LengthMismatch(..))
        ));
    }

    #[test]
    fn one_asset_matrix() {
        let m = te_matrix(&["a".to_string()], &[seq(&[0, 1, 1, 0, 1], 2)], 1).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.off_diagonal_mean().is_none());
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((1.0 - binary_entropy(0.1) - 0.531_004_406_410_719).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn mi_symmetric_and_non_negative(
            (a, b) in (2usize..60).prop_flat_map(|n| (
                prop::collection::vec(0u32..4, n),
                prop::collection::vec(0u32..3, n),
            )),
        ) {
            let x = seq(&a, 4);
            let y = seq(&b, 3);
            let xy = mutual_information(&x, &y).unwrap();
            let yx = mutual_information(&y, &x).unwrap();
            prop_assert!(xy >= 0.0);
            prop_assert!((xy - yx).abs() < 1e-12);
        }

        #[test]
        fn te_non_negative(
            (a, b) in (3usize..60).prop_flat_map(|n| (
                prop::collection::vec(0u32..4, n),
                prop::collection::vec(0u32..4, n),
            )),
            dt in 1usize..3,
        ) {
            prop_assume!(a.len() >= dt + 2);
            let te = transfer_entropy(&seq(&a, 4), &seq(&b, 4), dt).unwrap();
            prop_assert!(te >= 0.0);
        }
    }
}
