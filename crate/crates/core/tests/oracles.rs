//! Estimators against synthetic processes whose couplings are known.

use infonet::estimator::discretize_all;
use infonet::infoflow::{surrogate_floor, te_matrix, transfer_entropy};
use infonet::kmdrift::{km_drift_matrix, DriftParams};
use infonet::synth::{gen_ou, gen_regime_shift, gen_var1, gen_white_noise};
use infonet::{bin_series, evolve, BinStrategy, EstimatorParams, Measure, ReturnsMatrix, WindowSpec};
use nalgebra::{DMatrix, DVector};

fn hb(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn returns(cols: Vec<Vec<f64>>) -> ReturnsMatrix {
    let ids = (1..=cols.len()).map(|k| format!("x{k}")).collect();
    ReturnsMatrix::from_columns(ids, cols).unwrap()
}

#[test]
fn independent_noise_te_stays_below_one_hundredth_bit() {
    let r = gen_white_noise(2, 1.0, 100_000, 17).unwrap();
    let seqs = discretize_all(&r, &EstimatorParams::default()).unwrap();
    let te = te_matrix(&r.asset_ids, &seqs, 1).unwrap();
    assert!(te.get(0, 1) <= 0.01, "{}", te.get(0, 1));
    assert!(te.get(1, 0) <= 0.01, "{}", te.get(1, 0));
}

/// Least-squares slope of `y` against 0, 1, 2, ...
fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, v) in y.iter().enumerate() {
        let dx = k as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

#[test]
fn constant_coupling_has_no_trend_across_windows() {
    let a = vec![vec![0.4, 0.0], vec![0.5, 0.4]];
    let params = EstimatorParams {
        bins: 4,
        ..Default::default()
    };
    let slopes: Vec<f64> = (0..50)
        .map(|seed| {
            let r = gen_var1(&a, 1.0, 5_000, 1_000 + seed, None).unwrap();
            let w = evolve(&r, &WindowSpec::Segmented { segments: 10 }, Measure::TransferEntropy, &params).unwrap();
            slope(&w.off_diagonal_means())
        })
        .collect();
    let n = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / n;
    let sd = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    // two-sided test at roughly the 0.3% level
    assert!(mean.abs() <= 3.0 * se, "mean slope {mean}, standard error {se}");
}

#[test]
fn regime_shift_raises_te_by_the_analytic_amount() {
    let eps = 0.1;
    let analytic = 1.0 - hb(eps);
    let (x, y) = gen_regime_shift(eps, 20_000, 10_000, 9).unwrap();
    let cols: Vec<Vec<f64>> = [&x, &y]
        .iter()
        .map(|s| s.symbols().iter().map(|&b| if b == 1 { 0.01 } else { -0.01 }).collect())
        .collect();
    let r = returns(cols);
    let params = EstimatorParams {
        bins: 2,
        strategy: BinStrategy::EqualWidth,
        ..Default::default()
    };
    let w = evolve(&r, &WindowSpec::Segmented { segments: 10 }, Measure::TransferEntropy, &params).unwrap();
    let x_to_y: Vec<f64> = w.windows.iter().map(|win| win.matrix.get(1, 0)).collect();
    let pre = x_to_y[..5].iter().sum::<f64>() / 5.0;
    let post = x_to_y[5..].iter().sum::<f64>() / 5.0;
    assert!((post - pre - analytic).abs() < 0.03, "pre {pre}, post {post}, analytic {analytic}");
}

#[test]
fn diagonal_var_has_no_cross_drift_and_te_at_floor() {
    let a = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
    let r = gen_var1(&a, 1.0, 100_000, 23, None).unwrap();
    let km = km_drift_matrix(&r, &DriftParams::default()).unwrap();
    assert!(km.get(0, 1).abs() < 0.02 && km.get(1, 0).abs() < 0.02, "{:?}", km.values);
    assert!((km.get(0, 0) + 0.5).abs() < 0.02 && (km.get(1, 1) + 0.5).abs() < 0.02, "{:?}", km.values);

    let seqs = discretize_all(&r, &EstimatorParams::default()).unwrap();
    for (s, t) in [(0, 1), (1, 0)] {
        let te = transfer_entropy(&seqs[s], &seqs[t], 1).unwrap();
        let floor = surrogate_floor(&seqs[s], &seqs[t], 1, 20, 5, 0).unwrap();
        assert!(te <= floor.mean + 5.0 * floor.std, "{s}->{t}: te {te}, floor {floor:?}");
    }
}

#[test]
fn single_coupling_gives_exactly_one_edge_above_floor() {
    // x1 drives x3; nothing else is coupled
    let a = vec![
        vec![0.3, 0.0, 0.0],
        vec![0.0, 0.3, 0.0],
        vec![0.6, 0.0, 0.3],
    ];
    let r = gen_var1(&a, 1.0, 20_000, 31, None).unwrap();
    let seqs: Vec<_> = r
        .columns
        .iter()
        .map(|c| bin_series(c, 4, BinStrategy::Quantile).unwrap())
        .collect();
    let mut edges = Vec::new();
    for s in 0..3 {
        for t in 0..3 {
            if s == t {
                continue;
            }
            let te = transfer_entropy(&seqs[s], &seqs[t], 1).unwrap();
            let floor = surrogate_floor(&seqs[s], &seqs[t], 1, 20, 8, (s * 3 + t) as u64).unwrap();
            if te > floor.mean + 5.0 * floor.std {
                edges.push((s, t));
            }
        }
    }
    assert_eq!(edges, vec![(0, 2)]);
}

/// Stationary covariance of dx = A x dt + σ dW: solves A Σ + Σ Aᵀ + σ² I = 0
/// through the Kronecker form (I ⊗ A + A ⊗ I) vec Σ = −σ² vec I.
fn lyapunov(a: &DMatrix<f64>, sigma: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, eye.iter().map(|v| -sigma * sigma * v));
    let vec_sigma = k.lu().solve(&rhs).unwrap();
    DMatrix::from_column_slice(n, n, vec_sigma.as_slice())
}

#[test]
fn ou_sample_covariance_matches_lyapunov_solution() {
    let a = vec![vec![-0.5, 0.2], vec![0.0, -0.3]];
    let sigma = 0.1;
    let cols = gen_ou(&a, sigma, 0.01, 1_000_000, 4, None).unwrap().columns;
    let n = cols[0].len() as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let cov = |i: usize, j: usize| {
        cols[i]
            .iter()
            .zip(&cols[j])
            .map(|(x, y)| (x - means[i]) * (y - means[j]))
            .sum::<f64>()
            / (n - 1.0)
    };
    let sample = DMatrix::from_fn(2, 2, |i, j| cov(i, j));
    let expected = lyapunov(&DMatrix::from_row_slice(2, 2, &[-0.5, 0.2, 0.0, -0.3]), sigma);
    let rel = (&sample - &expected).norm() / expected.norm();
    assert!(rel < 0.10, "sample {sample}, expected {expected}, relative error {rel}");
    for k in 0..2 {
        let d = (sample[(k, k)] - expected[(k, k)]).abs() / expected[(k, k)];
        assert!(d < 0.10, "variance {k}: relative error {d}");
    }
}
