//! Summary moments of simulated returns. Excess kurtosis is reported, so a
//! Gaussian column sits near zero.

use infonet::describe;
use infonet::stats::correlation_matrix;
use infonet::synth::gen_var1;

fn main() -> infonet::Result<()> {
    let a = vec![vec![0.2, 0.0, 0.0], vec![0.0, -0.1, 0.0], vec![0.3, 0.0, 0.0]];
    let returns = gen_var1(&a, 0.01, 5_000, 3, None)?;

    let summary = describe(&returns)?;
    println!("{:<6}{:>8}{:>12}{:>12}{:>10}{:>10}", "asset", "n", "mean", "std", "skew", "kurt");
    for s in &summary.assets {
        println!(
            "{:<6}{:>8}{:>12.6}{:>12.6}{:>10.4}{:>10.4}",
            s.asset_id, s.observations, s.mean, s.std, s.skewness, s.excess_kurtosis
        );
    }

    let corr = correlation_matrix(&returns)?;
    println!("\ncorr(x1, x3) = {:.3}", corr.get(0, 2));
    Ok(())
}
