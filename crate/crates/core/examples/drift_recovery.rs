//! Recover the drift matrix of an Ornstein–Uhlenbeck process from a sampled
//! path.

use infonet::kmdrift::{estimate_drift, DriftParams};
use infonet::synth::gen_ou;

fn main() -> infonet::Result<()> {
    let a = vec![vec![-0.5, 0.2], vec![0.0, -0.3]];
    let dt = 0.01;
    let path = gen_ou(&a, 0.1, dt, 1_000_000, 42, None)?;

    let params = DriftParams {
        step: dt,
        ..DriftParams::default()
    };
    let est = estimate_drift(&path, &params)?;

    println!("true        estimated");
    for i in 0..2 {
        println!(
            "{:+.2} {:+.2}   {:+.4} {:+.4}",
            a[i][0], a[i][1], est.drift[i][0], est.drift[i][1]
        );
    }
    println!("condition number {:.1}", est.cond);
    Ok(())
}
