//! Load two daily price files, keep the dates they share and turn them into
//! log returns.
//!
//! ```text
//! cargo run --example load_align
//! ```

use std::path::Path;

use infonet::{align, compute_returns, load_csv, CsvSchema, ReturnKind};

fn main() -> infonet::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_assets");
    let schema = CsvSchema::default();

    let series = vec![load_csv(dir.join("AAA.csv"), &schema)?, load_csv(dir.join("BBB.csv"), &schema)?];
    for s in &series {
        println!("{:>4}: {} closes, {} to {}", s.asset_id, s.len(), s.first_date(), s.last_date());
    }

    let panel = align(&series)?;
    println!("aligned: {} common dates", panel.n_dates());

    let returns = compute_returns(&panel, ReturnKind::Log)?;
    println!("{} log returns per asset", returns.n_rows());
    for t in 0..3 {
        println!("  {}  {:+.5}  {:+.5}", returns.dates[t], returns.column(0)[t], returns.column(1)[t]);
    }
    Ok(())
}
