//! Estimate a transfer-entropy network and write it in every supported format.

use infonet::netout::{emit, Output};
use infonet::synth::gen_var1;
use infonet::{estimate, matrix_to_graph, EstimatorParams, Format, Measure, Provenance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // x1 drives x2, x2 drives x3
    let a = vec![vec![0.3, 0.0, 0.0], vec![0.6, 0.3, 0.0], vec![0.0, 0.6, 0.3]];
    let returns = gen_var1(&a, 1.0, 20_000, 11, None)?;
    let te = estimate(&returns, Measure::TransferEntropy, &EstimatorParams::default())?;
    let graph = matrix_to_graph(&te, 0.02, false)?;

    for e in &graph.edges {
        println!("{} -> {}  {:.4} bits", e.from, e.to, e.weight);
    }

    let dir = std::env::temp_dir().join("infonet-network-export");
    std::fs::create_dir_all(&dir)?;
    let prov = Provenance::default();
    for format in [Format::Json, Format::Csv, Format::CsvLong, Format::SvgHeatmap] {
        let path = dir.join(format!("te.{}", format.extension()));
        emit(Output::Matrix(&te), format, &path, &prov)?;
        println!("wrote {}", path.display());
    }
    let path = dir.join("te.dot");
    emit(Output::Graph(&graph), Format::Dot, &path, &prov)?;
    println!("wrote {}", path.display());
    Ok(())
}
