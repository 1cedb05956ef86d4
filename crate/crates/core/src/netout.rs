//! Serialization of matrices, graphs and windowed results.
//!
//! Formats: versioned JSON (`schema_version: 1`), wide and long CSV, Graphviz
//! DOT and self-contained SVG 1.1 heatmaps. Rendering is pure string building
//! with fixed number formatting, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::matrix::{InteractionMatrix, Measure, Units};
use crate::stats::StatsSummary;
use crate::windows::{WindowSpec, WindowedResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Thresholded network view of an [`InteractionMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub directed: bool,
    pub threshold: f64,
    pub measure: Measure,
}

/// Keeps entries with `|value| ≥ threshold`. A directed entry `values[i][j]`
/// becomes the edge `j → i`; undirected pairs appear once, ordered by input
/// position. Self-loops only with `keep_self`.
pub fn matrix_to_graph(m: &InteractionMatrix, threshold: f64, keep_self: bool) -> Result<InteractionGraph> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} must be non-negative")));
    }
    let n = m.len();
    let mut edges = Vec::new();
    let mut push = |i: usize, j: usize, w: f64| {
        if w.abs() >= threshold {
            edges.push(Edge {
                from: m.asset_ids[j].clone(),
                to: m.asset_ids[i].clone(),
                weight: w,
            });
        }
    };
    if m.directed {
        for j in 0..n {
            for i in 0..n {
                if i != j || keep_self {
                    push(i, j, m.values[i][j]);
                }
            }
        }
    } else {
        for j in 0..n {
            for i in j..n {
                if i != j || keep_self {
                    push(i, j, m.values[i][j]);
                }
            }
        }
    }
    Ok(InteractionGraph {
        nodes: m.asset_ids.clone(),
        edges,
        directed: m.directed,
        threshold,
        measure: m.measure,
    })
}

/// Where an output came from: embedded in every rendered file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generated_at: Option<String>,
    pub config: Option<Value>,
}

impl Provenance {
    fn config_line(&self) -> Option<String> {
        self.config.as_ref().map(|c| c.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    /// Wide for matrices, long for windowed results, edge list for graphs.
    Csv,
    CsvLong,
    Dot,
    SvgHeatmap,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::CsvLong => "csv_long",
            Format::Dot => "dot",
            Format::SvgHeatmap => "svg_heatmap",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::CsvLong => "long.csv",
            Format::Dot => "dot",
            Format::SvgHeatmap => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "csv_long" | "long" => Ok(Format::CsvLong),
            "dot" => Ok(Format::Dot),
            "svg" | "svg_heatmap" => Ok(Format::SvgHeatmap),
            other => Err(Error::config("format", format!("unknown format '{other}'"))),
        }
    }
}

/// Anything [`render`] can write.
#[derive(Debug, Clone, Copy)]
pub enum Output<'a> {
    Matrix(&'a InteractionMatrix),
    Graph(&'a InteractionGraph),
    Windowed(&'a WindowedResult),
    Stats(&'a StatsSummary),
}

impl Output<'_> {
    fn shape(&self) -> &'static str {
        match self {
            Output::Matrix(_) => "matrix",
            Output::Graph(_) => "graph",
            Output::Windowed(_) => "windowed result",
            Output::Stats(_) => "stats summary",
        }
    }
}

pub fn render(item: Output<'_>, format: Format, prov: &Provenance) -> Result<String> {
    let unsupported = || Error::UnsupportedFormatForShape {
        format: format.as_str(),
        shape: item.shape(),
    };
    match (item, format) {
        (Output::Matrix(m), Format::Json) => matrix_to_json(m, prov),
        (Output::Matrix(m), Format::Csv) => Ok(matrix_to_csv(m, prov)),
        (Output::Matrix(m), Format::CsvLong) => Ok(matrix_to_long_csv(m, prov)),
        (Output::Matrix(m), Format::SvgHeatmap) => Ok(matrix_to_svg(m, prov)),
        (Output::Graph(g), Format::Dot) => Ok(graph_to_dot(g, prov)),
        (Output::Graph(g), Format::Json) => json_with(g, prov),
        (Output::Graph(g), Format::Csv) => Ok(graph_to_csv(g, prov)),
        (Output::Windowed(w), Format::Json) => windowed_to_json(w, prov),
        (Output::Windowed(w), Format::Csv | Format::CsvLong) => Ok(windowed_to_csv(w, prov)),
        (Output::Windowed(w), Format::SvgHeatmap) => Ok(windowed_to_svg(w, prov)),
        (Output::Stats(s), Format::Json) => json_with(s, prov),
        (Output::Stats(s), Format::Csv) => Ok(stats_to_csv(s, prov)),
        _ => Err(unsupported()),
    }
}

/// Renders and writes one file.
pub fn emit(item: Output<'_>, format: Format, path: impl AsRef<Path>, prov: &Provenance) -> Result<()> {
    let text = render(item, format, prov)?;
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json_with<T: Serialize>(item: &T, prov: &Provenance) -> Result<String> {
    let mut v = serde_json::to_value(item)?;
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
        map.insert("generated_at".into(), prov.generated_at.clone().into());
        if let Some(c) = &prov.config {
            map.insert("config".into(), c.clone());
        }
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// JSON document for one matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub schema_version: u32,
    pub measure: Measure,
    pub directed: bool,
    pub units: Units,
    pub params: Map<String, Value>,
    pub asset_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
}

pub fn matrix_to_json(m: &InteractionMatrix, prov: &Provenance) -> Result<String> {
    let doc = MatrixDocument {
        schema_version: SCHEMA_VERSION,
        measure: m.measure,
        directed: m.directed,
        units: m.units,
        params: m.params.clone(),
        asset_ids: m.asset_ids.clone(),
        values: m.values.clone(),
        generated_at: prov.generated_at.clone(),
        config: prov.config.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn matrix_from_json(text: &str) -> Result<InteractionMatrix> {
    let doc: MatrixDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidInput(format!("unsupported schema_version {}", doc.schema_version)));
    }
    let mut m = InteractionMatrix::new(doc.asset_ids, doc.values, doc.measure)?;
    m.params = doc.params;
    Ok(m)
}

fn csv_header(prov: &Provenance) -> String {
    match prov.config_line() {
        Some(line) => format!("# config: {line}\n"),
        None => String::new(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Wide CSV: header `asset,<ids…>`, then one row per asset (row = target).
pub fn matrix_to_csv(m: &InteractionMatrix, prov: &Provenance) -> String {
    let mut out = csv_header(prov);
    out.push_str("asset");
    for id in &m.asset_ids {
        out.push(',');
        out.push_str(&csv_field(id));
    }
    out.push('\n');
    for (id, row) in m.asset_ids.iter().zip(&m.values) {
        out.push_str(&csv_field(id));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Parses wide CSV written by [`matrix_to_csv`].
pub fn matrix_from_csv(text: &str, measure: Measure) -> Result<InteractionMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let ids: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad value '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    InteractionMatrix::new(ids, values, measure)
}

/// Long CSV `from_asset,to_asset,value` over all N² entries.
pub fn matrix_to_long_csv(m: &InteractionMatrix, prov: &Provenance) -> String {
    let mut out = csv_header(prov);
    out.push_str("from_asset,to_asset,value\n");
    for (i, row) in m.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{},{},{v}", csv_field(&m.asset_ids[j]), csv_field(&m.asset_ids[i]));
        }
    }
    out
}

fn graph_to_csv(g: &InteractionGraph, prov: &Provenance) -> String {
    let mut out = csv_header(prov);
    out.push_str("from,to,weight\n");
    for e in &g.edges {
        let _ = writeln!(out, "{},{},{}", csv_field(&e.from), csv_field(&e.to), e.weight);
    }
    out
}

fn stats_to_csv(s: &StatsSummary, prov: &Provenance) -> String {
    let mut out = csv_header(prov);
    out.push_str("asset,observations,mean,std,skewness,excess_kurtosis\n");
    for a in &s.assets {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&a.asset_id),
            a.observations,
            a.mean,
            a.std,
            a.skewness,
            a.excess_kurtosis
        );
    }
    out
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT with nodes in input order and `label` set to the weight (two decimals).
pub fn graph_to_dot(g: &InteractionGraph, prov: &Provenance) -> String {
    let mut out = String::new();
    if let Some(line) = prov.config_line() {
        let _ = writeln!(out, "// config: {line}");
    }
    let (kind, arrow) = if g.directed { ("digraph", "->") } else { ("graph", "--") };
    let _ = writeln!(out, "{kind} {{");
    for node in &g.nodes {
        let _ = writeln!(out, "  {};", dot_id(node));
    }
    for e in &g.edges {
        let _ = writeln!(
            out,
            "  {} {arrow} {} [label=\"{:.2}\"];",
            dot_id(&e.from),
            dot_id(&e.to),
            e.weight
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WindowEntry {
    index: usize,
    start_index: usize,
    end_index: usize,
    start_date: NaiveDate,
    end_date: NaiveDate,
    values: Vec<Vec<f64>>,
    params: Map<String, Value>,
}

/// JSON document for a windowed result.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct WindowedDocument {
    schema_version: u32,
    measure: Measure,
    directed: bool,
    units: Units,
    spec: WindowSpec,
    asset_ids: Vec<String>,
    windows: Vec<WindowEntry>,
    generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
}

pub fn windowed_to_json(w: &WindowedResult, prov: &Provenance) -> Result<String> {
    let first = &w.windows[0].matrix;
    let doc = WindowedDocument {
        schema_version: SCHEMA_VERSION,
        measure: w.measure,
        directed: first.directed,
        units: first.units,
        spec: w.spec,
        asset_ids: first.asset_ids.clone(),
        windows: w
            .windows
            .iter()
            .map(|win| WindowEntry {
                index: win.index,
                start_index: win.start_index,
                end_index: win.end_index,
                start_date: win.start_date,
                end_date: win.end_date,
                values: win.matrix.values.clone(),
                params: win.matrix.params.clone(),
            })
            .collect(),
        generated_at: prov.generated_at.clone(),
        config: prov.config.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn windowed_from_json(text: &str) -> Result<WindowedResult> {
    let doc: WindowedDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidInput(format!("unsupported schema_version {}", doc.schema_version)));
    }
    let windows = doc
        .windows
        .into_iter()
        .map(|e| {
            let mut matrix = InteractionMatrix::new(doc.asset_ids.clone(), e.values, doc.measure)?;
            matrix.params = e.params;
            Ok(crate::windows::Window {
                index: e.index,
                start_index: e.start_index,
                end_index: e.end_index,
                start_date: e.start_date,
                end_date: e.end_date,
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if windows.is_empty() {
        return Err(Error::InvalidInput("windowed result has no windows".into()));
    }
    Ok(WindowedResult {
        measure: doc.measure,
        spec: doc.spec,
        windows,
    })
}

/// Long CSV `window_start,window_end,from_asset,to_asset,value`, N² rows per window.
pub fn windowed_to_csv(w: &WindowedResult, prov: &Provenance) -> String {
    let mut out = csv_header(prov);
    out.push_str("window_start,window_end,from_asset,to_asset,value\n");
    for win in &w.windows {
        let ids = &win.matrix.asset_ids;
        for (i, row) in win.matrix.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{v}",
                    win.start_date,
                    win.end_date,
                    csv_field(&ids[j]),
                    csv_field(&ids[i])
                );
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LongRow {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub from_asset: String,
    pub to_asset: String,
    pub value: f64,
}

pub fn parse_windowed_csv(text: &str) -> Result<Vec<LongRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

// ---- SVG ----

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Escaping for element content, where quotes may stay literal.
fn xml_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy)]
struct ColorScale {
    lo: f64,
    hi: f64,
    diverging: bool,
}

const WHITE: [f64; 3] = [255.0, 255.0, 255.0];
const SEQ_HI: [f64; 3] = [8.0, 48.0, 107.0];
const DIV_LO: [f64; 3] = [33.0, 102.0, 172.0];
const DIV_HI: [f64; 3] = [178.0, 24.0, 43.0];
const DIAGONAL_FILL: &str = "#d9d9d9";

impl ColorScale {
    /// Diverging scales are symmetric around zero; sequential ones start at zero.
    fn for_values(values: &[f64], signed: bool) -> Self {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        if signed {
            let lim = finite.map(f64::abs).fold(0.0, f64::max);
            let lim = if lim > 0.0 { lim } else { 1.0 };
            ColorScale { lo: -lim, hi: lim, diverging: true }
        } else {
            let hi = finite.fold(0.0, f64::max);
            ColorScale { lo: 0.0, hi: if hi > 0.0 { hi } else { 1.0 }, diverging: false }
        }
    }

    fn color(&self, v: f64) -> String {
        if !v.is_finite() {
            return "#000000".into();
        }
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        let (from, to, s) = if self.diverging {
            if t < 0.5 {
                (DIV_LO, WHITE, t * 2.0)
            } else {
                (WHITE, DIV_HI, (t - 0.5) * 2.0)
            }
        } else {
            (WHITE, SEQ_HI, t)
        };
        let c: Vec<u8> = (0..3).map(|k| (from[k] + (to[k] - from[k]) * s).round() as u8).collect();
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }

    /// Light text on dark cells.
    fn text_color(&self, v: f64) -> &'static str {
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        let dark = if self.diverging { (t - 0.5).abs() > 0.35 } else { t > 0.6 };
        if dark {
            "#ffffff"
        } else {
            "#000000"
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn svg_open(out: &mut String, width: u32, height: u32, title: &str, prov: &Provenance) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, DejaVu Sans, sans-serif">"#
    );
    let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
    if prov.config.is_some() || prov.generated_at.is_some() {
        let meta = serde_json::json!({ "generated_at": prov.generated_at, "config": prov.config });
        let _ = writeln!(out, "<metadata>{}</metadata>", xml_text(&meta.to_string()));
    }
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        width / 2,
        xml_escape(title)
    );
}

/// Vertical legend bar at `(x, y)` of height `h`, plus data min/max annotation.
fn svg_legend(out: &mut String, scale: &ColorScale, x: u32, y: u32, h: u32, data_min: f64, data_max: f64) {
    let _ = writeln!(out, "<defs><linearGradient id=\"legend\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">");
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let v = scale.lo + (scale.hi - scale.lo) * t;
        let _ = writeln!(out, r#"<stop offset="{t:.1}" stop-color="{}"/>"#, scale.color(v));
    }
    let _ = writeln!(out, "</linearGradient></defs>");
    let _ = writeln!(
        out,
        r##"<rect x="{x}" y="{y}" width="16" height="{h}" fill="url(#legend)" stroke="#333333" stroke-width="0.5"/>"##
    );
    let lx = x + 22;
    let _ = writeln!(out, r#"<text x="{lx}" y="{}" font-size="11">{}</text>"#, y + 10, fmt_value(scale.hi));
    let _ = writeln!(out, r#"<text x="{lx}" y="{}" font-size="11">{}</text>"#, y + h, fmt_value(scale.lo));
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{}" font-size="11">min {} / max {}</text>"#,
        y + h + 20,
        fmt_value(data_min),
        fmt_value(data_max)
    );
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// N×N heatmap. Off-diagonal entries set the color scale; diagonal cells are
/// drawn grey with their value printed.
pub fn matrix_to_svg(m: &InteractionMatrix, prov: &Provenance) -> String {
    const CELL: u32 = 64;
    const LEFT: u32 = 130;
    const TOP: u32 = 110;
    let n = m.len() as u32;
    let scaled: Vec<f64> = if n > 1 {
        m.off_diagonal().map(|(_, _, v)| v).collect()
    } else {
        m.values.iter().flatten().copied().collect()
    };
    let scale = ColorScale::for_values(&scaled, m.measure.is_signed());
    let (dmin, dmax) = min_max(scaled.iter().copied());

    let width = LEFT + n * CELL + 200;
    let height = TOP + n * CELL + 50;
    let title = format!("{} ({})", m.measure, units_label(m.units));
    let mut out = String::new();
    svg_open(&mut out, width, height, &title, prov);
    if m.directed {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="44" font-size="11" text-anchor="middle">row: target, column: source</text>"#,
            width / 2
        );
    }

    for (j, id) in m.asset_ids.iter().enumerate() {
        let cx = LEFT + j as u32 * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{cx}" y="{}" font-size="12" text-anchor="start" transform="rotate(-45 {cx} {})">{}</text>"#,
            TOP - 8,
            TOP - 8,
            xml_escape(id)
        );
    }
    for (i, id) in m.asset_ids.iter().enumerate() {
        let y = TOP + i as u32 * CELL;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 8,
            y + CELL / 2 + 4,
            xml_escape(id)
        );
        for j in 0..m.len() {
            let v = m.values[i][j];
            let x = LEFT + j as u32 * CELL;
            let diag = i == j && n > 1;
            let fill = if diag { DIAGONAL_FILL.to_string() } else { scale.color(v) };
            let text = if diag { "#000000" } else { scale.text_color(v) };
            let _ = writeln!(
                out,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff"><title>{} → {}: {v}</title></rect>"##,
                xml_escape(&m.asset_ids[j]),
                xml_escape(&m.asset_ids[i]),
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" fill="{text}">{}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 4,
                fmt_value(v)
            );
        }
    }
    svg_legend(&mut out, &scale, LEFT + n * CELL + 24, TOP, n * CELL, dmin, dmax);
    out.push_str("</svg>\n");
    out
}

fn units_label(u: Units) -> &'static str {
    match u {
        Units::Bits => "bits",
        Units::Dimensionless => "dimensionless",
        Units::PerStep => "per unit time",
    }
}

/// Rows are asset pairs (ordered `from → to` for directed measures, unordered
/// otherwise), columns are windows in order.
pub fn windowed_to_svg(w: &WindowedResult, prov: &Provenance) -> String {
    const CW: u32 = 44;
    const CH: u32 = 24;
    const LEFT: u32 = 190;
    const TOP: u32 = 120;
    let ids = w.asset_ids();
    let n = ids.len();
    let directed = w.windows[0].matrix.directed;
    // (to, from) index pairs
    let pairs: Vec<(usize, usize)> = if n == 1 {
        vec![(0, 0)]
    } else if directed {
        (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j))).collect()
    } else {
        (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).collect()
    };
    let all: Vec<f64> = w
        .windows
        .iter()
        .flat_map(|win| pairs.iter().map(move |&(i, j)| win.matrix.values[i][j]))
        .collect();
    let scale = ColorScale::for_values(&all, w.measure.is_signed());
    let (dmin, dmax) = min_max(all.iter().copied());

    let cols = w.windows.len() as u32;
    let rows = pairs.len() as u32;
    let width = LEFT + cols * CW + 200;
    let height = TOP + rows * CH + 60;
    let title = format!("{} evolution ({})", w.measure, units_label(w.windows[0].matrix.units));
    let mut out = String::new();
    svg_open(&mut out, width, height, &title, prov);

    for (c, win) in w.windows.iter().enumerate() {
        let cx = LEFT + c as u32 * CW + CW / 2;
        let _ = writeln!(
            out,
            r#"<text x="{cx}" y="{}" font-size="10" text-anchor="start" transform="rotate(-60 {cx} {})">{}</text>"#,
            TOP - 6,
            TOP - 6,
            win.start_date
        );
    }
    let arrow = if directed { "→" } else { "—" };
    for (r, &(i, j)) in pairs.iter().enumerate() {
        let y = TOP + r as u32 * CH;
        let label = format!("{} {arrow} {}", ids[j], ids[i]);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 8,
            y + CH / 2 + 4,
            xml_escape(&label)
        );
        for (c, win) in w.windows.iter().enumerate() {
            let v = win.matrix.values[i][j];
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{y}" width="{CW}" height="{CH}" fill="{}" stroke="#ffffff"><title>{}: window {} ({} to {}): {v}</title></rect>"##,
                LEFT + c as u32 * CW,
                scale.color(v),
                xml_escape(&label),
                win.index,
                win.start_date,
                win.end_date,
            );
        }
    }
    svg_legend(&mut out, &scale, LEFT + cols * CW + 24, TOP, rows.max(4) * CH, dmin, dmax);
    out.push_str("</svg>\n");
    out
}
