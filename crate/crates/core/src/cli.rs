//! Command-line front end: `stats`, `analyze`, `evolve`, `simulate`, `fetch`.
//!
//! A run is fully described by a [`RunConfig`]. It comes from `--config`
//! (TOML, or any output file that embeds one), then flags override it. The
//! effective config is embedded in every file written, so passing an output
//! file back as `--config` repeats the run.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::discretize::BinStrategy;
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorParams};
use crate::ingest::{align, load_csv, write_csv, CsvSchema, PriceSeries, RemoteSource};
use crate::matrix::Measure;
use crate::netout::{matrix_to_graph, render, Format, Output, Provenance};
use crate::stats::{compute_returns, describe, ReturnKind, ReturnsMatrix};
use crate::synth::{to_price_series, ProcessSpec};
use crate::windows::{evolve, WindowSpec};

pub const CONFIG_VERSION: u32 = 1;

/// Edge thresholds for graph export, one per measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub correlation: f64,
    pub mutual_information: f64,
    pub transfer_entropy: f64,
    pub km_drift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            correlation: 0.1,
            mutual_information: 0.05,
            transfer_entropy: 0.01,
            km_drift: 0.01,
        }
    }
}

impl Thresholds {
    pub fn uniform(t: f64) -> Self {
        Self {
            correlation: t,
            mutual_information: t,
            transfer_entropy: t,
            km_drift: t,
        }
    }

    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Correlation => self.correlation,
            Measure::MutualInformation => self.mutual_information,
            Measure::TransferEntropy => self.transfer_entropy,
            Measure::KmDrift => self.km_drift,
        }
    }
}

/// Estimator settings stored in a config; the seed lives on [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub bins: usize,
    pub strategy: BinStrategy,
    pub dt: usize,
    pub step: f64,
    pub center: bool,
    pub ridge: f64,
    pub surrogates: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        let p = EstimatorParams::default();
        Self {
            bins: p.bins,
            strategy: p.strategy,
            dt: p.dt,
            step: p.step,
            center: p.center,
            ridge: p.ridge,
            surrogates: p.surrogates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    /// URL template with `{asset}`, `{start}`, `{end}` placeholders.
    pub endpoint: String,
    pub assets: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_start_price")]
    pub start_price: f64,
    pub process: ProcessSpec,
}

fn default_start_price() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// CSV files, or directories whose `*.csv` files are read in name order.
    pub inputs: Vec<PathBuf>,
    pub date_column: String,
    pub price_column: String,
    pub return_kind: ReturnKind,
    pub measures: Vec<Measure>,
    pub seed: u64,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub estimator: EstimatorConfig,
    pub windows: WindowSpec,
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let schema = CsvSchema::default();
        Self {
            version: CONFIG_VERSION,
            inputs: Vec::new(),
            date_column: schema.date_column,
            price_column: schema.price_column,
            return_kind: ReturnKind::Log,
            measures: Measure::ALL.to_vec(),
            seed: 0,
            out: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv, Format::Dot, Format::SvgHeatmap],
            generated_at: None,
            estimator: EstimatorConfig::default(),
            windows: WindowSpec::default(),
            thresholds: Thresholds::default(),
            remote: None,
            simulate: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Reads a TOML config, or recovers the config embedded in an output
    /// file (JSON `config` key, or a `# config:` / `// config:` line).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            return Self::from_toml(&text);
        }
        let embedded = match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(mut map)) => map.remove("config").unwrap_or(Value::Object(map)),
            _ => {
                let line = text
                    .lines()
                    .find_map(|l| l.strip_prefix("# config: ").or_else(|| l.strip_prefix("// config: ")))
                    .ok_or_else(|| Error::config("config", format!("{} embeds no config", path.display())))?;
                serde_json::from_str(line)?
            }
        };
        let cfg: RunConfig =
            serde_json::from_value(embedded).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config("version", format!("unsupported version {}", self.version)));
        }
        if self.measures.is_empty() {
            return Err(Error::config("measures", "at least one measure is required"));
        }
        if self.formats.is_empty() {
            return Err(Error::config("formats", "at least one format is required"));
        }
        if self.estimator.bins < 2 {
            return Err(Error::config("bins", "need at least 2 bins"));
        }
        if self.estimator.dt == 0 {
            return Err(Error::config("dt", "lag must be at least 1"));
        }
        if !(self.estimator.step > 0.0) {
            return Err(Error::config("step", "time per observation must be positive"));
        }
        if !(self.estimator.ridge >= 0.0) {
            return Err(Error::config("ridge", "must be non-negative"));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.correlation", t.correlation),
            ("thresholds.mutual_information", t.mutual_information),
            ("thresholds.transfer_entropy", t.transfer_entropy),
            ("thresholds.km_drift", t.km_drift),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(name, "must be non-negative"));
            }
        }
        if let Some(r) = &self.remote {
            if r.assets.is_empty() {
                return Err(Error::config("remote.assets", "no assets listed"));
            }
            if r.start > r.end {
                return Err(Error::config("remote.start", "start date after end date"));
            }
        }
        Ok(())
    }

    pub fn estimator_params(&self) -> EstimatorParams {
        let e = &self.estimator;
        EstimatorParams {
            bins: e.bins,
            strategy: e.strategy,
            dt: e.dt,
            step: e.step,
            center: e.center,
            ridge: e.ridge,
            surrogates: e.surrogates,
            seed: self.seed,
        }
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            date_column: self.date_column.clone(),
            price_column: self.price_column.clone(),
            ..CsvSchema::default()
        }
    }

    pub fn provenance(&self) -> Result<Provenance> {
        Ok(Provenance {
            generated_at: self.generated_at.clone(),
            config: Some(serde_json::to_value(self)?),
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "infonet", version, about = "Interaction networks for multi-asset price series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config, or an output file with an embedded config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated: json, csv, dot, svg_heatmap.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// quantile or equal_width.
    #[arg(long, global = true)]
    pub strategy: Option<BinStrategy>,
    /// log or simple.
    #[arg(long, global = true)]
    pub return_kind: Option<ReturnKind>,
    #[arg(long, global = true)]
    pub dt: Option<usize>,
    /// `K`, `segmented:K` or `sliding:LEN:STRIDE`.
    #[arg(long, global = true)]
    pub windows: Option<WindowSpec>,
    /// Edge threshold applied to every measure.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Comma-separated: corr, mi, te, km.
    #[arg(long, global = true, value_delimiter = ',')]
    pub measures: Option<Vec<Measure>>,
    #[arg(long, global = true)]
    pub surrogates: Option<usize>,
    /// Worker threads; does not affect results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub remote: RemoteArgs,
}

#[derive(Debug, Args)]
pub struct RemoteArgs {
    /// URL template with `{asset}`, `{start}`, `{end}`.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub assets: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub start: Option<NaiveDate>,
    #[arg(long, global = true)]
    pub end: Option<NaiveDate>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-asset descriptive statistics of returns.
    Stats(InputArgs),
    /// Full-sample interaction matrices, graphs and heatmaps.
    Analyze(InputArgs),
    /// Interaction matrices per time window.
    Evolve(InputArgs),
    /// Synthetic price panels with known couplings.
    Simulate(SimulateArgs),
    /// Download price series into CSV files.
    Fetch,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV files or directories.
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// coupled_binary, regime_shift, var1 or ou_euler.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub shift_at: Option<usize>,
    /// Rows separated by `;`, entries by `,`: `-0.5,0.2;0,-0.3`.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub dt_sim: Option<f64>,
    #[arg(long)]
    pub start_price: Option<f64>,
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config("matrix", format!("bad entry '{v}'")))
                })
                .collect()
        })
        .collect()
}

impl SimulateArgs {
    fn is_empty(&self) -> bool {
        self.kind.is_none()
            && self.epsilon.is_none()
            && self.steps.is_none()
            && self.shift_at.is_none()
            && self.matrix.is_none()
            && self.sigma.is_none()
            && self.dt_sim.is_none()
            && self.start_price.is_none()
    }

    fn to_config(&self, base: Option<SimulateConfig>, seed: u64) -> Result<SimulateConfig> {
        let start_price = self
            .start_price
            .or(base.as_ref().map(|b| b.start_price))
            .unwrap_or_else(default_start_price);
        let process = match (&self.kind, base) {
            (None, Some(b)) => {
                let mut p = b.process;
                self.override_process(&mut p)?;
                p
            }
            (None, None) => return Err(Error::config("simulate.process", "missing; pass --kind or a [simulate] section")),
            (Some(kind), _) => {
                let need = |v: Option<f64>, f: &str| v.ok_or_else(|| Error::config(f, format!("required for {kind}")));
                let steps = self.steps.ok_or_else(|| Error::config("steps", "required"))?;
                let matrix = || {
                    self.matrix
                        .as_deref()
                        .ok_or_else(|| Error::config("matrix", format!("required for {kind}")))
                        .and_then(parse_matrix)
                };
                match kind.replace('-', "_").as_str() {
                    "coupled_binary" => ProcessSpec::CoupledBinary {
                        epsilon: need(self.epsilon, "epsilon")?,
                        steps,
                        seed,
                    },
                    "regime_shift" => ProcessSpec::RegimeShift {
                        epsilon: need(self.epsilon, "epsilon")?,
                        steps,
                        shift_at: self.shift_at,
                        seed,
                    },
                    "var1" => ProcessSpec::Var1 {
                        matrix: matrix()?,
                        sigma: need(self.sigma, "sigma")?,
                        steps,
                        seed,
                    },
                    "ou_euler" | "ou" => ProcessSpec::OuEuler {
                        matrix: matrix()?,
                        sigma: need(self.sigma, "sigma")?,
                        dt_sim: need(self.dt_sim, "dt_sim")?,
                        steps,
                        seed,
                    },
                    other => return Err(Error::config("kind", format!("unknown process '{other}'"))),
                }
            }
        };
        Ok(SimulateConfig { start_price, process })
    }

    fn override_process(&self, p: &mut ProcessSpec) -> Result<()> {
        match p {
            ProcessSpec::CoupledBinary { epsilon, steps, .. } => {
                set(epsilon, self.epsilon);
                set(steps, self.steps);
            }
            ProcessSpec::RegimeShift {
                epsilon,
                steps,
                shift_at,
                ..
            } => {
                set(epsilon, self.epsilon);
                set(steps, self.steps);
                if self.shift_at.is_some() {
                    *shift_at = self.shift_at;
                }
            }
            ProcessSpec::Var1 {
                matrix, sigma, steps, ..
            } => {
                if let Some(m) = &self.matrix {
                    *matrix = parse_matrix(m)?;
                }
                set(sigma, self.sigma);
                set(steps, self.steps);
            }
            ProcessSpec::OuEuler {
                matrix,
                sigma,
                dt_sim,
                steps,
                ..
            } => {
                if let Some(m) = &self.matrix {
                    *matrix = parse_matrix(m)?;
                }
                set(sigma, self.sigma);
                set(dt_sim, self.dt_sim);
                set(steps, self.steps);
            }
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl GlobalArgs {
    /// Loads `--config` (or defaults) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.out, self.out.clone());
        set(&mut cfg.formats, self.format.clone());
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.estimator.bins, self.bins);
        set(&mut cfg.estimator.strategy, self.strategy);
        set(&mut cfg.return_kind, self.return_kind);
        set(&mut cfg.estimator.dt, self.dt);
        set(&mut cfg.estimator.surrogates, self.surrogates);
        set(&mut cfg.windows, self.windows);
        set(&mut cfg.measures, self.measures.clone());
        if let Some(t) = self.threshold {
            cfg.thresholds = Thresholds::uniform(t);
        }
        let r = &self.remote;
        if r.endpoint.is_some() || r.assets.is_some() || r.start.is_some() || r.end.is_some() {
            let base = cfg.remote.take();
            let field = |name: &str| Error::config(name, "required for remote input");
            cfg.remote = Some(RemoteConfig {
                endpoint: r
                    .endpoint
                    .clone()
                    .or(base.as_ref().map(|b| b.endpoint.clone()))
                    .ok_or_else(|| field("endpoint"))?,
                assets: r
                    .assets
                    .clone()
                    .or(base.as_ref().map(|b| b.assets.clone()))
                    .ok_or_else(|| field("assets"))?,
                start: r.start.or(base.as_ref().map(|b| b.start)).ok_or_else(|| field("start"))?,
                end: r.end.or(base.as_ref().map(|b| b.end)).ok_or_else(|| field("end"))?,
                cache_dir: r.cache_dir.clone().or(base.and_then(|b| b.cache_dir)),
            });
        } else if let (Some(dir), Some(remote)) = (&r.cache_dir, cfg.remote.as_mut()) {
            remote.cache_dir = Some(dir.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let go = || -> Result<()> {
        let mut cfg = cli.global.resolve()?;
        match &cli.command {
            Command::Stats(a) => {
                override_inputs(&mut cfg, a);
                cmd_stats(&cfg).map(print_paths)
            }
            Command::Analyze(a) => {
                override_inputs(&mut cfg, a);
                cmd_analyze(&cfg).map(print_paths)
            }
            Command::Evolve(a) => {
                override_inputs(&mut cfg, a);
                cmd_evolve(&cfg).map(print_paths)
            }
            Command::Simulate(a) => {
                if !a.is_empty() || cfg.simulate.is_none() {
                    cfg.simulate = Some(a.to_config(cfg.simulate.take(), cfg.seed)?);
                }
                if cli.global.seed.is_some() {
                    if let Some(s) = cfg.simulate.as_mut() {
                        s.process.set_seed(cfg.seed);
                    }
                }
                cmd_simulate(&cfg).map(print_paths)
            }
            Command::Fetch => cmd_fetch(&cfg).map(print_paths),
        }
    };
    match cli.global.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn override_inputs(cfg: &mut RunConfig, a: &InputArgs) {
    if !a.inputs.is_empty() {
        cfg.inputs = a.inputs.clone();
    }
}

fn print_paths(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

/// Expands directories into their `*.csv` files, sorted by name.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
                .collect();
            found.sort();
            files.extend(found);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            return Err(Error::config("inputs", format!("{} does not exist", path.display())));
        }
    }
    Ok(files)
}

/// Reads all configured series: remote assets if configured, else local files.
pub fn load_series(cfg: &RunConfig) -> Result<Vec<PriceSeries>> {
    let schema = cfg.schema();
    if cfg.inputs.is_empty() {
        if let Some(r) = &cfg.remote {
            let mut source = RemoteSource::new(r.endpoint.clone()).with_schema(schema);
            if let Some(dir) = &r.cache_dir {
                source = source.with_cache(dir.clone());
            }
            return r.assets.iter().map(|a| source.fetch(a, r.start, r.end)).collect();
        }
    }
    let files = collect_inputs(&cfg.inputs)?;
    if files.is_empty() {
        return Err(Error::config("inputs", "no input series"));
    }
    files.iter().map(|f| load_csv(f, &schema)).collect()
}

pub fn load_returns(cfg: &RunConfig) -> Result<ReturnsMatrix> {
    let series = load_series(cfg)?;
    let panel = align(&series)?;
    log::info!("{} assets, {} common dates", panel.n_assets(), panel.n_dates());
    compute_returns(&panel, cfg.return_kind)
}

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::config("out", format!("{}: {e}", cfg.out.display())))
}

/// Writes all files or none: on failure the ones already written are removed.
fn write_all(files: Vec<(PathBuf, String)>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(files.len());
    for (path, text) in files {
        if let Err(e) = fs::write(&path, text) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

fn wants(cfg: &RunConfig, f: Format) -> bool {
    cfg.formats.contains(&f)
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let returns = load_returns(cfg)?;
    let summary = describe(&returns)?;
    prepare_out(cfg)?;
    let prov = cfg.provenance()?;
    let mut files = Vec::new();
    for f in [Format::Json, Format::Csv] {
        if wants(cfg, f) {
            let path = cfg.out.join(format!("stats.{}", f.extension()));
            files.push((path, render(Output::Stats(&summary), f, &prov)?));
        }
    }
    write_all(files)
}

/// Runs every measure; a failing measure leaves no files and the first
/// failure is returned after the others have been written.
fn per_measure(
    cfg: &RunConfig,
    mut build: impl FnMut(Measure) -> Result<Vec<(PathBuf, String)>>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut first_err = None;
    for &measure in &cfg.measures {
        match build(measure).and_then(write_all) {
            Ok(paths) => written.extend(paths),
            Err(e) => {
                log::error!("{measure}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let returns = load_returns(cfg)?;
    prepare_out(cfg)?;
    let prov = cfg.provenance()?;
    let params = cfg.estimator_params();
    per_measure(cfg, |measure| {
        let m = estimate(&returns, measure, &params)?;
        let mut files = Vec::new();
        for f in [Format::Json, Format::Csv, Format::SvgHeatmap] {
            if wants(cfg, f) {
                let path = cfg.out.join(format!("{measure}.{}", f.extension()));
                files.push((path, render(Output::Matrix(&m), f, &prov)?));
            }
        }
        if wants(cfg, Format::Dot) {
            let g = matrix_to_graph(&m, cfg.thresholds.get(measure), false)?;
            let path = cfg.out.join(format!("{measure}.dot"));
            files.push((path, render(Output::Graph(&g), Format::Dot, &prov)?));
        }
        Ok(files)
    })
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let returns = load_returns(cfg)?;
    // window sizing problems are usage errors, reported before any estimation
    crate::windows::make_windows(returns.n_rows(), &cfg.windows)?;
    prepare_out(cfg)?;
    let prov = cfg.provenance()?;
    let params = cfg.estimator_params();
    per_measure(cfg, |measure| {
        let w = evolve(&returns, &cfg.windows, measure, &params)?;
        let mut files = Vec::new();
        for f in [Format::Json, Format::Csv, Format::SvgHeatmap] {
            if wants(cfg, f) {
                let path = cfg.out.join(format!("{measure}_evolution.{}", f.extension()));
                files.push((path, render(Output::Windowed(&w), f, &prov)?));
            }
        }
        Ok(files)
    })
}

fn series_csv(series: &PriceSeries, cfg: &RunConfig, prov: &Provenance) -> Result<String> {
    let mut buf = Vec::new();
    if let Some(c) = &prov.config {
        buf.extend_from_slice(format!("# config: {c}\n").as_bytes());
    }
    write_csv(series, &cfg.schema(), &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Writes one price CSV per generated asset, readable by the other commands.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::config("simulate", "no process specified"))?;
    if !(sim.start_price > 0.0 && sim.start_price.is_finite()) {
        return Err(Error::config("simulate.start_price", "must be positive"));
    }
    let returns = sim.process.generate()?;
    let series = to_price_series(&returns, sim.start_price)?;
    prepare_out(cfg)?;
    let prov = cfg.provenance()?;
    let files = series
        .iter()
        .map(|s| Ok((cfg.out.join(format!("{}.csv", s.asset_id)), series_csv(s, cfg, &prov)?)))
        .collect::<Result<Vec<_>>>()?;
    write_all(files)
}

/// Downloads every configured asset and writes normalized CSVs.
pub fn cmd_fetch(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    if cfg.remote.is_none() {
        return Err(Error::config("remote", "fetch needs --endpoint, --assets, --start and --end"));
    }
    let local = RunConfig {
        inputs: Vec::new(),
        ..cfg.clone()
    };
    let series = load_series(&local)?;
    prepare_out(cfg)?;
    let prov = cfg.provenance()?;
    let files = series
        .iter()
        .map(|s| Ok((cfg.out.join(format!("{}.csv", s.asset_id)), series_csv(s, cfg, &prov)?)))
        .collect::<Result<Vec<_>>>()?;
    write_all(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("infonet").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let cli = parse(&[
            "analyze",
            "--bins",
            "4",
            "--strategy",
            "equal_width",
            "--threshold",
            "0.2",
            "--measures",
            "corr,te",
            "--windows",
            "sliding:50:10",
            "--format",
            "json,csv",
        ]);
        let cfg = cli.global.resolve().unwrap();
        assert_eq!(cfg.estimator.bins, 4);
        assert_eq!(cfg.estimator.strategy, BinStrategy::EqualWidth);
        assert_eq!(cfg.thresholds, Thresholds::uniform(0.2));
        assert_eq!(cfg.measures, vec![Measure::Correlation, Measure::TransferEntropy]);
        assert_eq!(cfg.windows, WindowSpec::Sliding { length: 50, stride: 10 });
        assert_eq!(cfg.formats, vec![Format::Json, Format::Csv]);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.inputs = vec!["data".into()];
        cfg.simulate = Some(SimulateConfig {
            start_price: 50.0,
            process: ProcessSpec::Var1 {
                matrix: vec![vec![0.5, 0.0], vec![0.2, 0.5]],
                sigma: 1.0,
                steps: 100,
                seed: 3,
            },
        });
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn validation_names_field() {
        let err = RunConfig::from_toml("version = 1\nmeasures = []\n").unwrap_err();
        assert!(err.to_string().contains("measures"));
        assert_eq!(err.exit_code(), 2);
        let err = RunConfig::from_toml("version = 2\n").unwrap_err();
        assert!(err.to_string().contains("version"));
        assert!(RunConfig::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn matrix_flag() {
        assert_eq!(parse_matrix("-0.5,0.2; 0,-0.3").unwrap(), vec![vec![-0.5, 0.2], vec![0.0, -0.3]]);
        assert!(parse_matrix("1,x").is_err());
    }

    #[test]
    fn missing_process_is_a_usage_error() {
        let args = SimulateArgs {
            kind: Some("var1".into()),
            epsilon: None,
            steps: Some(10),
            shift_at: None,
            matrix: None,
            sigma: Some(1.0),
            dt_sim: None,
            start_price: None,
        };
        assert_eq!(args.to_config(None, 0).unwrap_err().exit_code(), 2);
    }
}
