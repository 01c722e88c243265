//! Command-line front end. `main.rs` only parses arguments and maps errors to
//! exit codes; every command here returns its JSON report so tests can drive
//! the pipeline without spawning processes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{analyze_state, min_pt_eigenvalue, witness_expectation, AnalysisReport, Estimate, PtEstimate};
use crate::bundled;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;
use crate::states::{noisy_smolin, NoiseLevel, PauliLabel, SourceModel};
use crate::tomography::counts::{witness_from_table_set, CountFile, CountTable, WitnessFromCounts};
use crate::tomography::measurement::{all_label_settings, simulate_counts, witness_settings};
use crate::tomography::mle::{mle_reconstruct, MeasurementModel, ReconstructionConfig};
use crate::tomography::montecarlo::{monte_carlo_multi, Histogram, McConfig, McSummary, Statistic, StatisticName};
use crate::unlocking::{prepared_state, simulate_unlocking_run, BellProjectionSpec};

#[derive(Debug, Parser)]
#[command(name = "boundent", version, about = "Bound entanglement and unlocking in noisy Smolin states")]
pub struct Cli {
    /// Run Monte-Carlo replicas on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the noisy Smolin density matrix.
    State(StateArgs),
    /// Simulate tomography counts for the twirled two-source state.
    Simulate(SimulateArgs),
    /// Certify a state file or reconstruct and certify a count file.
    Analyze(AnalyzeArgs),
    /// Simulate a Bell projection on two parties and analyze the other two.
    Unlock(UnlockArgs),
    /// Monte-Carlo error bars for statistics of a count file.
    Mc(McArgs),
    /// Regenerate the published curves, tables and data re-analyses.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mean number of counts per analyzer setting.
    #[arg(long, default_value_t = 2350.0)]
    pub counts: f64,
    /// Source model as a JSON file or inline JSON (defaults to ideal sources).
    #[arg(long)]
    pub source_model: Option<String>,
    /// Only the all-Z, all-X and all-Y settings.
    #[arg(long)]
    pub witness_only: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Density-matrix JSON or a count file (CSV or JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Also report the fidelity with the noisy Smolin state at this level.
    #[arg(long)]
    pub target_p: Option<f64>,
    /// Monte-Carlo iterations for error bars on reconstructed quantities.
    #[arg(long, default_value_t = 0)]
    pub mc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UnlockArgs {
    #[arg(long, default_value_t = 0.49)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mean number of counts per two-qubit analyzer setting.
    #[arg(long, default_value_t = 10_000.0)]
    pub counts: f64,
    #[arg(long)]
    pub source_model: Option<String>,
    /// Projected parties, as letters (`AC`) or indices (`0,2`).
    #[arg(long, default_value = "AC")]
    pub parties: String,
    /// Heralded Bell state: phi+, psi+, psi-, phi- or its index 0..3.
    #[arg(long, default_value = "phi-")]
    pub bell: String,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub mc: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Count file (CSV or JSON).
    #[arg(long)]
    pub counts: PathBuf,
    /// Statistics: witness, min_pt_eig, fidelity, tangle, trace.
    #[arg(long, value_delimiter = ',', default_value = "min_pt_eig")]
    pub statistic: Vec<String>,
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target level for the `fidelity` statistic.
    #[arg(long)]
    pub target_p: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mean counts per four-qubit analyzer setting in the simulated runs.
    #[arg(long, default_value_t = 2350.0)]
    pub counts: f64,
    /// Monte-Carlo iterations per simulated four-qubit point.
    #[arg(long, default_value_t = 100)]
    pub mc: usize,
    /// Monte-Carlo iterations for the bundled two-qubit unlocking data.
    #[arg(long, default_value_t = 500)]
    pub unlock_mc: usize,
    #[arg(long)]
    pub source_model: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Noise levels of the simulated experimental points.
pub const REPRODUCE_LEVELS: [f64; 6] = [0.0, 0.25, 0.44, 0.49, 0.75, 1.0];

pub fn run(cli: &Cli) -> Result<Value> {
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match &cli.command {
        Command::State(a) => cmd_state(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a, execution),
        Command::Unlock(a) => cmd_unlock(a, execution),
        Command::Mc(a) => cmd_mc(a, execution),
        Command::Reproduce(a) => cmd_reproduce(a, execution),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_counts_file(dir: &Path, stem: &str, format: Format, tables: &[CountTable]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => crate::tomography::counts::write_counts(&path, tables)?,
        Format::Json => write_json(
            &path,
            &CountFile {
                tables: tables.to_vec(),
                ..Default::default()
            },
        )?,
    }
    Ok(path)
}

/// Writes rows of numbers under `headers` as CSV or as a JSON array of objects.
fn write_table(dir: &Path, stem: &str, format: Format, headers: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(headers)?;
            for row in rows {
                w.write_record(row.iter().map(|x| x.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        headers
                            .iter()
                            .zip(row)
                            .map(|(h, x)| (h.to_string(), json!(x)))
                            .collect(),
                    )
                })
                .collect();
            write_json(&path, &records)?;
        }
    }
    Ok(path)
}

fn noise(p: f64) -> Result<NoiseLevel> {
    NoiseLevel::new(p)
}

/// Accepts a path or inline JSON holding one source model (used for both
/// sources), a two-element array, or `{"sources": [..]}`.
pub fn parse_source_models(arg: Option<&str>) -> Result<[SourceModel; 2]> {
    let Some(arg) = arg else {
        return Ok([SourceModel::ideal(), SourceModel::ideal()]);
    };
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg)?
    } else {
        arg.to_string()
    };
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("source model is neither a readable file nor valid JSON: {e}")))?;
    let models: [SourceModel; 2] = match value {
        Value::Object(ref map) if map.contains_key("sources") => serde_json::from_value(map["sources"].clone())?,
        Value::Array(_) => serde_json::from_value(value)?,
        other => {
            let one: SourceModel = serde_json::from_value(other)?;
            [one, one]
        }
    };
    for m in &models {
        m.validate()?;
    }
    Ok(models)
}

pub fn parse_parties(text: &str) -> Result<[usize; 2]> {
    let bad = || Error::InvalidInput(format!("cannot parse parties '{text}' (use e.g. AC or 0,2)"));
    let parsed: Vec<usize> = if text.contains(',') {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    } else {
        text.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'A' => Ok(0),
                'B' => Ok(1),
                'C' => Ok(2),
                'D' => Ok(3),
                _ => Err(bad()),
            })
            .collect::<Result<_>>()?
    };
    match parsed[..] {
        [a, b] => Ok([a, b]),
        _ => Err(bad()),
    }
}

pub fn parse_bell(text: &str) -> Result<PauliLabel> {
    match text {
        "phi+" | "0" => Ok(PauliLabel::I),
        "psi+" | "1" => Ok(PauliLabel::X),
        "psi-" | "2" => Ok(PauliLabel::Y),
        "phi-" | "3" => Ok(PauliLabel::Z),
        _ => Err(Error::InvalidInput(format!("unknown Bell state '{text}'"))),
    }
}

enum Input {
    State(DensityMatrix),
    Counts(Vec<CountTable>),
}

fn load_input(path: &Path) -> Result<Input> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        if value.get("re").is_some() {
            return DensityMatrix::from_json(&text).map(Input::State);
        }
    }
    crate::tomography::counts::read_counts(path).map(Input::Counts)
}

/// Reduced Monte-Carlo summary for reports (samples are written separately).
#[derive(Debug, Clone, Serialize)]
pub struct McDigest {
    pub statistic: String,
    pub iterations: usize,
    pub central: f64,
    pub mean: f64,
    pub std: f64,
    pub fraction_positive: f64,
    pub fraction_negative: f64,
    pub histogram: Histogram,
}

impl From<&McSummary> for McDigest {
    fn from(s: &McSummary) -> Self {
        let n = s.samples.len() as f64;
        Self {
            statistic: s.statistic.clone(),
            iterations: s.samples.len(),
            central: s.central,
            mean: s.mean,
            std: s.std,
            fraction_positive: s.samples.iter().filter(|&&x| x > 0.0).count() as f64 / n,
            fraction_negative: s.samples.iter().filter(|&&x| x < 0.0).count() as f64 / n,
            histogram: s.histogram.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionInfo {
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

/// Full analysis of a count set: direct witness (when the three Pauli
/// settings are present) and, for informationally complete data, the
/// reconstruction with optional Monte-Carlo errors.
#[derive(Debug, Clone, Serialize)]
pub struct CountAnalysis {
    pub report: AnalysisReport,
    pub witness_components: Option<WitnessFromCounts>,
    pub reconstruction: Option<ReconstructionInfo>,
    pub monte_carlo: Vec<McDigest>,
    #[serde(skip)]
    pub summaries: Vec<McSummary>,
    #[serde(skip)]
    pub state: Option<DensityMatrix>,
}

fn target_state(n_qubits: usize, target_p: Option<f64>) -> Result<Option<DensityMatrix>> {
    match target_p {
        None => Ok(None),
        Some(_) if n_qubits != 4 => Err(Error::Dimension(
            "the noisy Smolin target is a four-qubit state".into(),
        )),
        Some(p) => Ok(Some(noisy_smolin(noise(p)?))),
    }
}

fn statistics_for(n_qubits: usize, target: Option<&DensityMatrix>) -> Vec<Statistic> {
    let mut stats = Vec::new();
    if n_qubits == 4 {
        stats.push(Statistic::Witness);
    }
    if n_qubits == 2 {
        stats.push(Statistic::Tangle);
    }
    stats.push(Statistic::MinPtEig);
    if let Some(t) = target {
        stats.push(Statistic::FidelityWith(t.clone()));
    }
    stats
}

pub fn analyze_counts(
    tables: &[CountTable],
    target_p: Option<f64>,
    mc_iterations: usize,
    seed: u64,
    execution: Execution,
) -> Result<CountAnalysis> {
    let witness_components = witness_from_table_set(tables)?;
    let n_qubits = tables.first().map(|t| t.n_qubits()).unwrap_or(0);
    let target = target_state(n_qubits, target_p)?;
    match MeasurementModel::from_tables(tables) {
        Err(Error::NotInformationallyComplete { .. }) if witness_components.is_some() => {
            let w = witness_components.expect("checked above");
            Ok(CountAnalysis {
                report: AnalysisReport {
                    n_qubits,
                    witness_from_counts: Some(Estimate::with_uncertainty(w.value, w.sigma)),
                    ..Default::default()
                },
                witness_components,
                reconstruction: None,
                monte_carlo: Vec::new(),
                summaries: Vec::new(),
                state: None,
            })
        }
        Err(e) => Err(e),
        Ok(_) => {
            let rec = mle_reconstruct(tables, &ReconstructionConfig::default())?;
            let mut report = analyze_state(&rec.state, target.as_ref())?;
            report.witness_from_counts = witness_components.map(|w| Estimate::with_uncertainty(w.value, w.sigma));
            let mut summaries = Vec::new();
            if mc_iterations > 0 {
                let stats = statistics_for(n_qubits, target.as_ref());
                let cfg = McConfig {
                    iterations: mc_iterations,
                    seed,
                    execution,
                    ..Default::default()
                };
                summaries = monte_carlo_multi(tables, &stats, &cfg)?.summaries;
                attach_uncertainties(&mut report, &summaries);
            }
            Ok(CountAnalysis {
                report,
                witness_components,
                reconstruction: Some(ReconstructionInfo {
                    iterations: rec.iterations,
                    converged: rec.converged,
                    log_likelihood: rec.log_likelihood,
                }),
                monte_carlo: summaries.iter().map(McDigest::from).collect(),
                summaries,
                state: Some(rec.state),
            })
        }
    }
}

fn attach_uncertainties(report: &mut AnalysisReport, summaries: &[McSummary]) {
    for s in summaries {
        let set = |e: &mut Option<Estimate>| {
            if let Some(e) = e {
                e.uncertainty = Some(s.std);
            }
        };
        match s.statistic.as_str() {
            "witness" => set(&mut report.witness),
            "tangle" => set(&mut report.tangle),
            "fidelity" => set(&mut report.fidelity_with_target),
            "min_pt_eig" => {
                if let Some(PtEstimate { uncertainty, .. }) = &mut report.min_pt_eig {
                    *uncertainty = Some(s.std);
                }
            }
            _ => {}
        }
    }
}

fn write_samples(dir: &Path, stem: &str, format: Format, summaries: &[McSummary]) -> Result<Option<PathBuf>> {
    if summaries.is_empty() {
        return Ok(None);
    }
    let mut headers = vec!["iteration"];
    headers.extend(summaries.iter().map(|s| s.statistic.as_str()));
    let rows: Vec<Vec<f64>> = (0..summaries[0].samples.len())
        .map(|i| {
            let mut row = vec![i as f64];
            row.extend(summaries.iter().map(|s| s.samples[i]));
            row
        })
        .collect();
    write_table(dir, stem, format, &headers, &rows).map(Some)
}

pub fn cmd_state(args: &StateArgs) -> Result<Value> {
    let rho = noisy_smolin(noise(args.p)?);
    create_dir(&args.out)?;
    let path = args.out.join("state.json");
    rho.write_json(&path)?;
    Ok(json!({
        "p": args.p,
        "file": path,
        "witness": witness_expectation(&rho)?,
        "min_pt_eig": min_pt_eigenvalue(&rho)?.value,
    }))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Value> {
    let p = noise(args.p)?;
    let [s1, s2] = parse_source_models(args.source_model.as_deref())?;
    if !(args.counts.is_finite() && args.counts > 0.0) {
        return Err(Error::InvalidInput("--counts must be positive".into()));
    }
    let rho = prepared_state(p, (&s1, &s2))?;
    let settings = if args.witness_only {
        witness_settings(4).to_vec()
    } else {
        all_label_settings(4)
    };
    let mut rng = rng::seeded(args.seed);
    let tables = simulate_counts(&rho, &settings, args.counts, &mut rng)?;
    create_dir(&args.out)?;
    let path = write_counts_file(&args.out, "counts", args.format, &tables)?;
    Ok(json!({
        "p": args.p,
        "seed": args.seed,
        "settings": tables.len(),
        "total_counts": tables.iter().map(|t| t.total()).sum::<f64>(),
        "file": path,
        "model_witness": witness_expectation(&rho)?,
        "model_min_pt_eig": min_pt_eigenvalue(&rho)?.value,
    }))
}

pub fn cmd_analyze(args: &AnalyzeArgs, execution: Execution) -> Result<Value> {
    let value = match load_input(&args.input)? {
        Input::State(rho) => {
            let target = target_state(rho.n_qubits(), args.target_p)?;
            let report = analyze_state(&rho, target.as_ref())?;
            json!({ "input": "state", "report": report })
        }
        Input::Counts(tables) => {
            let analysis = analyze_counts(&tables, args.target_p, args.mc, args.seed, execution)?;
            if let Some(dir) = &args.out {
                create_dir(dir)?;
                if let Some(state) = &analysis.state {
                    state.write_json(&dir.join("reconstructed_state.json"))?;
                }
                write_samples(dir, "mc_samples", Format::Csv, &analysis.summaries)?;
            }
            json!({ "input": "counts", "analysis": analysis })
        }
    };
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_json(&dir.join("report.json"), &value)?;
    }
    Ok(value)
}

pub fn cmd_unlock(args: &UnlockArgs, execution: Execution) -> Result<Value> {
    let p = noise(args.p)?;
    let [s1, s2] = parse_source_models(args.source_model.as_deref())?;
    let spec = BellProjectionSpec {
        parties: parse_parties(&args.parties)?,
        bell: parse_bell(&args.bell)?,
        visibility: args.visibility,
        chi: args.chi,
    };
    spec.validate()?;
    let mut rng = rng::seeded(args.seed);
    let run = simulate_unlocking_run(p, (&s1, &s2), &spec, args.counts, &mut rng)?;
    let exact = analyze_state(&run.heralded.state, None)?;
    let analysis = analyze_counts(&run.tables, None, args.mc, args.seed, execution)?;
    let value = json!({
        "p": args.p,
        "spec": spec,
        "remaining_parties": spec.remaining(),
        "probability": run.heralded.probability,
        "heralded_state": exact,
        "analysis": analysis,
    });
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_counts_file(dir, "unlock_counts", args.format, &run.tables)?;
        write_samples(dir, "mc_samples", args.format, &analysis.summaries)?;
        write_json(&dir.join("report.json"), &value)?;
    }
    Ok(value)
}

pub fn cmd_mc(args: &McArgs, execution: Execution) -> Result<Value> {
    let tables = crate::tomography::counts::read_counts(&args.counts)?;
    let n_qubits = tables.first().map(|t| t.n_qubits()).unwrap_or(0);
    let target = match args.target_p {
        Some(p) => Some(noisy_smolin(noise(p)?)),
        None => None,
    };
    if target.as_ref().is_some_and(|t| t.n_qubits() != n_qubits) {
        return Err(Error::Dimension("the noisy Smolin target is a four-qubit state".into()));
    }
    let stats = args
        .statistic
        .iter()
        .map(|s| s.parse::<StatisticName>()?.with_target(target.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let cfg = McConfig {
        iterations: args.iterations,
        seed: args.seed,
        execution,
        ..Default::default()
    };
    let result = monte_carlo_multi(&tables, &stats, &cfg)?;
    let digests: Vec<McDigest> = result.summaries.iter().map(McDigest::from).collect();
    let value = json!({ "iterations": args.iterations, "seed": args.seed, "statistics": digests });
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_samples(dir, "mc_samples", args.format, &result.summaries)?;
        write_json(&dir.join("mc_summary.json"), &value)?;
    }
    Ok(value)
}

/// One simulated experimental point: reconstruction with MC errors plus the
/// witness estimated directly from the three Pauli settings.
#[derive(Debug, Clone, Serialize)]
pub struct SimulatedPoint {
    pub p: f64,
    pub model_witness: f64,
    pub model_min_pt_eig: f64,
    pub fidelity: Estimate,
    pub min_pt_eig: Estimate,
    pub witness_est: Estimate,
    pub witness_sum: Estimate,
    pub monte_carlo: Vec<McDigest>,
}

pub fn simulate_point(
    p: f64,
    sources: &[SourceModel; 2],
    counts_per_setting: f64,
    seed: u64,
    index: u64,
    mc_iterations: usize,
    execution: Execution,
) -> Result<SimulatedPoint> {
    let rho = prepared_state(noise(p)?, (&sources[0], &sources[1]))?;
    let mut rng = rng::stream(seed, index);
    let tables = simulate_counts(&rho, &all_label_settings(4), counts_per_setting, &mut rng)?;
    let analysis = analyze_counts(&tables, Some(p), mc_iterations, seed.wrapping_add(index + 1), execution)?;
    let r = &analysis.report;
    let pt = r.min_pt_eig.expect("four-qubit report has a PT entry");
    Ok(SimulatedPoint {
        p,
        model_witness: witness_expectation(&rho)?,
        model_min_pt_eig: min_pt_eigenvalue(&rho)?.value,
        fidelity: r.fidelity_with_target.expect("target given"),
        min_pt_eig: Estimate {
            value: pt.value,
            uncertainty: pt.uncertainty,
        },
        witness_est: r.witness.expect("four-qubit report has a witness"),
        witness_sum: r.witness_from_counts.expect("label settings include the Pauli settings"),
        monte_carlo: analysis.monte_carlo,
    })
}

fn err_or_nan(e: &Estimate) -> f64 {
    e.uncertainty.unwrap_or(f64::NAN)
}

pub fn cmd_reproduce(args: &ReproduceArgs, execution: Execution) -> Result<Value> {
    create_dir(&args.out)?;
    let fmt = args.format;
    let sources = match &args.source_model {
        Some(s) => parse_source_models(Some(s))?,
        None => bundled::measured_sources()?,
    };

    let grid: Vec<Vec<f64>> = (0..=100)
        .map(|k| {
            let p = k as f64 / 100.0;
            vec![p, 3.0 * p - 2.0, p / 16.0]
        })
        .collect();
    write_table(&args.out, "theory_curves", fmt, &["p", "witness", "min_pt_eig"], &grid)?;

    let points = REPRODUCE_LEVELS
        .iter()
        .enumerate()
        .map(|(k, &p)| simulate_point(p, &sources, args.counts, args.seed, k as u64, args.mc, execution))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|pt| {
            vec![
                pt.p,
                pt.fidelity.value,
                err_or_nan(&pt.fidelity),
                pt.min_pt_eig.value,
                err_or_nan(&pt.min_pt_eig),
                pt.witness_est.value,
                err_or_nan(&pt.witness_est),
                pt.witness_sum.value,
                err_or_nan(&pt.witness_sum),
                pt.model_witness,
                pt.model_min_pt_eig,
            ]
        })
        .collect();
    write_table(
        &args.out,
        "simulated_points",
        fmt,
        &[
            "p",
            "fidelity",
            "fidelity_err",
            "min_pt_eig",
            "min_pt_eig_err",
            "witness_est",
            "witness_est_err",
            "witness_sum",
            "witness_sum_err",
            "model_witness",
            "model_min_pt_eig",
        ],
        &rows,
    )?;

    let witness = witness_from_table_set(&bundled::witness_counts()?)?
        .ok_or_else(|| Error::Parse("bundled witness data lacks a Pauli setting".into()))?;
    write_json(&args.out.join("witness_data.json"), &witness)?;

    let unlocking = analyze_counts(&bundled::unlocking_counts()?, None, args.unlock_mc, args.seed, execution)?;
    write_json(&args.out.join("unlocking_data.json"), &unlocking)?;
    write_samples(&args.out, "unlocking_mc_samples", fmt, &unlocking.summaries)?;

    // measured witness-only point alongside the simulated rows
    let mut summary_rows = rows.iter().map(|r| r[..9].to_vec()).collect::<Vec<_>>();
    let nan = f64::NAN;
    summary_rows.push(vec![
        bundled::WITNESS_DATA_P,
        nan,
        nan,
        nan,
        nan,
        nan,
        nan,
        witness.value,
        witness.sigma,
    ]);
    write_table(
        &args.out,
        "summary",
        fmt,
        &[
            "p",
            "fidelity",
            "fidelity_err",
            "min_pt_eig",
            "min_pt_eig_err",
            "witness_est",
            "witness_est_err",
            "witness_sum",
            "witness_sum_err",
        ],
        &summary_rows,
    )?;

    let value = json!({
        "theory": { "witness_zero_crossing": 2.0 / 3.0, "grid_points": grid.len() },
        "simulated_points": points,
        "witness_data": witness,
        "unlocking_data": {
            "report": unlocking.report,
            "monte_carlo": unlocking.monte_carlo,
        },
    });
    write_json(&args.out.join("summary.json"), &value)?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn party_and_bell_parsing() {
        assert_eq!(parse_parties("AC").unwrap(), [0, 2]);
        assert_eq!(parse_parties("bd").unwrap(), [1, 3]);
        assert_eq!(parse_parties("0,3").unwrap(), [0, 3]);
        assert!(parse_parties("ACD").is_err());
        assert!(parse_parties("AX").is_err());
        assert_eq!(parse_bell("phi-").unwrap(), PauliLabel::Z);
        assert_eq!(parse_bell("1").unwrap(), PauliLabel::X);
        assert!(parse_bell("bell").is_err());
    }

    #[test]
    fn source_model_forms() {
        let ideal = parse_source_models(None).unwrap();
        assert_eq!(ideal[0], SourceModel::ideal());
        let one = parse_source_models(Some(r#"{"kind":"werner","fidelity":0.9}"#)).unwrap();
        assert_eq!(one[0], one[1]);
        let pair = parse_source_models(Some(bundled::SOURCES_JSON)).unwrap();
        assert_eq!(pair[1], SourceModel::measured_source_2());
        assert!(parse_source_models(Some(r#"{"kind":"werner","fidelity":1.5}"#)).is_err());
        assert!(parse_source_models(Some("not json")).is_err());
    }

    #[test]
    fn bundled_witness_counts_skip_reconstruction() {
        let a = analyze_counts(&bundled::witness_counts().unwrap(), None, 0, 0, Execution::Sequential).unwrap();
        assert!(a.reconstruction.is_none());
        let w = a.report.witness_from_counts.unwrap();
        assert!((w.value + 0.159).abs() < 5e-4);
    }
}
