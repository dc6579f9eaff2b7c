//! `recsim` command line: graph generation, simulation, ingestion,
//! analysis and validation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    analyze_forms, compare_lists, location_interestingness, shares_from_counts, FormVariable, TrendThresholds,
};
use crate::error::{Error, Result};
use crate::graph::{generate_graph, parse_graph, write_graph, GraphGenConfig, MemberId, SocialGraph};
use crate::pipeline::{default_receiver, parse_profiles, NetworkProfile, SimState};
use crate::samples::{export_simulated, form_file_name, read_forms, write_form, FormBundle, SampleForm};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PROFILE: &str = "facebook-like";
pub const HISTOGRAM_FORMAT_HEADER: &str = "# recsim-histogram v1";
pub const LOCATIONS_FORMAT_HEADER: &str = "# recsim-locations v1";

#[derive(Parser, Clone, Debug, PartialEq)]
#[command(name = "recsim", version, about = "Friend-recommendation list simulator and sample analysis")]
pub struct RunConfig {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Generate a synthetic social graph.
    GenGraph(GenGraphArgs),
    /// Run visits against a graph and write one form per visit.
    Simulate(SimulateArgs),
    /// Collect form files into a single JSON bundle.
    Ingest(IngestArgs),
    /// Histogram, trend and location reports for a form set.
    Analyze(AnalyzeArgs),
    /// Compare simulated forms with observed ones.
    Validate(ValidateArgs),
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct GenGraphArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub members: usize,
    #[arg(long, default_value_t = 12.0)]
    pub mean_degree: f64,
    /// Pareto shape of member activity; 0 wires uniformly.
    #[arg(long, default_value_t = 1.5)]
    pub activity_shape: f64,
    /// Probability that a new edge closes a triangle.
    #[arg(long, default_value_t = 0.0)]
    pub closure: f64,
    #[arg(long, default_value_t = 4.0)]
    pub interaction_rate: f64,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Output directory for form files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = DEFAULT_PROFILE)]
    pub profile: String,
    /// Profiles file searched before the built-in presets.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Profile override, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub visits: u64,
    /// Receiver member id; defaults to a well-connected member.
    #[arg(long)]
    pub receiver: Option<u32>,
    /// Run seeds seed..seed+N in parallel, each into `seed-<s>/`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub parallel_seeds: Option<u64>,
    /// Network name written into the forms; defaults to the profile name.
    #[arg(long)]
    pub network: Option<String>,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct IngestArgs {
    /// Form file or directory of form files.
    #[arg(long)]
    pub input: PathBuf,
    /// Bundle file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct AnalyzeArgs {
    /// Bundle, form file, or directory of form files.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for reports.
    #[arg(long)]
    pub out: PathBuf,
    /// Reference location counts or shares, `category,value` per line.
    #[arg(long, requires = "observed_locations")]
    pub reference_locations: Option<PathBuf>,
    /// Observed location counts or shares.
    #[arg(long, requires = "reference_locations")]
    pub observed_locations: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    pub ratio_threshold: f64,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct ValidateArgs {
    #[arg(long)]
    pub simulated: PathBuf,
    #[arg(long)]
    pub observed: PathBuf,
    /// Output directory for the similarity report.
    #[arg(long)]
    pub out: PathBuf,
    /// Treat both sets as this network, ignoring their own names.
    #[arg(long)]
    pub as_network: Option<String>,
}

/// An error tagged with the stage that produced it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: String,
    #[source]
    pub source: Error,
}

type StageResult<T> = std::result::Result<T, StageError>;

trait Stage<T> {
    fn stage(self, name: impl Into<String>) -> StageResult<T>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, name: impl Into<String>) -> StageResult<T> {
        self.map_err(|source| StageError { stage: name.into(), source })
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenGraph(_) => "gen-graph",
            Command::Simulate(_) => "simulate",
            Command::Ingest(_) => "ingest",
            Command::Analyze(_) => "analyze",
            Command::Validate(_) => "validate",
        }
    }
}

impl RunConfig {
    /// `key=value` lines describing this invocation.
    pub fn provenance(&self) -> Vec<String> {
        let mut lines = vec![
            format!("recsim {}", env!("CARGO_PKG_VERSION")),
            format!("command={}", self.command.name()),
            format!("seed={}", self.seed),
        ];
        let path = |p: &Path| p.display().to_string();
        match &self.command {
            Command::GenGraph(a) => {
                lines.push(format!("members={}", a.members));
                lines.push(format!("mean_degree={}", a.mean_degree));
                lines.push(format!("activity_shape={}", a.activity_shape));
                lines.push(format!("closure={}", a.closure));
                lines.push(format!("interaction_rate={}", a.interaction_rate));
            }
            Command::Simulate(a) => {
                lines.push(format!("graph={}", path(&a.graph)));
                lines.push(format!("profile_name={}", a.profile));
                if let Some(c) = &a.config {
                    lines.push(format!("config={}", path(c)));
                }
                for o in &a.overrides {
                    lines.push(format!("set {o}"));
                }
                lines.push(format!("visits={}", a.visits));
            }
            Command::Ingest(a) => lines.push(format!("input={}", path(&a.input))),
            Command::Analyze(a) => {
                lines.push(format!("input={}", path(&a.input)));
                if let (Some(r), Some(o)) = (&a.reference_locations, &a.observed_locations) {
                    lines.push(format!("reference_locations={}", path(r)));
                    lines.push(format!("observed_locations={}", path(o)));
                    lines.push(format!("ratio_threshold={}", a.ratio_threshold));
                }
            }
            Command::Validate(a) => {
                lines.push(format!("simulated={}", path(&a.simulated)));
                lines.push(format!("observed={}", path(&a.observed)));
                if let Some(n) = &a.as_network {
                    lines.push(format!("as_network={n}"));
                }
            }
        }
        lines
    }
}

/// What a run wrote.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
}

/// Executes one command. Inputs are only read; everything is written under
/// the configured output location.
pub fn run(config: &RunConfig) -> StageResult<RunSummary> {
    for line in config.provenance() {
        log::info!("effective config: {line}");
    }
    match &config.command {
        Command::GenGraph(a) => gen_graph(config, a),
        Command::Simulate(a) => simulate(config, a),
        Command::Ingest(a) => ingest(config, a),
        Command::Analyze(a) => analyze(config, a),
        Command::Validate(a) => validate(config, a),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    }
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn gen_graph(config: &RunConfig, a: &GenGraphArgs) -> StageResult<RunSummary> {
    let mut gen = GraphGenConfig::with_defaults(a.members, a.mean_degree, config.seed);
    gen.activity_shape = (a.activity_shape > 0.0).then_some(a.activity_shape);
    gen.triadic_closure = a.closure;
    gen.interaction_rate = a.interaction_rate;
    let graph = generate_graph(&gen).stage("gen-graph: generate")?;
    let text = write_graph(&graph, &config.provenance());
    let path = write_file(&a.out, &text).stage("gen-graph: write")?;
    log::info!("wrote {} members, {} edges to {}", graph.member_count(), graph.edge_count(), path.display());
    Ok(RunSummary { artifacts: vec![path] })
}

/// Looks `name` up in the profiles file, then among the presets, and
/// applies the overrides.
pub fn resolve_profile(name: &str, config_file: Option<&Path>, overrides: &[String]) -> Result<NetworkProfile> {
    let mut from_file = BTreeMap::new();
    if let Some(path) = config_file {
        from_file = parse_profiles(&read_text(path)?).map_err(|e| in_file(path, e))?;
    }
    let mut profile = from_file
        .remove(name)
        .or_else(|| NetworkProfile::preset(name))
        .ok_or_else(|| Error::Config(format!("unknown profile `{name}`")))?;
    profile.apply_overrides(overrides)?;
    profile.validate()?;
    Ok(profile)
}

fn simulate(config: &RunConfig, a: &SimulateArgs) -> StageResult<RunSummary> {
    let graph_text = read_text(&a.graph).stage("simulate: read graph")?;
    let graph = parse_graph(&graph_text).map_err(|e| in_file(&a.graph, e)).stage("simulate: parse graph")?;
    let profile = resolve_profile(&a.profile, a.config.as_deref(), &a.overrides).stage("simulate: profile")?;
    log::info!("effective profile: {}", profile.summary());
    let receiver = match a.receiver {
        Some(id) => MemberId(id),
        None => default_receiver(&graph)
            .ok_or_else(|| Error::validation("graph has no members"))
            .stage("simulate: receiver")?,
    };
    let network = a.network.clone().unwrap_or_else(|| profile.name.clone());
    let job = SimJob { graph: &graph, receiver, profile: &profile, network: &network, visits: a.visits };
    let base = config.provenance();
    let Some(n) = a.parallel_seeds else {
        return job.run(config.seed, &a.out, &base).map(|artifacts| RunSummary { artifacts });
    };
    let seeds: Vec<u64> = (0..n).map(|i| config.seed.wrapping_add(i)).collect();
    let results: Vec<StageResult<Vec<PathBuf>>> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let (job, base) = (&job, &base);
                let dir = a.out.join(format!("seed-{seed}"));
                s.spawn(move || {
                    let mut prov = base.clone();
                    prov[2] = format!("seed={seed}");
                    job.run(seed, &dir, &prov)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let mut artifacts = Vec::new();
    for r in results {
        artifacts.extend(r?);
    }
    Ok(RunSummary { artifacts })
}

struct SimJob<'a> {
    graph: &'a SocialGraph,
    receiver: MemberId,
    profile: &'a NetworkProfile,
    network: &'a str,
    visits: u64,
}

impl SimJob<'_> {
    fn run(&self, seed: u64, dir: &Path, provenance: &[String]) -> StageResult<Vec<PathBuf>> {
        let mut state = SimState::new(self.graph.clone(), self.receiver, self.profile.clone(), seed)
            .stage("simulate: initialise")?;
        let mut header = provenance.to_vec();
        header.push(format!("receiver={}", self.receiver));
        header.push(format!("profile {}", self.profile.summary()));
        let mut written = Vec::new();
        for v in 0..self.visits {
            let stage = format!("simulate: visit {v} (seed {seed})");
            let list = state.next_visit().stage(stage.clone())?;
            let mut form = export_simulated(&list, state.graph(), self.network).stage(stage.clone())?;
            form.metadata = header.clone();
            form.metadata.push(format!("visit={v}"));
            let text = write_form(&form).stage(stage.clone())?;
            written.push(write_file(&dir.join(form_file_name(&form)), &text).stage(stage)?);
        }
        log::info!("seed {seed}: wrote {} forms to {}", written.len(), dir.display());
        Ok(written)
    }
}

fn load_forms(path: &Path, stage: &str) -> StageResult<Vec<SampleForm>> {
    let forms = read_forms(path).stage(stage)?;
    if forms.is_empty() {
        return Err(StageError {
            stage: stage.to_string(),
            source: Error::validation(format!("{}: no forms found", path.display())),
        });
    }
    Ok(forms)
}

fn ingest(config: &RunConfig, a: &IngestArgs) -> StageResult<RunSummary> {
    let forms = load_forms(&a.input, "ingest: read forms")?;
    let mut prov = config.provenance();
    prov.push(format!("forms={}", forms.len()));
    let bundle = FormBundle::new(prov, forms);
    let path = write_file(&a.out, &bundle.to_json()).stage("ingest: write bundle")?;
    Ok(RunSummary { artifacts: vec![path] })
}

/// Reads `category,value` lines. Blank lines and `#` lines are skipped, as
/// is a first line whose value is not a number.
pub fn parse_location_table(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut table = BTreeMap::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .rsplit_once(',')
            .ok_or_else(|| Error::parse(i + 1, format!("expected `category,value`, found `{line}`")))?;
        let value = match v.trim().parse::<f64>() {
            Ok(x) => x,
            Err(_) if !seen_data => {
                seen_data = true;
                continue;
            }
            Err(_) => return Err(Error::parse(i + 1, format!("`{}` is not a number", v.trim()))),
        };
        seen_data = true;
        let key = k.trim().to_string();
        if table.insert(key.clone(), value).is_some() {
            return Err(Error::parse(i + 1, format!("duplicate category `{key}`")));
        }
    }
    Ok(table)
}

fn location_shares(path: &Path) -> Result<BTreeMap<String, f64>> {
    let table = parse_location_table(&read_text(path)?).map_err(|e| in_file(path, e))?;
    shares_from_counts(&table).map_err(|e| match e {
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn analyze(config: &RunConfig, a: &AnalyzeArgs) -> StageResult<RunSummary> {
    let forms = load_forms(&a.input, "analyze: read forms")?;
    let prov = config.provenance();
    let header = comment_block(&prov);
    let mut report = analyze_forms(&forms, &TrendThresholds::default()).stage("analyze: classify")?;
    report.provenance = prov.clone();
    let out = |name: &str| a.out.join(name);
    let mut artifacts = vec![
        write_file(&out("report.txt"), &format!("# recsim-report v1\n{header}{}", report.to_text()))
            .stage("analyze: write report")?,
        write_file(&out("report.json"), &report.to_json()).stage("analyze: write report")?,
    ];
    for v in FormVariable::ALL {
        let csv = format!("{HISTOGRAM_FORMAT_HEADER}\n{header}{}", report.variable(v).histogram.to_csv());
        artifacts.push(write_file(&out(&format!("histogram-{}.csv", v.as_str())), &csv).stage("analyze: write histogram")?);
    }
    if let (Some(r), Some(o)) = (&a.reference_locations, &a.observed_locations) {
        let reference = location_shares(r).stage("analyze: reference locations")?;
        let observed = location_shares(o).stage("analyze: observed locations")?;
        let cmp = location_interestingness(&reference, &observed, a.ratio_threshold).stage("analyze: locations")?;
        let text = format!("{LOCATIONS_FORMAT_HEADER}\n{header}{}", cmp.to_text());
        artifacts.push(write_file(&out("locations.txt"), &text).stage("analyze: write locations")?);
    }
    Ok(RunSummary { artifacts })
}

fn validate(config: &RunConfig, a: &ValidateArgs) -> StageResult<RunSummary> {
    let mut simulated = load_forms(&a.simulated, "validate: read simulated forms")?;
    let mut observed = load_forms(&a.observed, "validate: read observed forms")?;
    if let Some(name) = &a.as_network {
        for f in simulated.iter_mut().chain(observed.iter_mut()) {
            f.network_name = name.clone();
        }
    }
    let mut report = compare_lists(&simulated, &observed).stage("validate: compare")?;
    let prov = config.provenance();
    report.provenance = prov.clone();
    let text = format!("# recsim-similarity v1\n{}{}", comment_block(&prov), report.to_text());
    let artifacts = vec![
        write_file(&a.out.join("similarity.txt"), &text).stage("validate: write report")?,
        write_file(&a.out.join("similarity.json"), &report.to_json()).stage("validate: write report")?,
    ];
    Ok(RunSummary { artifacts })
}
