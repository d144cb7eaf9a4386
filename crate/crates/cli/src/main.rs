use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use orcid_reconcile::ingest::{parse_crossref_assertions, write_ndjson, Dataset};
use orcid_reconcile::output::{self, OutputDir};
use orcid_reconcile::pipeline::{self, InputConfig, PipelineConfig, PipelineError};
use orcid_reconcile::synthworld::{generate_world, score_repair, GroundTruth, SynthConfig};

const REPAIRED_ASSERTIONS: &str = "repaired_assertions.ndjson";

#[derive(Parser)]
#[command(name = "orcid-reconcile", version, about = "Reconcile, repair and summarise ORCID assertions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the inputs, writing rejects.csv.
    IngestCheck(StageArgs),
    /// Link authors and estimate the shuffle rate.
    Diagnose(StageArgs),
    /// Resolve suspect assertions and write the repaired assertion set.
    Repair(StageArgs),
    /// Compute the metric tables.
    Metrics {
        #[command(flatten)]
        stage: StageArgs,
        /// Repaired assertions from an earlier `repair`; repairs afresh when absent.
        #[arg(long)]
        repaired: Option<PathBuf>,
    },
    /// Generate a synthetic world with ground truth.
    Synth(SynthArgs),
    /// Score a repair report against synthetic ground truth.
    Score {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Full pipeline.
    Run(StageArgs),
}

#[derive(Args, Clone, Default)]
struct StageArgs {
    /// TOML configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the four NDJSON inputs.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generate a synthetic world with this seed and use it as input.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    keep_threshold: Option<f64>,
    #[arg(long)]
    reassign_threshold: Option<f64>,
    /// Cohort window as START:END.
    #[arg(long, value_parser = parse_window)]
    window: Option<(i32, i32)>,
    #[arg(long)]
    min_history: Option<u32>,
    #[arg(long)]
    min_papers: Option<u32>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    linked_authors: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    researchers: Option<usize>,
    #[arg(long)]
    papers: Option<usize>,
    #[arg(long)]
    publishers: Option<usize>,
    #[arg(long)]
    first_year: Option<i32>,
    #[arg(long)]
    last_year: Option<i32>,
    #[arg(long)]
    ownership_rate: Option<f64>,
    #[arg(long)]
    assertion_rate: Option<f64>,
    #[arg(long)]
    shuffle_rate: Option<f64>,
    #[arg(long)]
    sync_probability: Option<f64>,
    #[arg(long)]
    registry_coverage: Option<f64>,
    #[arg(long)]
    married_name_rate: Option<f64>,
    #[arg(long)]
    short_name_rate: Option<f64>,
    #[arg(long)]
    transliteration_rate: Option<f64>,
    #[arg(long)]
    max_coauthor_name_ratio: Option<f64>,
    #[arg(long)]
    confusable_rate: Option<f64>,
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:END, got {s:?}"))?;
    let year = |v: &str| v.trim().parse::<i32>().map_err(|e| format!("bad year {v:?}: {e}"));
    Ok((year(a)?, year(b)?))
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    PipelineError::Config(msg.into()).into()
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

impl StageArgs {
    fn pipeline_config(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg: PipelineConfig = match &self.config {
            Some(p) => read_toml(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(dir) = &self.input {
            cfg.inputs = InputConfig::in_dir(dir);
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.synth.get_or_insert_with(SynthConfig::default).seed = seed;
        }
        if let Some(v) = self.keep_threshold {
            cfg.quality.keep_threshold = v;
        }
        if let Some(v) = self.reassign_threshold {
            cfg.quality.reassign_threshold = v;
        }
        if let Some((start, end)) = self.window {
            cfg.metrics.cohort.window_start = start;
            cfg.metrics.cohort.window_end = end;
        }
        if let Some(v) = self.min_history {
            cfg.metrics.cohort.min_history_years = v;
        }
        if let Some(v) = self.min_papers {
            cfg.metrics.cohort.min_papers = v;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.emit_linked_authors |= self.linked_authors;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SynthArgs {
    fn synth_config(&self) -> anyhow::Result<SynthConfig> {
        let mut c: SynthConfig = match &self.config {
            Some(p) => read_toml(p)?,
            None => SynthConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { c.$($field).+ = v; })*
            };
        }
        set!(
            seed => seed,
            researchers => n_researchers,
            papers => n_papers,
            publishers => n_publishers,
            first_year => first_year,
            last_year => last_year,
            ownership_rate => orcid_ownership_rate,
            assertion_rate => assertion_rate,
            shuffle_rate => shuffle_rate,
            sync_probability => sync_probability,
            registry_coverage => registry_coverage,
            married_name_rate => name_perturbation.married_name,
            short_name_rate => name_perturbation.short_name,
            transliteration_rate => name_perturbation.transliteration,
            confusable_rate => confusable_rate,
        );
        if self.max_coauthor_name_ratio.is_some() {
            c.max_coauthor_name_ratio = self.max_coauthor_name_ratio;
        }
        c.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(c)
    }
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size worker pool: {e}");
        }
    }
}

/// Input dataset for a stage command. A synth section (or `--seed`)
/// generates the world under `<out>/synth` first.
fn stage_input(cfg: &PipelineConfig) -> anyhow::Result<(Dataset, Option<PathBuf>)> {
    let mut inputs = cfg.inputs.clone();
    if let Some(s) = &cfg.synth {
        let world = generate_world(s).map_err(|e| config_error(format!("synth: {e}")))?;
        let dir = cfg.out_dir.join("synth");
        world.write(&dir).map_err(PipelineError::Output)?;
        inputs = InputConfig::in_dir(&dir);
    }
    let (paths, bands) = inputs.resolve()?;
    Ok((pipeline::load(&paths)?, bands))
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    lines_read: usize,
    accepted: usize,
    rejected: usize,
    publications: usize,
    assertions: usize,
    profiles: usize,
    researchers: usize,
}

fn ingest_check(args: &StageArgs) -> anyhow::Result<()> {
    let cfg = args.pipeline_config()?;
    init_workers(cfg.workers);
    let (ds, _) = stage_input(&cfg)?;
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.rejects(&ds.rejects)?;
    print_json(&IngestSummary {
        lines_read: ds.lines_read,
        accepted: ds.accepted(),
        rejected: ds.rejects.len(),
        publications: ds.publications.len(),
        assertions: ds.assertions.len(),
        profiles: ds.profiles.len(),
        researchers: ds.researchers.len(),
    })
}

#[derive(Serialize)]
struct DiagnoseSummary {
    linked_authors: usize,
    ambiguous_authors: usize,
    orphan_assertions: usize,
    estimated_shuffle_rate: f64,
}

fn diagnose(args: &StageArgs) -> anyhow::Result<()> {
    let cfg = args.pipeline_config()?;
    init_workers(cfg.workers);
    let (mut ds, _) = stage_input(&cfg)?;
    let diag = pipeline::diagnose(&mut ds);
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.rejects(&ds.rejects)?;
    out.shuffle_rate(&diag.shuffle_rate)?;
    if cfg.emit_linked_authors {
        out.linked_authors(&diag.linkage.authors)?;
    }
    print_json(&DiagnoseSummary {
        linked_authors: diag.linkage.linked,
        ambiguous_authors: diag.linkage.ambiguous,
        orphan_assertions: diag.orphan_assertions,
        estimated_shuffle_rate: diag.shuffle_rate.overall(),
    })
}

fn repair(args: &StageArgs) -> anyhow::Result<()> {
    let cfg = args.pipeline_config()?;
    init_workers(cfg.workers);
    let (mut ds, _) = stage_input(&cfg)?;
    let diag = pipeline::diagnose(&mut ds);
    let run = pipeline::repair(&ds, &diag, &cfg.quality);
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.repair_report(&run.repaired.outcomes)?;
    let path = cfg.out_dir.join(REPAIRED_ASSERTIONS);
    output::atomic_write(&path, |w| write_ndjson(&run.repaired.assertions, w))?;
    print_json(&run.repaired.stats)
}

fn metrics(args: &StageArgs, repaired: Option<&Path>) -> anyhow::Result<()> {
    let cfg = args.pipeline_config()?;
    init_workers(cfg.workers);
    let (mut ds, band_path) = stage_input(&cfg)?;
    let bands = pipeline::load_bands(band_path.as_deref())?;
    let diag = pipeline::diagnose(&mut ds);
    let assertions = match repaired {
        Some(p) => {
            let file = File::open(p)
                .map_err(|e| PipelineError::InputFile(format!("cannot open {}: {e}", p.display())))?;
            let parsed = parse_crossref_assertions(BufReader::new(file))?;
            if !parsed.rejects.is_empty() {
                log::warn!("{} malformed lines in {}", parsed.rejects.len(), p.display());
            }
            parsed.records
        }
        None => pipeline::repair(&ds, &diag, &cfg.quality).repaired.assertions,
    };
    let table = pipeline::unify(&ds, &diag.linkage, &assertions);
    let report = pipeline::metrics(&ds, &table, &assertions, &bands, &cfg.metrics);
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.metrics(&report)?;
    log::info!("metrics: cohort of {} researchers", report.cohort_size);
    Ok(())
}

fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let cfg = args.synth_config()?;
    let world = generate_world(&cfg).map_err(|e| config_error(e.to_string()))?;
    let files = world.write(&args.out).map_err(PipelineError::Output)?;
    let config_path = args.out.join("synth_config.toml");
    let text = toml::to_string_pretty(&cfg).context("serialising synth config")?;
    output::atomic_write(&config_path, |w| w.write_all(text.as_bytes()))?;
    log::info!(
        "synth: {} publications, {} assertions, {} injected shuffles, truth at {}",
        world.publications.len(),
        world.assertions.len(),
        world.truth.shuffles.len(),
        files.truth.display()
    );
    Ok(())
}

fn score(truth: &Path, report: &Path) -> anyhow::Result<()> {
    let file = File::open(truth).map_err(|e| PipelineError::InputFile(format!("cannot open {}: {e}", truth.display())))?;
    let truth = GroundTruth::read_ndjson(BufReader::new(file))
        .map_err(|e| PipelineError::InputFile(format!("bad truth file: {e}")))?;
    let entries = output::read_repair_report(report).map_err(|e| PipelineError::InputFile(e.to_string()))?;
    print_json(&score_repair(&truth, &entries))
}

fn run(args: &StageArgs) -> anyhow::Result<()> {
    let cfg = args.pipeline_config()?;
    init_workers(cfg.workers);
    let summary = pipeline::run_pipeline(&cfg)?;
    print_json(&summary)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<PipelineError>().map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::IngestCheck(a) => ingest_check(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Repair(a) => repair(a),
        Command::Metrics { stage, repaired } => metrics(stage, repaired.as_deref()),
        Command::Synth(a) => synth(a),
        Command::Score { truth, report } => score(truth, report),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
