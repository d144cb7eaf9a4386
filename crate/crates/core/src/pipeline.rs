//! End-to-end run: ingest, linkage, diagnosis, repair, union, metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ingest::{CrossrefAssertion, Dataset, IngestError, InputPaths};
use crate::linkage::{
    build_assertion_table, link_crossref_authors, link_orcid_works, retain_linkable, AssertionTable, Linkage,
};
use crate::metrics::{compute_metrics, MetricsContext, MetricsOptions, MetricsReport};
use crate::output::{self, OutputDir};
use crate::quality::{estimate_shuffle_rate, repair_crossref, RepairConfig, RepairRun, RepairStats, ShuffleRateSeries};
use crate::synthworld::{generate_world, SynthConfig};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Input(#[from] IngestError),
    #[error("{0}")]
    InputFile(String),
    #[error("failed to write output: {0}")]
    Output(#[from] std::io::Error),
}

impl PipelineError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Input locations. A file left unset is looked up under `dir` by its
/// conventional name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub dir: Option<PathBuf>,
    pub publications: Option<PathBuf>,
    pub crossref_assertions: Option<PathBuf>,
    pub orcid_profiles: Option<PathBuf>,
    pub researchers: Option<PathBuf>,
    /// `{country, band}` CSV; income band rollup is empty without it.
    pub income_bands: Option<PathBuf>,
}

impl InputConfig {
    pub fn in_dir(dir: &Path) -> Self {
        InputConfig { dir: Some(dir.to_path_buf()), ..Default::default() }
    }

    pub fn resolve(&self) -> Result<(InputPaths, Option<PathBuf>), PipelineError> {
        let pick = |explicit: &Option<PathBuf>, name: &str| -> Result<PathBuf, PipelineError> {
            match (explicit, &self.dir) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(d)) => Ok(d.join(name)),
                (None, None) => Err(PipelineError::Config(format!("no path for {name}: set inputs.dir or the file path"))),
            }
        };
        let paths = InputPaths {
            publications: pick(&self.publications, "publications.ndjson")?,
            crossref_assertions: pick(&self.crossref_assertions, "crossref_assertions.ndjson")?,
            orcid_profiles: pick(&self.orcid_profiles, "orcid_profiles.ndjson")?,
            researchers: pick(&self.researchers, "researchers.ndjson")?,
        };
        let bands = self
            .income_bands
            .clone()
            .or_else(|| self.dir.as_ref().map(|d| d.join("income_bands.csv")).filter(|p| p.exists()));
        Ok((paths, bands))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: InputConfig,
    pub out_dir: PathBuf,
    pub quality: RepairConfig,
    pub metrics: MetricsOptions,
    /// Worker threads; `None` uses one per processor.
    pub workers: Option<usize>,
    pub emit_linked_authors: bool,
    /// When present, a synthetic world is generated under
    /// `<out_dir>/synth` and used as the input.
    pub synth: Option<SynthConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: InputConfig::default(),
            out_dir: PathBuf::from("out"),
            quality: RepairConfig::default(),
            metrics: MetricsOptions::default(),
            workers: None,
            emit_linked_authors: false,
            synth: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.quality.validate().map_err(PipelineError::Config)?;
        self.metrics.cohort.validate().map_err(PipelineError::Config)?;
        if self.workers == Some(0) {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if let Some(s) = &self.synth {
            s.validate().map_err(|e| PipelineError::Config(format!("synth: {e}")))?;
        }
        Ok(())
    }
}

pub fn check_inputs_exist(paths: &InputPaths) -> Result<(), PipelineError> {
    for p in [&paths.publications, &paths.crossref_assertions, &paths.orcid_profiles, &paths.researchers] {
        if !p.is_file() {
            return Err(PipelineError::InputFile(format!("input file not found: {}", p.display())));
        }
    }
    Ok(())
}

pub fn load(paths: &InputPaths) -> Result<Dataset, PipelineError> {
    check_inputs_exist(paths)?;
    let ds = Dataset::load(paths)?;
    log::info!(
        "ingest: {} lines, {} accepted, {} rejected ({} publications, {} assertions, {} profiles, {} researchers)",
        ds.lines_read,
        ds.accepted(),
        ds.rejects.len(),
        ds.publications.len(),
        ds.assertions.len(),
        ds.profiles.len(),
        ds.researchers.len()
    );
    Ok(ds)
}

/// Author-level linkage and the pre-repair shuffle-rate estimate.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    pub linkage: Linkage,
    /// Crossref assertions dropped because their DOI or position is not in
    /// the publication table.
    pub orphan_assertions: usize,
    pub shuffle_rate: ShuffleRateSeries,
}

/// Links authors and estimates the shuffle rate. Crossref assertions that
/// point outside the publication table are removed from `ds`.
pub fn diagnose(ds: &mut Dataset) -> Diagnosis {
    let (kept, orphan_assertions) = retain_linkable(&ds.publications, std::mem::take(&mut ds.assertions));
    ds.assertions = kept;
    let mut linkage = link_crossref_authors(&ds.publications, &ds.researchers);
    linkage.attach_assertions(&ds.assertions);
    log::info!(
        "linkage: {} of {} author mentions linked, {} ambiguous, {} orphan assertions",
        linkage.linked,
        linkage.authors.len(),
        linkage.ambiguous,
        orphan_assertions
    );
    let shuffle_rate = estimate_shuffle_rate(&ds.assertions, &linkage, &ds.publications);
    Diagnosis { linkage, orphan_assertions, shuffle_rate }
}

pub fn repair(ds: &Dataset, diag: &Diagnosis, config: &RepairConfig) -> RepairRun {
    repair_crossref(&ds.assertions, &diag.linkage, &ds.publications, &ds.profiles, &ds.researchers, config)
}

pub fn unify(ds: &Dataset, linkage: &Linkage, repaired: &[CrossrefAssertion]) -> AssertionTable {
    let registry = link_orcid_works(&ds.profiles, &ds.publications);
    build_assertion_table(linkage, &registry, repaired, &ds.researchers)
}

pub fn metrics(
    ds: &Dataset,
    table: &AssertionTable,
    repaired: &[CrossrefAssertion],
    bands: &BTreeMap<String, String>,
    options: &MetricsOptions,
) -> MetricsReport {
    let ctx = MetricsContext::new(&ds.publications, &ds.researchers, &ds.profiles, table);
    compute_metrics(&ctx, repaired, bands, options)
}

pub fn load_bands(path: Option<&Path>) -> Result<BTreeMap<String, String>, PipelineError> {
    match path {
        Some(p) => output::read_band_map(p).map_err(|e| PipelineError::InputFile(e.to_string())),
        None => {
            log::warn!("no income band map given; income_bands.csv will be empty");
            Ok(BTreeMap::new())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub lines_read: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub orphan_assertions: usize,
    pub linked_authors: usize,
    pub ambiguous_authors: usize,
    pub estimated_shuffle_rate: f64,
    pub repair: RepairStats,
    pub unified_assertions: usize,
    pub cohort_size: usize,
}

/// Runs every stage and writes all outputs to `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let mut inputs = config.inputs.clone();
    if let Some(synth) = &config.synth {
        let world = generate_world(synth).map_err(|e| PipelineError::Config(format!("synth: {e}")))?;
        let dir = config.out_dir.join("synth");
        world.write(&dir)?;
        inputs = InputConfig::in_dir(&dir);
    }
    let (paths, band_path) = inputs.resolve()?;
    let mut ds = load(&paths)?;
    let bands = load_bands(band_path.as_deref())?;

    let diag = diagnose(&mut ds);
    let run = repair(&ds, &diag, &config.quality);
    let table = unify(&ds, &diag.linkage, &run.repaired.assertions);
    let report = metrics(&ds, &table, &run.repaired.assertions, &bands, &config.metrics);

    let mut out = OutputDir::create(&config.out_dir)?;
    out.rejects(&ds.rejects)?;
    out.shuffle_rate(&diag.shuffle_rate)?;
    out.repair_report(&run.repaired.outcomes)?;
    if config.emit_linked_authors {
        out.linked_authors(&diag.linkage.authors)?;
    }
    out.metrics(&report)?;

    let summary = RunSummary {
        lines_read: ds.lines_read,
        accepted: ds.accepted(),
        rejected: ds.rejects.len(),
        orphan_assertions: diag.orphan_assertions,
        linked_authors: diag.linkage.linked,
        ambiguous_authors: diag.linkage.ambiguous,
        estimated_shuffle_rate: diag.shuffle_rate.overall(),
        repair: run.repaired.stats,
        unified_assertions: table.rows.len(),
        cohort_size: report.cohort_size,
    };
    out.manifest(
        serde_json::to_value(config).unwrap_or_default(),
        serde_json::to_value(&summary).unwrap_or_default(),
    )?;
    Ok(summary)
}
