//! CSV emitters for every pipeline table, plus the run manifest.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written table.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ingest::{Doi, OrcidId, Reject};
use crate::linkage::LinkedAuthor;
use crate::metrics::{
    AuthorsPerPaperRow, CrossrefOnlyRow, EarlyUsageRow, IncomeBandRow, JournalSupportRow, MetricsReport, MetricsRow,
    OrcidDistributionRow,
};
use crate::quality::{RepairOutcome, ShuffleRateSeries, Verdict};
use crate::synthworld::ReportEntry;

/// Fixed headers, one per output file.
pub mod headers {
    pub const REPAIR_REPORT: &[&str] = &["doi", "position", "orcid", "criteria", "verdict", "score", "reason"];
    pub const SHUFFLE_RATE: &[&str] = &["year", "flagged", "total", "rate"];
    pub const REJECTS: &[&str] = &["file", "line", "reason"];
    pub const LINKED_AUTHORS: &[&str] = &["doi", "position", "researcher_id", "orcid_crossref", "authenticated"];
    pub const GROUPED: &[&str] =
        &["researchers", "adopted", "adoption_pct", "completeness_num", "completeness_den", "engagement_pct"];
    pub const INCOME_BANDS: &[&str] = &["band", "researchers", "adoption_pct", "median_adoption_pct", "completeness_pct"];
    pub const EARLY_USAGE: &[&str] = &["country", "creation_year", "used", "denominator", "pct"];
    pub const CROSSREF_ONLY: &[&str] = &["country", "year", "crossref_researchers", "crossref_only", "pct"];
    pub const AUTHORS_PER_PAPER: &[&str] = &["for_code", "papers", "mean_authors"];
    pub const JOURNAL_SUPPORT: &[&str] = &["publisher", "year", "journals"];
    pub const ORCID_DISTRIBUTION: &[&str] =
        &["rank", "publisher", "papers", "assertions", "share_0", "share_1", "share_2plus"];
    pub const BAND_MAP: &[&str] = &["country", "band"];
}

/// The nine metric tables, by file name.
pub const METRIC_FILES: [&str; 9] = [
    "adoption_by_country.csv",
    "early_usage.csv",
    "crossref_only.csv",
    "income_bands.csv",
    "discipline.csv",
    "authors_per_paper.csv",
    "journal_support.csv",
    "orcid_distribution.csv",
    "funder.csv",
];

/// Header of each CSV the figure renderer reads.
pub const FIGURE_INPUTS: [(&str, &[&str]); 5] = [
    ("adoption_by_country.csv", &["country", "researchers", "adopted", "adoption_pct", "completeness_num", "completeness_den", "engagement_pct"]),
    ("early_usage.csv", headers::EARLY_USAGE),
    ("crossref_only.csv", headers::CROSSREF_ONLY),
    ("journal_support.csv", headers::JOURNAL_SUPPORT),
    ("orcid_distribution.csv", headers::ORCID_DISTRIBUTION),
];

pub fn pct(v: f64) -> String {
    format!("{v:.2}")
}

pub fn share(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes `path` through a temporary file in the same directory.
pub fn atomic_write<F>(path: &Path, write: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes a header plus rows as RFC 4180 CSV. Returns the row count.
pub fn emit_csv<I, R>(path: &Path, header: &[&str], rows: I) -> io::Result<usize>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut n = 0;
    atomic_write(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header)?;
        for row in rows {
            csv.write_record(row)?;
            n += 1;
        }
        csv.flush()
    })?;
    Ok(n)
}

fn grouped_rows(rows: &[MetricsRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.key.clone(),
            r.researchers.to_string(),
            r.adopted.to_string(),
            pct(r.adoption_pct),
            r.completeness.num.to_string(),
            r.completeness.den.to_string(),
            pct(r.engagement_pct),
        ]
    })
}

fn with_key(key: &str, rest: &[&str]) -> Vec<String> {
    std::iter::once(key).chain(rest.iter().copied()).map(String::from).collect()
}

fn income_rows(rows: &[IncomeBandRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![r.band.clone(), r.researchers.to_string(), pct(r.adoption_pct), pct(r.median_adoption_pct), pct(r.completeness_pct)]
    })
}

fn early_rows(rows: &[EarlyUsageRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![r.country.clone(), r.creation_year.to_string(), r.used.to_string(), r.denominator.to_string(), pct(r.pct)]
    })
}

fn crossref_only_rows(rows: &[CrossrefOnlyRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![r.country.clone(), r.year.to_string(), r.crossref_researchers.to_string(), r.crossref_only.to_string(), pct(r.pct)]
    })
}

fn authors_rows(rows: &[AuthorsPerPaperRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| vec![r.for_code.to_string(), r.papers.to_string(), format!("{:.4}", r.mean_authors)])
}

fn journal_rows(rows: &[JournalSupportRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| vec![r.publisher.clone(), r.year.to_string(), r.journals.to_string()])
}

fn distribution_rows(rows: &[OrcidDistributionRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.rank.to_string(),
            r.publisher.clone(),
            r.papers.to_string(),
            r.assertions.to_string(),
            share(r.share_0),
            share(r.share_1),
            share(r.share_2plus),
        ]
    })
}

/// One written file and its data-row count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
}

/// Output directory that remembers what was written, for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<OutputFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub generated_at: String,
    pub outputs: Vec<OutputFile>,
    pub config: serde_json::Value,
    pub summary: serde_json::Value,
}

pub const MANIFEST: &str = "manifest.json";

impl OutputDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[OutputFile] {
        &self.written
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let rows = emit_csv(&self.dir.join(name), header, rows)?;
        log::debug!("wrote {name} ({rows} rows)");
        self.written.push(OutputFile { file: name.to_string(), rows });
        Ok(())
    }

    pub fn rejects(&mut self, rejects: &[Reject]) -> io::Result<()> {
        self.csv(
            "rejects.csv",
            headers::REJECTS,
            rejects.iter().map(|r| vec![r.file.clone(), r.line.to_string(), r.reason.clone()]),
        )
    }

    pub fn repair_report(&mut self, outcomes: &[RepairOutcome]) -> io::Result<()> {
        self.csv(
            "repair_report.csv",
            headers::REPAIR_REPORT,
            outcomes.iter().map(|o| {
                vec![
                    o.doi.to_string(),
                    o.position.to_string(),
                    o.orcid.to_string(),
                    o.criteria.to_string(),
                    o.verdict.to_string(),
                    o.best_score.map(|s| format!("{s:.6}")).unwrap_or_default(),
                    o.reason.as_str().to_string(),
                ]
            }),
        )
    }

    pub fn shuffle_rate(&mut self, series: &ShuffleRateSeries) -> io::Result<()> {
        self.csv(
            "shuffle_rate.csv",
            headers::SHUFFLE_RATE,
            series
                .points
                .iter()
                .map(|p| vec![p.year.to_string(), p.flagged.to_string(), p.total.to_string(), share(p.rate)]),
        )
    }

    pub fn linked_authors(&mut self, rows: &[LinkedAuthor]) -> io::Result<()> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        self.csv(
            "linked_authors.csv",
            headers::LINKED_AUTHORS,
            rows.iter().map(|r| {
                vec![
                    r.doi.to_string(),
                    r.position.to_string(),
                    opt(r.researcher_id.as_ref().map(|id| id.as_str().to_string())),
                    opt(r.orcid_crossref.map(|o| o.to_string())),
                    opt(r.authenticated.map(|a| a.to_string())),
                ]
            }),
        )
    }

    pub fn metrics(&mut self, m: &MetricsReport) -> io::Result<()> {
        let grouped = |key: &str| with_key(key, headers::GROUPED);
        self.csv("adoption_by_country.csv", &as_refs(&grouped("country")), grouped_rows(&m.by_country))?;
        self.csv("early_usage.csv", headers::EARLY_USAGE, early_rows(&m.early_usage))?;
        self.csv("crossref_only.csv", headers::CROSSREF_ONLY, crossref_only_rows(&m.crossref_only))?;
        self.csv("income_bands.csv", headers::INCOME_BANDS, income_rows(&m.income_bands))?;
        self.csv("discipline.csv", &as_refs(&grouped("for_code")), grouped_rows(&m.by_discipline))?;
        self.csv("authors_per_paper.csv", headers::AUTHORS_PER_PAPER, authors_rows(&m.authors_per_paper))?;
        self.csv("journal_support.csv", headers::JOURNAL_SUPPORT, journal_rows(&m.journal_support))?;
        self.csv("orcid_distribution.csv", headers::ORCID_DISTRIBUTION, distribution_rows(&m.orcid_distribution))?;
        self.csv("funder.csv", &as_refs(&grouped("funder")), grouped_rows(&m.by_funder))
    }

    /// Writes `manifest.json` listing everything written so far. The
    /// timestamp lives only here.
    pub fn manifest(&self, config: serde_json::Value, summary: serde_json::Value) -> io::Result<()> {
        let mut outputs = self.written.clone();
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
            config,
            summary,
        };
        atomic_write(&self.dir.join(MANIFEST), |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            w.write_all(b"\n")
        })
    }
}

fn as_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("cannot read {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path} line {line}: {message}")]
    Field { path: PathBuf, line: usize, message: String },
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>, ReadError> {
    csv::Reader::from_path(path).map_err(|source| ReadError::Csv { path: path.to_path_buf(), source })
}

/// Reads a `{country, band}` map.
pub fn read_band_map(path: &Path) -> Result<BTreeMap<String, String>, ReadError> {
    let mut map = BTreeMap::new();
    for rec in reader(path)?.records() {
        let rec = rec.map_err(|source| ReadError::Csv { path: path.to_path_buf(), source })?;
        if let (Some(c), Some(b)) = (rec.get(0), rec.get(1)) {
            map.insert(c.trim().to_ascii_uppercase(), b.trim().to_string());
        }
    }
    Ok(map)
}

/// Reads the `doi`, `position`, `orcid` and `verdict` columns of a repair
/// report.
pub fn read_repair_report(path: &Path) -> Result<Vec<ReportEntry>, ReadError> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| ReadError::Csv { path: path.to_path_buf(), source })?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |message: String| ReadError::Field { path: path.to_path_buf(), line, message };
        out.push(ReportEntry {
            doi: Doi::parse(field(0)).map_err(|e| bad(e.to_string()))?,
            position: field(1).parse().map_err(|_| bad(format!("bad position {:?}", field(1))))?,
            orcid: OrcidId::parse(field(2)).map_err(|e| bad(e.to_string()))?,
            verdict: field(4).parse::<Verdict>().map_err(|_| bad(format!("bad verdict {:?}", field(4))))?,
        });
    }
    Ok(out)
}
