//! Loading the three normalized metadata dumps (publications plus Crossref
//! assertions, ORCID profiles, and the researcher registry).

mod countries;
mod ids;
mod ndjson;
mod records;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

pub use ids::{
    mod11_2_check_char, validate_orcid_checksum, CountryCode, Doi, ForCode, IdError, OrcidId,
    ResearcherId,
};
pub use ndjson::{parse_stream, write_ndjson, Keyed, Parsed, Reject};
pub use records::{
    AuthorMention, CrossrefAssertion, OrcidProfile, PublicationRecord, ResearcherRecord, Validate,
    MAX_YEAR, MIN_YEAR,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[source] std::io::Error),
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn parse_publications<R: BufRead>(reader: R) -> Result<Parsed<PublicationRecord>, IngestError> {
    parse_stream(reader, "publications.ndjson")
}

pub fn parse_crossref_assertions<R: BufRead>(reader: R) -> Result<Parsed<CrossrefAssertion>, IngestError> {
    parse_stream(reader, "crossref_assertions.ndjson")
}

pub fn parse_orcid_profiles<R: BufRead>(reader: R) -> Result<Parsed<OrcidProfile>, IngestError> {
    parse_stream(reader, "orcid_profiles.ndjson")
}

pub fn parse_researchers<R: BufRead>(reader: R) -> Result<Parsed<ResearcherRecord>, IngestError> {
    parse_stream(reader, "researchers.ndjson")
}

/// Locations of the four dumps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPaths {
    pub publications: PathBuf,
    pub crossref_assertions: PathBuf,
    pub orcid_profiles: PathBuf,
    pub researchers: PathBuf,
}

impl InputPaths {
    /// Conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        InputPaths {
            publications: dir.join("publications.ndjson"),
            crossref_assertions: dir.join("crossref_assertions.ndjson"),
            orcid_profiles: dir.join("orcid_profiles.ndjson"),
            researchers: dir.join("researchers.ndjson"),
        }
    }
}

/// The four frozen input tables plus everything that was rejected.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub publications: Vec<PublicationRecord>,
    pub assertions: Vec<CrossrefAssertion>,
    pub profiles: Vec<OrcidProfile>,
    pub researchers: Vec<ResearcherRecord>,
    pub rejects: Vec<Reject>,
    pub lines_read: usize,
    /// Researcher DOI references dropped because the DOI is not in the
    /// publication table.
    pub unresolved_researcher_dois: usize,
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|source| IngestError::Open { path: path.to_path_buf(), source })
}

impl Dataset {
    /// Loads all four files. The files are parsed concurrently.
    pub fn load(paths: &InputPaths) -> Result<Self, IngestError> {
        let ((pubs, asserts), (profiles, researchers)) = rayon::join(
            || {
                rayon::join(
                    || open(&paths.publications).and_then(parse_publications),
                    || open(&paths.crossref_assertions).and_then(parse_crossref_assertions),
                )
            },
            || {
                rayon::join(
                    || open(&paths.orcid_profiles).and_then(parse_orcid_profiles),
                    || open(&paths.researchers).and_then(parse_researchers),
                )
            },
        );
        Ok(Dataset::assemble(pubs?, asserts?, profiles?, researchers?))
    }

    /// Freezes parsed tables into a dataset. Researcher DOIs that do not
    /// resolve to a loaded publication are dropped and counted.
    pub fn assemble(
        pubs: Parsed<PublicationRecord>,
        asserts: Parsed<CrossrefAssertion>,
        profiles: Parsed<OrcidProfile>,
        researchers: Parsed<ResearcherRecord>,
    ) -> Self {
        let lines_read = pubs.lines + asserts.lines + profiles.lines + researchers.lines;
        let mut rejects = Vec::new();
        rejects.extend(pubs.rejects);
        rejects.extend(asserts.rejects);
        rejects.extend(profiles.rejects);
        rejects.extend(researchers.rejects);

        let known: HashSet<&Doi> = pubs.records.iter().map(|p| &p.doi).collect();
        let mut unresolved = 0;
        let mut researchers = researchers.records;
        for r in &mut researchers {
            let before = r.publication_dois.len();
            r.publication_dois.retain(|d| known.contains(d));
            unresolved += before - r.publication_dois.len();
        }
        if unresolved > 0 {
            log::info!("dropped {unresolved} researcher DOI references absent from the publication table");
        }

        Dataset {
            publications: pubs.records,
            assertions: asserts.records,
            profiles: profiles.records,
            researchers,
            rejects,
            lines_read,
            unresolved_researcher_dois: unresolved,
        }
    }

    pub fn accepted(&self) -> usize {
        self.publications.len() + self.assertions.len() + self.profiles.len() + self.researchers.len()
    }
}
