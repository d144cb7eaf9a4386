use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::names::{PersonName, Perturbation};
use crate::ingest::{CountryCode, Doi, OrcidId, ResearcherId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueResearcher {
    pub researcher_id: ResearcherId,
    /// Name as it appears on papers and in the registry.
    pub published: PersonName,
    /// Name on the ORCID profile, when the researcher owns an iD.
    pub profile: Option<PersonName>,
    pub orcid: Option<OrcidId>,
    pub country: CountryCode,
    /// Present in the researcher registry.
    pub covered: bool,
    pub perturbation: Perturbation,
    /// ORCID record auto-imports Crossref assertions.
    pub synced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueAuthorship {
    pub doi: Doi,
    pub position: u32,
    pub researcher_id: ResearcherId,
}

/// An assertion moved from its owner's position to another author's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedShuffle {
    pub doi: Doi,
    pub orcid: OrcidId,
    pub true_position: u32,
    pub wrong_position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionSync {
    pub doi: Doi,
    pub position: u32,
    pub orcid: OrcidId,
    /// The assertion was mirrored into the public ORCID record.
    pub synced: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub researchers: Vec<TrueResearcher>,
    pub authorships: Vec<TrueAuthorship>,
    pub shuffles: Vec<InjectedShuffle>,
    pub sync: Vec<AssertionSync>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TruthLine {
    Researcher(TrueResearcher),
    Authorship(TrueAuthorship),
    Shuffle(InjectedShuffle),
    Sync(AssertionSync),
}

impl GroundTruth {
    pub fn researcher_index(&self) -> HashMap<&ResearcherId, &TrueResearcher> {
        self.researchers.iter().map(|r| (&r.researcher_id, r)).collect()
    }

    pub fn author_at(&self) -> HashMap<(&Doi, u32), &ResearcherId> {
        self.authorships.iter().map(|a| ((&a.doi, a.position), &a.researcher_id)).collect()
    }

    pub fn owner_of(&self) -> HashMap<OrcidId, &TrueResearcher> {
        self.researchers.iter().filter_map(|r| r.orcid.map(|o| (o, r))).collect()
    }

    /// Writes one `kind`-tagged JSON object per line.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut line = |t: TruthLine| -> io::Result<()> {
            serde_json::to_writer(&mut out, &t)?;
            out.write_all(b"\n")
        };
        for r in &self.researchers {
            line(TruthLine::Researcher(r.clone()))?;
        }
        for a in &self.authorships {
            line(TruthLine::Authorship(a.clone()))?;
        }
        for s in &self.shuffles {
            line(TruthLine::Shuffle(s.clone()))?;
        }
        for s in &self.sync {
            line(TruthLine::Sync(s.clone()))?;
        }
        out.flush()
    }

    pub fn read_ndjson<R: BufRead>(reader: R) -> io::Result<Self> {
        let mut truth = GroundTruth::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TruthLine = serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("truth line {}: {e}", i + 1)))?;
            match parsed {
                TruthLine::Researcher(r) => truth.researchers.push(r),
                TruthLine::Authorship(a) => truth.authorships.push(a),
                TruthLine::Shuffle(s) => truth.shuffles.push(s),
                TruthLine::Sync(s) => truth.sync.push(s),
            }
        }
        Ok(truth)
    }
}
