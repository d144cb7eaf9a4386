//! Suspect-assertion detection.
//!
//! Detection is two-phase: a corpus-wide index maps every ORCID to the
//! registry researchers it has been asserted on (and every researcher to the
//! ORCIDs asserted on them), then each assertion is checked independently.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{CrossrefAssertion, Doi, OrcidId, ResearcherId, ResearcherRecord};
use crate::linkage::Linkage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Criterion {
    /// The ORCID maps to two or more researchers who are co-authors here.
    SelfCollab,
    /// Crossref puts two or more ORCIDs on the researcher at this position.
    MultiOrcidPerResearcher,
    /// The registry ties this ORCID, or this position's researcher, to a
    /// different identity.
    RegistryDisagrees,
    /// No registry researcher is linked at the asserted position.
    NoResearcherForOrcid,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::SelfCollab,
        Criterion::MultiOrcidPerResearcher,
        Criterion::RegistryDisagrees,
        Criterion::NoResearcherForOrcid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::SelfCollab => "SELF_COLLAB",
            Criterion::MultiOrcidPerResearcher => "MULTI_ORCID_PER_RESEARCHER",
            Criterion::RegistryDisagrees => "REGISTRY_DISAGREES",
            Criterion::NoResearcherForOrcid => "NO_RESEARCHER_FOR_ORCID",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Criterion::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Set of criteria that fired, rendered as `A|B`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Criteria(pub BTreeSet<Criterion>);

impl Criteria {
    pub fn insert(&mut self, c: Criterion) {
        self.0.insert(c);
    }

    pub fn contains(&self, c: Criterion) -> bool {
        self.0.contains(&c)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Criteria {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(c.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuspectFlag {
    pub doi: Doi,
    pub position: u32,
    pub orcid: OrcidId,
    pub criteria: Criteria,
}

/// Corpus-wide maps built once before per-assertion checks.
#[derive(Debug, Default)]
pub struct SuspectIndex {
    /// ORCID -> researchers it is asserted on via Crossref (sorted, unique).
    orcid_researchers: HashMap<OrcidId, Vec<ResearcherId>>,
    /// Researcher -> number of distinct ORCIDs Crossref asserts on them.
    researcher_orcid_count: HashMap<ResearcherId, usize>,
    registry_orcid: HashMap<ResearcherId, OrcidId>,
    registry_owners: HashMap<OrcidId, Vec<ResearcherId>>,
}

impl SuspectIndex {
    pub fn build(assertions: &[CrossrefAssertion], linkage: &Linkage, researchers: &[ResearcherRecord]) -> Self {
        let mut orcid_researchers: HashMap<OrcidId, Vec<ResearcherId>> = HashMap::new();
        let mut researcher_orcids: HashMap<ResearcherId, Vec<OrcidId>> = HashMap::new();
        for a in assertions {
            if let Some(r) = linkage.researcher_at(&a.doi, a.author_position) {
                orcid_researchers.entry(a.orcid).or_default().push(r.clone());
                researcher_orcids.entry(r.clone()).or_default().push(a.orcid);
            }
        }
        for v in orcid_researchers.values_mut() {
            v.sort_unstable();
            v.dedup();
        }
        let researcher_orcid_count = researcher_orcids
            .into_iter()
            .map(|(r, mut v)| {
                v.sort_unstable();
                v.dedup();
                (r, v.len())
            })
            .collect();

        let mut registry_orcid = HashMap::new();
        let mut registry_owners: HashMap<OrcidId, Vec<ResearcherId>> = HashMap::new();
        for r in researchers {
            if let Some(o) = r.orcid {
                registry_orcid.insert(r.researcher_id.clone(), o);
                registry_owners.entry(o).or_default().push(r.researcher_id.clone());
            }
        }
        SuspectIndex { orcid_researchers, researcher_orcid_count, registry_orcid, registry_owners }
    }

    /// True when two or more of the researchers this ORCID maps to are
    /// linked authors of `doi`.
    pub fn self_collaborates(&self, orcid: &OrcidId, doi: &Doi, linkage: &Linkage) -> bool {
        let Some(mapped) = self.orcid_researchers.get(orcid) else {
            return false;
        };
        if mapped.len() < 2 {
            return false;
        }
        let mut on_paper: Vec<&ResearcherId> =
            linkage.researchers_on(doi).filter(|r| mapped.binary_search(r).is_ok()).collect();
        on_paper.sort_unstable();
        on_paper.dedup();
        on_paper.len() >= 2
    }

    pub fn criteria_for(&self, a: &CrossrefAssertion, linkage: &Linkage) -> Criteria {
        let mut criteria = Criteria::default();
        let here = linkage.researcher_at(&a.doi, a.author_position);

        if self.self_collaborates(&a.orcid, &a.doi, linkage) {
            criteria.insert(Criterion::SelfCollab);
        }
        if let Some(r) = here {
            if self.researcher_orcid_count.get(r).copied().unwrap_or(0) >= 2 {
                criteria.insert(Criterion::MultiOrcidPerResearcher);
            }
        }
        let position_disagrees = here
            .and_then(|r| self.registry_orcid.get(r))
            .is_some_and(|registered| *registered != a.orcid);
        let owner_disagrees = self
            .registry_owners
            .get(&a.orcid)
            .is_some_and(|owners| here.is_none_or(|r| !owners.contains(r)));
        if position_disagrees || owner_disagrees {
            criteria.insert(Criterion::RegistryDisagrees);
        }
        if here.is_none() {
            criteria.insert(Criterion::NoResearcherForOrcid);
        }
        criteria
    }
}

fn sorted(mut flags: Vec<SuspectFlag>) -> Vec<SuspectFlag> {
    flags.par_sort_unstable_by(|a, b| (&a.doi, a.position).cmp(&(&b.doi, b.position)));
    flags
}

/// Flags assertions whose ORCID maps to two or more researchers that are
/// co-authors on the asserted paper.
pub fn detect_self_collaboration(assertions: &[CrossrefAssertion], linkage: &Linkage) -> Vec<SuspectFlag> {
    let index = SuspectIndex::build(assertions, linkage, &[]);
    let flags = assertions
        .par_iter()
        .filter(|a| index.self_collaborates(&a.orcid, &a.doi, linkage))
        .map(|a| SuspectFlag {
            doi: a.doi.clone(),
            position: a.author_position,
            orcid: a.orcid,
            criteria: Criteria([Criterion::SelfCollab].into_iter().collect()),
        })
        .collect();
    sorted(flags)
}

/// Union of all suspect criteria, sorted by `(doi, position)`.
pub fn flag_suspects(
    assertions: &[CrossrefAssertion],
    linkage: &Linkage,
    researchers: &[ResearcherRecord],
) -> Vec<SuspectFlag> {
    let index = SuspectIndex::build(assertions, linkage, researchers);
    let flags = assertions
        .par_iter()
        .filter_map(|a| {
            let criteria = index.criteria_for(a, linkage);
            (!criteria.is_empty()).then(|| SuspectFlag {
                doi: a.doi.clone(),
                position: a.author_position,
                orcid: a.orcid,
                criteria,
            })
        })
        .collect();
    sorted(flags)
}
