use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::ingest::{CrossrefAssertion, Doi, ForCode, PublicationRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorsPerPaperRow {
    pub for_code: ForCode,
    pub papers: usize,
    pub mean_authors: f64,
}

/// Mean author count per FoR code; a paper counts under each of its codes.
pub fn avg_authors_per_paper(publications: &[PublicationRecord]) -> Vec<AuthorsPerPaperRow> {
    let mut sums: BTreeMap<ForCode, (usize, usize)> = BTreeMap::new();
    for p in publications {
        for &code in &p.for_codes {
            let e = sums.entry(code).or_default();
            e.0 += 1;
            e.1 += p.authors.len();
        }
    }
    sums.into_iter()
        .map(|(for_code, (papers, authors))| AuthorsPerPaperRow {
            for_code,
            papers,
            mean_authors: authors as f64 / papers as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JournalSupportRow {
    pub publisher: String,
    pub year: i32,
    /// Distinct journals with at least one Crossref-asserted paper.
    pub journals: usize,
}

/// One row per (publisher, year) present in the publication table.
pub fn journal_orcid_support(publications: &[PublicationRecord], crossref: &[CrossrefAssertion]) -> Vec<JournalSupportRow> {
    let asserted: BTreeSet<&Doi> = crossref.iter().map(|a| &a.doi).collect();
    let mut cells: BTreeMap<(&str, i32), BTreeSet<&str>> = BTreeMap::new();
    for p in publications {
        let journals = cells.entry((p.publisher_id.as_str(), p.year)).or_default();
        if asserted.contains(&p.doi) {
            journals.insert(p.journal_id.as_str());
        }
    }
    cells
        .into_iter()
        .map(|((publisher, year), journals)| JournalSupportRow { publisher: publisher.to_string(), year, journals: journals.len() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrcidDistributionRow {
    pub rank: usize,
    pub publisher: String,
    pub papers: usize,
    pub assertions: usize,
    pub share_0: f64,
    pub share_1: f64,
    pub share_2plus: f64,
}

/// Per publisher, the share of `year` papers with at least `min_authors`
/// authors carrying 0, 1, or 2+ Crossref ORCID assertions. Publishers are
/// ranked by assertion count on those papers (ties by id) and cut to
/// `top_n`; `top_n == 0` keeps all.
pub fn orcid_count_distribution(
    publications: &[PublicationRecord],
    crossref: &[CrossrefAssertion],
    year: i32,
    min_authors: usize,
    top_n: usize,
) -> Vec<OrcidDistributionRow> {
    let mut per_doi: HashMap<&Doi, usize> = HashMap::new();
    for a in crossref {
        *per_doi.entry(&a.doi).or_default() += 1;
    }
    // papers, assertions, [0, 1, 2+]
    let mut stats: BTreeMap<&str, (usize, usize, [usize; 3])> = BTreeMap::new();
    for p in publications.iter().filter(|p| p.year == year && p.authors.len() >= min_authors) {
        let n = per_doi.get(&p.doi).copied().unwrap_or(0);
        let s = stats.entry(p.publisher_id.as_str()).or_default();
        s.0 += 1;
        s.1 += n;
        s.2[n.min(2)] += 1;
    }
    let mut ranked: Vec<_> = stats.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .1.cmp(&a.1 .1).then(a.0.cmp(b.0)));
    if top_n > 0 {
        ranked.truncate(top_n);
    }
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, (publisher, (papers, assertions, buckets)))| {
            let share = |k: usize| buckets[k] as f64 / papers as f64;
            OrcidDistributionRow {
                rank: i + 1,
                publisher: publisher.to_string(),
                papers,
                assertions,
                share_0: share(0),
                share_1: share(1),
                share_2plus: share(2),
            }
        })
        .collect()
}
