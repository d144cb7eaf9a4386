use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::detect::SuspectIndex;
use crate::ingest::{CrossrefAssertion, Doi, PublicationRecord};
use crate::linkage::Linkage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShuffleRatePoint {
    pub year: i32,
    pub flagged: usize,
    pub total: usize,
    pub rate: f64,
}

/// Per-year share of Crossref assertions flagged as self-collaboration.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ShuffleRateSeries {
    pub points: Vec<ShuffleRatePoint>,
}

impl ShuffleRateSeries {
    /// Pooled rate over all years.
    pub fn overall(&self) -> f64 {
        let flagged: usize = self.points.iter().map(|p| p.flagged).sum();
        let total: usize = self.points.iter().map(|p| p.total).sum();
        if total == 0 {
            0.0
        } else {
            flagged as f64 / total as f64
        }
    }
}

/// Diagnostic run on raw (unrepaired) assertions. Assertions whose DOI is
/// not a loaded publication have no year and are skipped.
pub fn estimate_shuffle_rate(
    assertions: &[CrossrefAssertion],
    linkage: &Linkage,
    publications: &[PublicationRecord],
) -> ShuffleRateSeries {
    let years: HashMap<&Doi, i32> = publications.iter().map(|p| (&p.doi, p.year)).collect();
    let index = SuspectIndex::build(assertions, linkage, &[]);
    let mut per_year: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
    for a in assertions {
        let Some(&year) = years.get(&a.doi) else { continue };
        let e = per_year.entry(year).or_default();
        e.1 += 1;
        if index.self_collaborates(&a.orcid, &a.doi, linkage) {
            e.0 += 1;
        }
    }
    ShuffleRateSeries {
        points: per_year
            .into_iter()
            .map(|(year, (flagged, total))| ShuffleRatePoint { year, flagged, total, rate: flagged as f64 / total as f64 })
            .collect(),
    }
}
