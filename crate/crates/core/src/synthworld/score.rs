use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::names::Perturbation;
use super::truth::GroundTruth;
use crate::ingest::{Doi, OrcidId};
use crate::quality::{RepairOutcome, Verdict};

/// The parts of a repair report row that scoring needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportEntry {
    pub doi: Doi,
    pub position: u32,
    pub orcid: OrcidId,
    pub verdict: Verdict,
}

impl From<&RepairOutcome> for ReportEntry {
    fn from(o: &RepairOutcome) -> Self {
        ReportEntry { doi: o.doi.clone(), position: o.position, orcid: o.orcid, verdict: o.verdict }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScore {
    pub injected: usize,
    /// Injected shuffles whose true and wrong authors are both in the registry.
    pub detectable: usize,
    /// Detectable shuffles reassigned to the true author or dropped.
    pub recovered: usize,
    pub reassigned_to_truth: usize,
    pub recall: f64,
    /// Share of detectable shuffles moved back to the true author.
    pub reassign_recall: f64,
    /// Non-KEEP verdicts on correct assertions of this class's owners.
    pub false_removals: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RepairScore {
    pub precision: f64,
    pub recall: f64,
    pub injected: usize,
    pub detectable: usize,
    pub recovered: usize,
    pub reassigned_to_truth: usize,
    pub non_keep: usize,
    pub correct_non_keep: usize,
    /// Keyed by the ORCID owner's name perturbation.
    pub by_class: BTreeMap<String, ClassScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores repair verdicts against the injected shuffles.
///
/// A non-KEEP verdict is correct when it targets an injected shuffle and
/// either drops it or moves it back to the true position. Recall counts
/// only detectable shuffles. Both ratios are 1 when their denominator is 0.
pub fn score_repair(truth: &GroundTruth, report: &[ReportEntry]) -> RepairScore {
    let researchers = truth.researcher_index();
    let author_at = truth.author_at();
    let owners = truth.owner_of();
    let verdicts: HashMap<(&Doi, u32), Verdict> = report.iter().map(|e| ((&e.doi, e.position), e.verdict)).collect();

    let mut by_class: BTreeMap<String, ClassScore> =
        Perturbation::ALL.iter().map(|p| (p.as_str().to_string(), ClassScore::default())).collect();
    let mut shuffle_targets: HashMap<(&Doi, u32), u32> = HashMap::new();
    for s in &truth.shuffles {
        shuffle_targets.insert((&s.doi, s.wrong_position), s.true_position);
        let class = owners.get(&s.orcid).map_or(Perturbation::None, |r| r.perturbation);
        let entry = by_class.get_mut(class.as_str()).expect("all classes present");
        entry.injected += 1;
        let covered = |pos: u32| {
            author_at
                .get(&(&s.doi, pos))
                .and_then(|id| researchers.get(id))
                .is_some_and(|r| r.covered)
        };
        if !(covered(s.true_position) && covered(s.wrong_position)) {
            continue;
        }
        entry.detectable += 1;
        match verdicts.get(&(&s.doi, s.wrong_position)) {
            Some(Verdict::Reassign(to)) if *to == s.true_position => {
                entry.recovered += 1;
                entry.reassigned_to_truth += 1;
            }
            Some(Verdict::Drop) => entry.recovered += 1,
            _ => {}
        }
    }
    for c in by_class.values_mut() {
        c.recall = ratio(c.recovered, c.detectable);
        c.reassign_recall = ratio(c.reassigned_to_truth, c.detectable);
    }

    let mut non_keep = 0;
    let mut correct = 0;
    let mut seen = HashSet::new();
    for e in report {
        if e.verdict == Verdict::Keep || !seen.insert((&e.doi, e.position)) {
            continue;
        }
        non_keep += 1;
        let ok = match (shuffle_targets.get(&(&e.doi, e.position)), e.verdict) {
            (Some(_), Verdict::Drop) => true,
            (Some(truth_pos), Verdict::Reassign(to)) => *truth_pos == to,
            _ => false,
        };
        correct += ok as usize;
        if !ok && !shuffle_targets.contains_key(&(&e.doi, e.position)) {
            let class = owners.get(&e.orcid).map_or(Perturbation::None, |r| r.perturbation);
            by_class.get_mut(class.as_str()).expect("all classes present").false_removals += 1;
        }
    }

    let sum = |f: fn(&ClassScore) -> usize| by_class.values().map(f).sum::<usize>();
    let detectable = sum(|c| c.detectable);
    let recovered = sum(|c| c.recovered);
    RepairScore {
        precision: ratio(correct, non_keep),
        recall: ratio(recovered, detectable),
        injected: sum(|c| c.injected),
        detectable,
        recovered,
        reassigned_to_truth: sum(|c| c.reassigned_to_truth),
        non_keep,
        correct_non_keep: correct,
        by_class,
    }
}
