//! Name-based resolution of suspect assertions and application of the
//! resulting verdicts.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detect::{Criteria, SuspectFlag};
use super::ratio::levenshtein_ratio;
use crate::ingest::{CrossrefAssertion, Doi, OrcidId, OrcidProfile, PublicationRecord};
use crate::names::{full_name, normalize_name};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairConfig {
    /// Asserted-author score at or above which the Crossref match is kept.
    pub keep_threshold: f64,
    /// Another author must score strictly above this to receive the ORCID.
    pub reassign_threshold: f64,
    /// Authors with a name part shorter than this (in characters) are never
    /// reassignment targets. An empty given name is not checked.
    pub min_name_part_len: usize,
    /// Accept an (ORCID, author name) pairing seen at two or more publishers.
    pub rescue: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { keep_threshold: 0.70, reassign_threshold: 0.90, min_name_part_len: 2, rescue: true }
    }
}

impl RepairConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("keep_threshold", self.keep_threshold), ("reassign_threshold", self.reassign_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be within [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Keep,
    Reassign(u32),
    Drop,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Keep => f.write_str("KEEP"),
            Verdict::Reassign(p) => write!(f, "REASSIGN:{p}"),
            Verdict::Drop => f.write_str("DROP"),
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "KEEP" => Ok(Verdict::Keep),
            "DROP" => Ok(Verdict::Drop),
            _ => s
                .strip_prefix("REASSIGN:")
                .and_then(|p| p.parse().ok())
                .map(Verdict::Reassign)
                .ok_or_else(|| format!("unknown verdict {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepairReason {
    ScoreKeep,
    ScoreReassign,
    MultiPublisherRescue,
    Unrecoverable,
}

impl RepairReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RepairReason::ScoreKeep => "SCORE_KEEP",
            RepairReason::ScoreReassign => "SCORE_REASSIGN",
            RepairReason::MultiPublisherRescue => "MULTI_PUBLISHER_RESCUE",
            RepairReason::Unrecoverable => "UNRECOVERABLE",
        }
    }
}

impl fmt::Display for RepairReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub doi: Doi,
    pub position: u32,
    pub orcid: OrcidId,
    pub criteria: Criteria,
    pub verdict: Verdict,
    pub best_score: Option<f64>,
    pub reason: RepairReason,
}

/// Distinct publishers on which each (ORCID, normalized author name) pairing
/// has been asserted.
#[derive(Debug, Default)]
pub struct PublisherHistory {
    publishers: HashMap<(OrcidId, String), BTreeSet<String>>,
}

impl PublisherHistory {
    /// Indexes every assertion whose ORCID is in `orcids`; other ORCIDs are
    /// never queried.
    pub fn build(assertions: &[CrossrefAssertion], publications: &[PublicationRecord], orcids: &HashSet<OrcidId>) -> Self {
        let by_doi: HashMap<&Doi, &PublicationRecord> = publications.iter().map(|p| (&p.doi, p)).collect();
        let mut publishers: HashMap<(OrcidId, String), BTreeSet<String>> = HashMap::new();
        for a in assertions.iter().filter(|a| orcids.contains(&a.orcid)) {
            let Some(p) = by_doi.get(&a.doi) else { continue };
            let Some(author) = p.author(a.author_position) else { continue };
            publishers
                .entry((a.orcid, full_name(&author.given, &author.family)))
                .or_default()
                .insert(p.publisher_id.clone());
        }
        PublisherHistory { publishers }
    }

    pub fn publisher_count(&self, orcid: OrcidId, normalized_name: &str) -> usize {
        // Key must be owned for the lookup; names are short.
        self.publishers
            .get(&(orcid, normalized_name.to_string()))
            .map_or(0, BTreeSet::len)
    }
}

fn eligible_target(given: &str, family: &str, min_len: usize) -> bool {
    let given = normalize_name(given);
    let family = normalize_name(family);
    family.chars().count() >= min_len && (given.is_empty() || given.chars().count() >= min_len)
}

/// Decides one suspect assertion.
///
/// Rules run in order: keep when the profile name matches the asserted
/// author; reassign when exactly one other author matches above the
/// reassignment threshold; keep when the pairing recurs across publishers;
/// otherwise drop.
pub fn resolve_suspect(
    flag: &SuspectFlag,
    publication: &PublicationRecord,
    profile: Option<&OrcidProfile>,
    history: &PublisherHistory,
    config: &RepairConfig,
) -> RepairOutcome {
    let outcome = |verdict, best_score, reason| RepairOutcome {
        doi: flag.doi.clone(),
        position: flag.position,
        orcid: flag.orcid,
        criteria: flag.criteria.clone(),
        verdict,
        best_score,
        reason,
    };
    let (Some(profile), Some(asserted)) = (profile, publication.author(flag.position)) else {
        return outcome(Verdict::Drop, None, RepairReason::Unrecoverable);
    };

    let profile_name = full_name(&profile.given, &profile.family);
    let asserted_name = full_name(&asserted.given, &asserted.family);
    let asserted_score = levenshtein_ratio(&profile_name, &asserted_name);
    if asserted_score >= config.keep_threshold {
        return outcome(Verdict::Keep, Some(asserted_score), RepairReason::ScoreKeep);
    }

    let mut best: Option<(f64, u32)> = None;
    let mut tied = false;
    let mut best_any = asserted_score;
    for other in publication.authors.iter().filter(|a| a.position != flag.position) {
        let score = levenshtein_ratio(&profile_name, &full_name(&other.given, &other.family));
        best_any = best_any.max(score);
        if !eligible_target(&other.given, &other.family, config.min_name_part_len) {
            continue;
        }
        match best {
            Some((s, _)) if score < s => {}
            Some((s, _)) if score == s => tied = true,
            _ => {
                best = Some((score, other.position));
                tied = false;
            }
        }
    }
    if let Some((score, position)) = best {
        if score > config.reassign_threshold {
            return if tied {
                outcome(Verdict::Drop, Some(score), RepairReason::Unrecoverable)
            } else {
                outcome(Verdict::Reassign(position), Some(score), RepairReason::ScoreReassign)
            };
        }
    }

    if config.rescue && history.publisher_count(flag.orcid, &asserted_name) >= 2 {
        return outcome(Verdict::Keep, Some(asserted_score), RepairReason::MultiPublisherRescue);
    }
    outcome(Verdict::Drop, Some(best_any), RepairReason::Unrecoverable)
}

/// Resolves every flag against the publication and profile tables.
pub fn resolve_all(
    flags: &[SuspectFlag],
    assertions: &[CrossrefAssertion],
    publications: &[PublicationRecord],
    profiles: &[OrcidProfile],
    config: &RepairConfig,
) -> Vec<RepairOutcome> {
    let by_doi: HashMap<&Doi, &PublicationRecord> = publications.iter().map(|p| (&p.doi, p)).collect();
    let by_orcid: HashMap<OrcidId, &OrcidProfile> = profiles.iter().map(|p| (p.orcid, p)).collect();
    let flagged_orcids: HashSet<OrcidId> = flags.iter().map(|f| f.orcid).collect();
    let history = PublisherHistory::build(assertions, publications, &flagged_orcids);
    flags
        .par_iter()
        .map(|f| match by_doi.get(&f.doi) {
            Some(p) => resolve_suspect(f, p, by_orcid.get(&f.orcid).copied(), &history, config),
            None => RepairOutcome {
                doi: f.doi.clone(),
                position: f.position,
                orcid: f.orcid,
                criteria: f.criteria.clone(),
                verdict: Verdict::Drop,
                best_score: None,
                reason: RepairReason::Unrecoverable,
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RepairStats {
    pub total_assertions: usize,
    pub flagged: usize,
    pub kept: usize,
    pub reassigned: usize,
    pub dropped: usize,
    /// Percent of all assertions removed.
    pub pct_removed: f64,
    /// Percent of all assertions moved to another author.
    pub pct_reassigned: f64,
}

/// Result of [`apply_repairs`]. `outcomes` are the final verdicts: a
/// reassignment whose target is still occupied, or claimed by another
/// reassignment, becomes a drop.
#[derive(Debug, Clone)]
pub struct Repaired {
    pub assertions: Vec<CrossrefAssertion>,
    pub outcomes: Vec<RepairOutcome>,
    pub stats: RepairStats,
}

pub fn apply_repairs(assertions: &[CrossrefAssertion], outcomes: &[RepairOutcome]) -> Repaired {
    let verdicts: HashMap<(&Doi, u32), usize> =
        outcomes.iter().enumerate().map(|(i, o)| ((&o.doi, o.position), i)).collect();

    let mut staying: Vec<CrossrefAssertion> = Vec::with_capacity(assertions.len());
    let mut moving: Vec<(&CrossrefAssertion, usize, u32)> = Vec::new();
    for a in assertions {
        match verdicts.get(&(&a.doi, a.author_position)).map(|&i| (i, outcomes[i].verdict)) {
            None | Some((_, Verdict::Keep)) => staying.push(a.clone()),
            Some((i, Verdict::Reassign(to))) => moving.push((a, i, to)),
            Some((_, Verdict::Drop)) => {}
        }
    }

    let occupied: HashSet<(&Doi, u32)> = staying.iter().map(|a| (&a.doi, a.author_position)).collect();
    let mut claims: HashMap<(&Doi, u32), usize> = HashMap::new();
    for (a, _, to) in &moving {
        *claims.entry((&a.doi, *to)).or_default() += 1;
    }

    let mut final_outcomes = outcomes.to_vec();
    let mut placed = Vec::with_capacity(moving.len());
    for (a, i, to) in &moving {
        let target = (&a.doi, *to);
        if occupied.contains(&target) || claims[&target] > 1 {
            final_outcomes[*i].verdict = Verdict::Drop;
            final_outcomes[*i].reason = RepairReason::Unrecoverable;
        } else {
            placed.push(CrossrefAssertion { doi: a.doi.clone(), author_position: *to, orcid: a.orcid, authenticated: a.authenticated });
        }
    }
    drop(occupied);
    staying.extend(placed);
    staying.par_sort_unstable_by(|a, b| (&a.doi, a.author_position).cmp(&(&b.doi, b.author_position)));

    let count = |pred: fn(&Verdict) -> bool| final_outcomes.iter().filter(|o| pred(&o.verdict)).count();
    let kept = count(|v| *v == Verdict::Keep);
    let reassigned = count(|v| matches!(v, Verdict::Reassign(_)));
    let dropped = count(|v| *v == Verdict::Drop);
    let total = assertions.len();
    let pct = |n: usize| if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
    let stats = RepairStats {
        total_assertions: total,
        flagged: final_outcomes.len(),
        kept,
        reassigned,
        dropped,
        pct_removed: pct(dropped),
        pct_reassigned: pct(reassigned),
    };
    Repaired { assertions: staying, outcomes: final_outcomes, stats }
}
