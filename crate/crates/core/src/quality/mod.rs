//! Detection and repair of shuffled Crossref ORCID assertions, i.e. an ORCID
//! attached to the wrong author position on a paper.

mod detect;
mod rate;
mod ratio;
mod repair;

pub use detect::{detect_self_collaboration, flag_suspects, Criteria, Criterion, SuspectFlag, SuspectIndex};
pub use rate::{estimate_shuffle_rate, ShuffleRatePoint, ShuffleRateSeries};
pub use ratio::{levenshtein_ratio, weighted_edit_distance};
pub use repair::{
    apply_repairs, resolve_all, resolve_suspect, PublisherHistory, RepairConfig, RepairOutcome, RepairReason,
    RepairStats, Repaired, Verdict,
};

use crate::ingest::{CrossrefAssertion, OrcidProfile, PublicationRecord, ResearcherRecord};
use crate::linkage::Linkage;

/// Flag, resolve and apply in one step.
#[derive(Debug, Clone)]
pub struct RepairRun {
    pub flags: Vec<SuspectFlag>,
    pub repaired: Repaired,
}

pub fn repair_crossref(
    assertions: &[CrossrefAssertion],
    linkage: &Linkage,
    publications: &[PublicationRecord],
    profiles: &[OrcidProfile],
    researchers: &[ResearcherRecord],
    config: &RepairConfig,
) -> RepairRun {
    let flags = flag_suspects(assertions, linkage, researchers);
    let outcomes = resolve_all(&flags, assertions, publications, profiles, config);
    let repaired = apply_repairs(assertions, &outcomes);
    log::info!(
        "repair: {} flagged, {} kept, {} reassigned, {} dropped of {} assertions",
        repaired.stats.flagged,
        repaired.stats.kept,
        repaired.stats.reassigned,
        repaired.stats.dropped,
        repaired.stats.total_assertions
    );
    RepairRun { flags, repaired }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashSet};

    use chrono::NaiveDate;
    use proptest::prelude::*;

    use super::*;
    use crate::ingest::{AuthorMention, CountryCode, Doi, OrcidId, ResearcherId};
    use crate::linkage::link_crossref_authors;

    /// Quadratic edit-distance table with explicit operation costs
    /// (insert 1, delete 1, substitute 2).
    fn oracle_ratio(a: &str, b: &str) -> f64 {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = if a[i - 1] == b[j - 1] { 0 } else { 2 };
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
            }
        }
        let total = a.len() + b.len();
        if total == 0 {
            1.0
        } else {
            (total - d[a.len()][b.len()]) as f64 / total as f64
        }
    }

    fn doi(s: &str) -> Doi {
        Doi::parse(s).unwrap()
    }

    fn orcid(n: u64) -> OrcidId {
        OrcidId::from_base_number(n)
    }

    fn publication(d: &str, publisher: &str, names: &[&str]) -> PublicationRecord {
        PublicationRecord {
            doi: doi(d),
            year: 2018,
            journal_id: format!("{publisher}-j"),
            publisher_id: publisher.into(),
            for_codes: BTreeSet::new(),
            authors: names
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let (g, f) = n.split_once(' ').unwrap_or(("", n));
                    AuthorMention { position: i as u32, given: g.into(), family: f.into() }
                })
                .collect(),
        }
    }

    fn researcher(id: &str, name: &str, dois: &[&str], registered: Option<OrcidId>) -> ResearcherRecord {
        let (g, f) = name.split_once(' ').unwrap();
        ResearcherRecord {
            researcher_id: ResearcherId::new(id),
            given: g.into(),
            family: f.into(),
            country: CountryCode::parse("PT").unwrap(),
            orcid: registered,
            publication_dois: dois.iter().map(|d| doi(d)).collect(),
            funder_ids: BTreeSet::new(),
        }
    }

    fn assertion(d: &str, position: u32, o: OrcidId) -> CrossrefAssertion {
        CrossrefAssertion { doi: doi(d), author_position: position, orcid: o, authenticated: false }
    }

    fn profile(o: OrcidId, name: &str) -> OrcidProfile {
        let (g, f) = name.split_once(' ').unwrap_or(("", name));
        OrcidProfile {
            orcid: o,
            given: g.into(),
            family: f.into(),
            created: NaiveDate::from_ymd_opt(2014, 3, 1).unwrap(),
            work_dois: BTreeSet::new(),
        }
    }

    fn flag(d: &str, position: u32, o: OrcidId) -> SuspectFlag {
        SuspectFlag { doi: doi(d), position, orcid: o, criteria: Criteria([Criterion::SelfCollab].into_iter().collect()) }
    }

    #[test]
    fn ratio_oracle_examples() {
        assert_eq!(oracle_ratio("kitten", "sitting"), 8.0 / 13.0);
        assert_eq!(oracle_ratio("", "abc"), 0.0);
        assert_eq!(oracle_ratio("anna silva", "anna silva"), 1.0);
    }

    proptest! {
        #[test]
        fn ratio_matches_oracle(a in "[a-e ]{0,20}", b in "[a-e ]{0,20}") {
            prop_assert_eq!(levenshtein_ratio(&a, &b), oracle_ratio(&a, &b));
        }

        #[test]
        fn ratio_is_symmetric_and_bounded(a in "\\PC{0,12}", b in "\\PC{0,12}") {
            let r = levenshtein_ratio(&a, &b);
            prop_assert_eq!(r, levenshtein_ratio(&b, &a));
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert_eq!(levenshtein_ratio(&a, &a), 1.0);
        }
    }

    /// R1 holds O. O is also asserted on R2 elsewhere, and both are on P.
    fn self_collab_corpus() -> (Vec<PublicationRecord>, Vec<ResearcherRecord>, Vec<CrossrefAssertion>) {
        let pubs = vec![
            publication("10.1/p", "pa", &["lucia ferreira", "tomasz nowak", "kenji watanabe"]),
            publication("10.1/q", "pa", &["kenji watanabe"]),
        ];
        let rs = vec![
            researcher("r1", "tomasz nowak", &["10.1/p"], None),
            researcher("r2", "kenji watanabe", &["10.1/p", "10.1/q"], None),
        ];
        let asserts = vec![assertion("10.1/p", 1, orcid(5)), assertion("10.1/q", 0, orcid(5))];
        (pubs, rs, asserts)
    }

    #[test]
    fn self_collaboration_is_flagged() {
        let (pubs, rs, asserts) = self_collab_corpus();
        let linkage = link_crossref_authors(&pubs, &rs);
        let flags = detect_self_collaboration(&asserts, &linkage);
        assert_eq!(flags.len(), 1);
        assert_eq!((flags[0].doi.as_str(), flags[0].position), ("10.1/p", 1));
    }

    #[test]
    fn one_researcher_per_orcid_is_clean() {
        let pubs = vec![publication("10.1/p", "pa", &["lucia ferreira", "tomasz nowak"])];
        let rs = vec![
            researcher("r1", "lucia ferreira", &["10.1/p"], Some(orcid(1))),
            researcher("r2", "tomasz nowak", &["10.1/p"], Some(orcid(2))),
        ];
        let asserts = vec![assertion("10.1/p", 0, orcid(1)), assertion("10.1/p", 1, orcid(2))];
        let linkage = link_crossref_authors(&pubs, &rs);
        assert!(detect_self_collaboration(&asserts, &linkage).is_empty());
        assert!(flag_suspects(&asserts, &linkage, &rs).is_empty());
    }

    #[test]
    fn registry_disagreement_and_missing_researcher() {
        let pubs = vec![publication("10.1/p", "pa", &["lucia ferreira", "tomasz nowak"])];
        let rs = vec![researcher("r1", "lucia ferreira", &["10.1/p"], Some(orcid(1)))];
        let asserts = vec![assertion("10.1/p", 0, orcid(2)), assertion("10.1/p", 1, orcid(3))];
        let linkage = link_crossref_authors(&pubs, &rs);
        let flags = flag_suspects(&asserts, &linkage, &rs);
        assert_eq!(flags.len(), 2);
        assert!(flags[0].criteria.contains(Criterion::RegistryDisagrees));
        assert!(!flags[0].criteria.contains(Criterion::NoResearcherForOrcid));
        assert!(flags[1].criteria.contains(Criterion::NoResearcherForOrcid));
        assert!(!flags[1].criteria.contains(Criterion::RegistryDisagrees));
    }

    #[test]
    fn registry_owner_elsewhere_disagrees() {
        // Registry says O belongs to r1 at position 0, Crossref puts it on r2.
        let pubs = vec![publication("10.1/p", "pa", &["lucia ferreira", "tomasz nowak"])];
        let rs = vec![
            researcher("r1", "lucia ferreira", &["10.1/p"], Some(orcid(1))),
            researcher("r2", "tomasz nowak", &["10.1/p"], None),
        ];
        let asserts = vec![assertion("10.1/p", 1, orcid(1))];
        let linkage = link_crossref_authors(&pubs, &rs);
        let flags = flag_suspects(&asserts, &linkage, &rs);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].criteria.to_string(), "REGISTRY_DISAGREES");
    }

    #[test]
    fn multiple_orcids_on_one_researcher() {
        let pubs = vec![
            publication("10.1/p", "pa", &["lucia ferreira"]),
            publication("10.1/q", "pa", &["lucia ferreira"]),
        ];
        let rs = vec![researcher("r1", "lucia ferreira", &["10.1/p", "10.1/q"], None)];
        let asserts = vec![assertion("10.1/p", 0, orcid(1)), assertion("10.1/q", 0, orcid(2))];
        let linkage = link_crossref_authors(&pubs, &rs);
        let flags = flag_suspects(&asserts, &linkage, &rs);
        assert_eq!(flags.len(), 2);
        assert!(flags.iter().all(|f| f.criteria.contains(Criterion::MultiOrcidPerResearcher)));
    }

    #[test]
    fn keep_when_asserted_author_matches() {
        let p = publication("10.1/p", "pa", &["maria santos", "ana silva"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "maria santos")), &PublisherHistory::default(), &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Keep);
        assert_eq!(out.best_score, Some(1.0));
        assert_eq!(out.reason, RepairReason::ScoreKeep);
    }

    #[test]
    fn reassign_to_matching_coauthor() {
        assert!(oracle_ratio("wei zhang", "ana silva") < 0.70);
        assert_eq!(oracle_ratio("wei zhang", "wei zhang"), 1.0);
        let p = publication("10.1/p", "pa", &["ana silva", "wei zhang"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "wei zhang")), &PublisherHistory::default(), &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Reassign(1));
        assert_eq!(out.best_score, Some(1.0));
        assert_eq!(out.reason, RepairReason::ScoreReassign);
    }

    #[test]
    fn rescue_native_script_profile() {
        let pubs = vec![
            publication("10.1/p", "pa", &["fang wang", "ana silva"]),
            publication("10.1/q", "pb", &["fang wang"]),
        ];
        let asserts = vec![assertion("10.1/p", 0, orcid(1)), assertion("10.1/q", 0, orcid(1))];
        let prof = profile(orcid(1), "芳 王");
        let history = PublisherHistory::build(&asserts, &pubs, &[orcid(1)].into_iter().collect());
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &pubs[0], Some(&prof), &history, &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Keep);
        assert_eq!(out.reason, RepairReason::MultiPublisherRescue);

        let no_rescue = RepairConfig { rescue: false, ..RepairConfig::default() };
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &pubs[0], Some(&prof), &history, &no_rescue);
        assert_eq!(out.verdict, Verdict::Drop);

        // Same publisher twice is not enough.
        let pubs_same = vec![pubs[0].clone(), publication("10.1/q", "pa", &["fang wang"])];
        let history = PublisherHistory::build(&asserts, &pubs_same, &[orcid(1)].into_iter().collect());
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &pubs_same[0], Some(&prof), &history, &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Drop);
    }

    #[test]
    fn tie_at_reassignment_drops() {
        let p = publication("10.1/p", "pa", &["ana silva", "wei zhang", "wei zhang"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "wei zhang")), &PublisherHistory::default(), &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Drop);
        assert_eq!(out.reason, RepairReason::Unrecoverable);
    }

    #[test]
    fn reassignment_threshold_is_strict() {
        // 2*9/20 = 0.9 exactly
        let (a, b) = ("abcdefghij", "abcdefghiz");
        assert_eq!(oracle_ratio(a, b), 0.9);
        let p = publication("10.1/p", "pa", &["zz qqqqqqqq", "x abcdefghiz"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "x abcdefghij")), &PublisherHistory::default(), &RepairConfig::default());
        assert!(out.best_score.unwrap() > 0.9);
        let cfg = RepairConfig { reassign_threshold: out.best_score.unwrap(), ..RepairConfig::default() };
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "x abcdefghij")), &PublisherHistory::default(), &cfg);
        assert_eq!(out.verdict, Verdict::Drop);
    }

    #[test]
    fn short_names_are_not_reassignment_targets() {
        let p = publication("10.1/p", "pa", &["ana silva", "w zhang"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "w zhang")), &PublisherHistory::default(), &RepairConfig::default());
        assert_eq!(out.verdict, Verdict::Drop);
        let lax = RepairConfig { min_name_part_len: 1, ..RepairConfig::default() };
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, Some(&profile(orcid(1), "w zhang")), &PublisherHistory::default(), &lax);
        assert_eq!(out.verdict, Verdict::Reassign(1));
    }

    #[test]
    fn missing_profile_drops() {
        let p = publication("10.1/p", "pa", &["ana silva"]);
        let out = resolve_suspect(&flag("10.1/p", 0, orcid(1)), &p, None, &PublisherHistory::default(), &RepairConfig::default());
        assert_eq!((out.verdict, out.reason, out.best_score), (Verdict::Drop, RepairReason::Unrecoverable, None));
    }

    fn outcome(d: &str, position: u32, verdict: Verdict) -> RepairOutcome {
        RepairOutcome {
            doi: doi(d),
            position,
            orcid: orcid(position as u64),
            criteria: Criteria::default(),
            verdict,
            best_score: None,
            reason: RepairReason::ScoreKeep,
        }
    }

    #[test]
    fn no_flags_is_identity() {
        let asserts = vec![assertion("10.1/a", 0, orcid(1)), assertion("10.1/b", 2, orcid(2))];
        let r = apply_repairs(&asserts, &[]);
        assert_eq!(r.assertions, asserts);
        assert_eq!(r.stats.pct_removed, 0.0);
        assert_eq!(r.stats.flagged, 0);
    }

    #[test]
    fn drop_percentage() {
        let asserts: Vec<_> = (0..1000).map(|i| assertion(&format!("10.1/{i}"), 0, orcid(i))).collect();
        let outcomes: Vec<_> = (0..100).map(|i| outcome(&format!("10.1/{i}"), 0, Verdict::Drop)).collect();
        let r = apply_repairs(&asserts, &outcomes);
        assert_eq!(r.assertions.len(), 900);
        assert_eq!(r.stats.pct_removed, 10.0);
        assert_eq!(r.stats.dropped + r.stats.kept + r.stats.reassigned, r.stats.flagged);
    }

    #[test]
    fn reassignment_never_displaces() {
        let asserts = vec![
            assertion("10.1/a", 0, orcid(1)),
            assertion("10.1/a", 1, orcid(2)),
            assertion("10.1/a", 2, orcid(3)),
            assertion("10.1/b", 0, orcid(4)),
            assertion("10.1/b", 1, orcid(5)),
        ];
        let outcomes = vec![
            // target 1 is kept -> drop
            outcome("10.1/a", 0, Verdict::Reassign(1)),
            // target 3 is free -> moves
            outcome("10.1/a", 2, Verdict::Reassign(3)),
            // swap within b: both targets vacate
            outcome("10.1/b", 0, Verdict::Reassign(1)),
            outcome("10.1/b", 1, Verdict::Reassign(0)),
        ];
        let r = apply_repairs(&asserts, &outcomes);
        let keys: Vec<_> = r.assertions.iter().map(|a| (a.doi.as_str().to_string(), a.author_position, a.orcid)).collect();
        assert_eq!(
            keys,
            vec![
                ("10.1/a".into(), 1, orcid(2)),
                ("10.1/a".into(), 3, orcid(3)),
                ("10.1/b".into(), 0, orcid(5)),
                ("10.1/b".into(), 1, orcid(4)),
            ]
        );
        assert_eq!(r.outcomes[0].verdict, Verdict::Drop);
        assert_eq!((r.stats.reassigned, r.stats.dropped), (3, 1));
    }

    #[test]
    fn competing_reassignments_both_drop() {
        let asserts = vec![assertion("10.1/a", 0, orcid(1)), assertion("10.1/a", 1, orcid(2))];
        let outcomes = vec![outcome("10.1/a", 0, Verdict::Reassign(2)), outcome("10.1/a", 1, Verdict::Reassign(2))];
        let r = apply_repairs(&asserts, &outcomes);
        assert!(r.assertions.is_empty());
        assert_eq!(r.stats.dropped, 2);
    }

    #[test]
    fn estimator_counts_per_year() {
        let (pubs, rs, asserts) = self_collab_corpus();
        let linkage = link_crossref_authors(&pubs, &rs);
        let series = estimate_shuffle_rate(&asserts, &linkage, &pubs);
        assert_eq!(series.points.len(), 1);
        assert_eq!((series.points[0].flagged, series.points[0].total), (1, 2));
        assert_eq!(series.overall(), 0.5);
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        ("[a-f]{1,6}", "[a-f]{2,8}").prop_map(|(g, f)| format!("{g} {f}"))
    }

    proptest! {
        #[test]
        fn raising_keep_threshold_never_creates_keeps(
            names in prop::collection::vec(name_strategy(), 1..6),
            profile_name in name_strategy(),
            position in 0usize..6,
            t1 in 0.0f64..1.0,
            bump in 0.0f64..0.5,
        ) {
            let position = (position % names.len()) as u32;
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let p = publication("10.1/p", "pa", &refs);
            let prof = profile(orcid(1), &profile_name);
            let f = flag("10.1/p", position, orcid(1));
            let low = RepairConfig { keep_threshold: t1, ..RepairConfig::default() };
            let high = RepairConfig { keep_threshold: (t1 + bump).min(1.0), ..RepairConfig::default() };
            let h = PublisherHistory::default();
            let v_low = resolve_suspect(&f, &p, Some(&prof), &h, &low).verdict;
            let v_high = resolve_suspect(&f, &p, Some(&prof), &h, &high).verdict;
            if v_high == Verdict::Keep {
                prop_assert_eq!(v_low, Verdict::Keep);
            }
            if v_low != Verdict::Keep {
                prop_assert_eq!(v_high, v_low);
            }
        }

        #[test]
        fn repair_is_order_invariant_and_never_grows(seed in 0u64..1000) {
            let (pubs, rs, mut asserts) = self_collab_corpus();
            asserts.push(assertion("10.1/p", 2, orcid(9)));
            let profiles = vec![profile(orcid(5), "kenji watanabe"), profile(orcid(9), "lucia ferreira")];
            let linkage = link_crossref_authors(&pubs, &rs);
            let cfg = RepairConfig::default();
            let a = repair_crossref(&asserts, &linkage, &pubs, &profiles, &rs, &cfg);
            let mut shuffled = asserts.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            if seed % 2 == 0 { shuffled.reverse(); }
            let b = repair_crossref(&shuffled, &linkage, &pubs, &profiles, &rs, &cfg);
            prop_assert_eq!(&a.repaired.assertions, &b.repaired.assertions);
            prop_assert!(a.repaired.assertions.len() <= asserts.len());
            let keys: HashSet<_> = a.repaired.assertions.iter().map(|x| (x.doi.clone(), x.author_position)).collect();
            prop_assert_eq!(keys.len(), a.repaired.assertions.len());
        }
    }
}
