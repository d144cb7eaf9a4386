use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::*;
use crate::ingest::AuthorMention;
use crate::linkage::AssertionTable;

fn doi(s: &str) -> Doi {
    Doi::parse(&format!("10.1000/{s}")).unwrap()
}

fn orcid(n: u64) -> OrcidId {
    OrcidId::from_base_number(n)
}

fn rid(s: &str) -> ResearcherId {
    ResearcherId::new(s)
}

fn paper(name: &str, year: i32, codes: &[&str], n_authors: usize) -> PublicationRecord {
    paper_at(name, year, codes, n_authors, "pub-a", "j1")
}

fn paper_at(name: &str, year: i32, codes: &[&str], n_authors: usize, publisher: &str, journal: &str) -> PublicationRecord {
    PublicationRecord {
        doi: doi(name),
        year,
        journal_id: journal.into(),
        publisher_id: publisher.into(),
        for_codes: codes.iter().map(|c| ForCode::parse(c).unwrap()).collect(),
        authors: (0..n_authors)
            .map(|i| AuthorMention { position: i as u32, given: format!("g{i}"), family: format!("f{i}") })
            .collect(),
    }
}

fn researcher(id: &str, country: &str, dois: &[&str]) -> ResearcherRecord {
    ResearcherRecord {
        researcher_id: rid(id),
        given: String::new(),
        family: id.into(),
        country: CountryCode::parse(country).unwrap(),
        orcid: None,
        publication_dois: dois.iter().map(|d| doi(d)).collect(),
        funder_ids: BTreeSet::new(),
    }
}

fn row(d: &str, o: OrcidId, source: AssertionSource, r: Option<&str>) -> UnifiedAssertion {
    UnifiedAssertion {
        doi: doi(d),
        position: (source == AssertionSource::Crossref).then_some(0),
        orcid: o,
        source,
        authenticated: false,
        researcher_id: r.map(rid),
    }
}

fn table(rows: Vec<UnifiedAssertion>, orcids: &[(&str, OrcidId)]) -> AssertionTable {
    AssertionTable {
        rows,
        researcher_orcids: ResearcherOrcids::from_map(orcids.iter().map(|(r, o)| (rid(r), *o)).collect()),
    }
}

fn spec() -> CohortSpec {
    CohortSpec::default()
}

#[test]
fn cohort_rules() {
    let mut pubs: Vec<PublicationRecord> =
        [2010, 2011, 2012, 2013, 2014, 2016].iter().enumerate().map(|(i, &y)| paper(&format!("a{i}"), y, &["01"], 1)).collect();
    pubs.extend((0..10).map(|i| paper(&format!("b{i}"), 2018, &["01"], 1)));
    let a_dois: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
    let b_dois: Vec<String> = (0..10).map(|i| format!("b{i}")).collect();
    let five: Vec<String> = a_dois[1..].to_vec();
    let rs = vec![
        researcher("veteran", "GB", &a_dois.iter().map(String::as_str).collect::<Vec<_>>()),
        researcher("newcomer", "GB", &b_dois.iter().map(String::as_str).collect::<Vec<_>>()),
        researcher("five", "GB", &five.iter().map(String::as_str).collect::<Vec<_>>()),
    ];
    let t = AssertionTable::default();
    let ctx = MetricsContext::new(&pubs, &rs, &[], &t);
    let cohort = build_cohort(&ctx, &spec());
    // "five" has exactly 5 papers and a 2011 start: fails "more than 5".
    assert_eq!(cohort, [rid("veteran")].into_iter().collect());
}

#[test]
fn adoption_counts_window_assertions_only() {
    let pubs = vec![paper("p", 2016, &["01"], 4), paper("old", 2010, &["01"], 1)];
    let t = table(
        vec![
            row("p", orcid(1), AssertionSource::Crossref, Some("r1")),
            row("p", orcid(2), AssertionSource::OrcidRegistry, Some("r2")),
            row("old", orcid(3), AssertionSource::Crossref, Some("r3")),
        ],
        &[],
    );
    let ctx = MetricsContext::new(&pubs, &[], &[], &t);
    let cohort: BTreeSet<ResearcherId> = ["r1", "r2", "r3", "r4"].iter().map(|r| rid(r)).collect();
    assert_eq!(adoption(&ctx, &cohort, &spec()), Fraction::new(2, 4));
    assert_eq!(adoption(&ctx, &cohort, &spec()).value(), Some(0.5));

    let empty = AssertionTable::default();
    let ctx = MetricsContext::new(&pubs, &[], &[], &empty);
    assert_eq!(adoption(&ctx, &cohort, &spec()).value(), Some(0.0));
}

#[test]
fn completeness_ratio() {
    let names: Vec<String> = (0..10).map(|i| format!("c{i}")).collect();
    let pubs: Vec<PublicationRecord> = names.iter().map(|n| paper(n, 2016, &["01"], 1)).collect();
    let r = researcher("r", "DE", &names.iter().map(String::as_str).collect::<Vec<_>>());
    let o = orcid(7);
    let t = table(
        vec![
            row("c0", o, AssertionSource::Crossref, Some("r")),
            row("c1", o, AssertionSource::OrcidRegistry, None),
            row("c2", o, AssertionSource::OrcidRegistry, Some("r")),
            // Another iD on the same paper does not count.
            row("c3", orcid(8), AssertionSource::Crossref, None),
        ],
        &[("r", o)],
    );
    let ctx = MetricsContext::new(&pubs, std::slice::from_ref(&r), &[], &t);
    assert_eq!(ctx.completeness(&r).unwrap().value(), Some(0.3));

    let all = table(names.iter().map(|n| row(n, o, AssertionSource::OrcidRegistry, Some("r"))).collect(), &[("r", o)]);
    let ctx = MetricsContext::new(&pubs, std::slice::from_ref(&r), &[], &all);
    assert_eq!(ctx.completeness(&r).unwrap().value(), Some(1.0));

    let none = researcher("n", "DE", &[]);
    assert_eq!(ctx.completeness(&none), None);
}

#[test]
fn discipline_mode_and_tie_breaks() {
    let all03: Vec<PublicationRecord> = (0..3).map(|i| paper(&format!("x{i}"), 2015, &["03"], 1)).collect();
    assert_eq!(assign_discipline(&all03.iter().collect::<Vec<_>>()), ForCode::parse("03").ok());

    let mut mixed: Vec<PublicationRecord> = (0..3).map(|i| paper(&format!("s{i}"), 2010, &["06"], 1)).collect();
    mixed.extend((0..2).map(|i| paper(&format!("e{i}"), 2019, &["11"], 1)));
    assert_eq!(assign_discipline(&mixed.iter().collect::<Vec<_>>()), ForCode::parse("06").ok());

    // 2 vs 2 overall; "08" has both papers in the last five years.
    let recent = [
        paper("a", 2008, &["05"], 1),
        paper("b", 2009, &["05"], 1),
        paper("c", 2018, &["08"], 1),
        paper("d", 2019, &["08"], 1),
    ];
    assert_eq!(assign_discipline(&recent.iter().collect::<Vec<_>>()), ForCode::parse("08").ok());

    // Full tie on both counts goes to the lowest code.
    let flat = [paper("a", 2019, &["09", "04"], 1)];
    assert_eq!(assign_discipline(&flat.iter().collect::<Vec<_>>()), ForCode::parse("04").ok());

    assert_eq!(assign_discipline(&[]), None);
}

fn profile(o: OrcidId, created: (i32, u32, u32)) -> OrcidProfile {
    OrcidProfile {
        orcid: o,
        given: String::new(),
        family: "x".into(),
        created: NaiveDate::from_ymd_opt(created.0, created.1, created.2).unwrap(),
        work_dois: BTreeSet::new(),
    }
}

#[test]
fn early_usage_window_is_creation_year_plus_one() {
    let pubs = vec![paper("p13", 2013, &["01"], 1), paper("p15", 2015, &["01"], 1)];
    let (quick, slow) = (orcid(1), orcid(2));
    let rs = vec![researcher("quick", "BR", &["p13"]), researcher("slow", "BR", &["p15"])];
    let profiles = vec![profile(quick, (2012, 6, 1)), profile(slow, (2012, 3, 1))];
    let t = table(
        vec![
            row("p13", quick, AssertionSource::Crossref, Some("quick")),
            row("p15", slow, AssertionSource::Crossref, Some("slow")),
        ],
        &[("quick", quick), ("slow", slow)],
    );
    let ctx = MetricsContext::new(&pubs, &rs, &profiles, &t);
    let inds: Vec<ResearcherIndicators> = rs.iter().map(|r| ctx.indicators(r, &spec())).collect();
    assert!(inds[0].early_use);
    assert!(!inds[1].early_use);

    let rows = early_usage_by_creation_year(&inds, EarlyUsageDenominator::CountryCohort);
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].creation_year, rows[0].used, rows[0].denominator), (2012, 1, 2));
    assert_eq!(rows[0].pct, 50.0);
}

#[test]
fn crossref_only_extremes() {
    let pubs = vec![paper("p", 2019, &["01"], 2), paper("q", 2019, &["01"], 2)];
    let (a, b) = (orcid(1), orcid(2));
    let rs = vec![researcher("a", "IN", &["p"]), researcher("b", "IN", &["q"])];
    let crossref = vec![row("p", a, AssertionSource::Crossref, Some("a")), row("q", b, AssertionSource::Crossref, Some("b"))];

    let synced = {
        let mut rows = crossref.clone();
        rows.push(row("p", a, AssertionSource::OrcidRegistry, Some("a")));
        rows.push(row("q", b, AssertionSource::OrcidRegistry, Some("b")));
        table(rows, &[("a", a), ("b", b)])
    };
    let ctx = MetricsContext::new(&pubs, &rs, &[], &synced);
    let inds: Vec<_> = rs.iter().map(|r| ctx.indicators(r, &spec())).collect();
    let out = crossref_only_share(&inds);
    assert_eq!(out.len(), 1);
    assert_eq!((out[0].crossref_researchers, out[0].crossref_only), (2, 0));

    let unsynced = table(crossref, &[("a", a), ("b", b)]);
    let ctx = MetricsContext::new(&pubs, &rs, &[], &unsynced);
    let inds: Vec<_> = rs.iter().map(|r| ctx.indicators(r, &spec())).collect();
    let out = crossref_only_share(&inds);
    assert_eq!(out[0].pct, 100.0);
}

fn indicator(id: &str, country: &str, funders: &[&str], adopted: bool, completeness: Option<(usize, usize)>) -> ResearcherIndicators {
    ResearcherIndicators {
        researcher_id: rid(id),
        country: CountryCode::parse(country).unwrap(),
        funder_ids: funders.iter().map(|f| f.to_string()).collect(),
        adopted,
        completeness: completeness.map(|(n, d)| Fraction::new(n, d)),
        orcid: None,
        orcid_created: None,
        early_use: false,
        crossref_years: BTreeSet::new(),
        crossref_only_years: BTreeSet::new(),
        discipline: None,
    }
}

#[test]
fn breakdown_pools_and_double_counts_funders() {
    let inds = vec![
        indicator("a", "US", &["nih", "nsf"], true, Some((1, 4))),
        indicator("b", "US", &["nsf"], true, Some((3, 4))),
        indicator("c", "US", &[], false, None),
    ];
    let countries = breakdown(&inds, Dimension::Country);
    assert_eq!(countries.len(), 1);
    let us = &countries[0];
    assert_eq!((us.researchers, us.adopted), (3, 2));
    assert_eq!(us.completeness, Fraction::new(4, 8));
    assert_eq!(us.engagement_pct, 50.0);

    let funders = breakdown(&inds, Dimension::Funder);
    let keys: Vec<(&str, usize)> = funders.iter().map(|r| (r.key.as_str(), r.researchers)).collect();
    assert_eq!(keys, vec![("nih", 1), ("nsf", 2)]);

    let disc = breakdown(&inds, Dimension::Discipline);
    assert_eq!(disc[0].key, groups::UNCLASSIFIED);
}

fn country_row(key: &str, researchers: usize, adopted: usize, completeness: (usize, usize)) -> MetricsRow {
    let c = Fraction::new(completeness.0, completeness.1);
    MetricsRow {
        key: key.into(),
        researchers,
        adopted,
        adoption_pct: Fraction::new(adopted, researchers).pct(),
        completeness: c,
        engagement_pct: c.pct(),
    }
}

#[test]
fn single_country_band_pooled_equals_median() {
    let rows = vec![country_row("NG", 10, 3, (1, 2)), country_row("ET", 4, 1, (0, 1))];
    let bands: BTreeMap<String, String> =
        [("NG", "Lower middle"), ("ET", "Low")].iter().map(|(c, b)| (c.to_string(), b.to_string())).collect();
    for r in income_band_rollup(&rows, &bands) {
        assert_eq!(r.adoption_pct, r.median_adoption_pct);
    }
}

#[test]
fn income_band_high_row_fixture() {
    // Three countries chosen so the band reproduces a known table row.
    let rows = vec![
        country_row("US", 1_000_000, 405_200, (200_000, 500_000)),
        country_row("DE", 1_700_000, 632_601, (181_400, 500_000)),
        country_row("AU", 19_500, 9_750, (0, 0)),
    ];
    let bands: BTreeMap<String, String> =
        ["US", "DE", "AU"].iter().map(|c| (c.to_string(), "High".to_string())).collect();
    let out = income_band_rollup(&rows, &bands);
    assert_eq!(out.len(), 1);
    let r = &out[0];
    let line = format!(
        "{},{},{:.2},{:.2},{:.2}",
        r.band, r.researchers, r.adoption_pct, r.median_adoption_pct, r.completeness_pct
    );
    assert_eq!(line, "High,2719500,38.52,40.52,38.14");
}

#[test]
fn authors_per_paper_means() {
    let pubs = vec![paper("a", 2019, &["01"], 3), paper("b", 2019, &["01", "02"], 3)];
    let rows = avg_authors_per_paper(&pubs);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.mean_authors == 3.0));
    assert_eq!(rows[0].papers, 2);
    assert_eq!(rows[1].papers, 1);
}

fn crossref(d: &str, pos: u32, o: OrcidId) -> CrossrefAssertion {
    CrossrefAssertion { doi: doi(d), author_position: pos, orcid: o, authenticated: false }
}

#[test]
fn journal_support_counts_distinct_journals() {
    let pubs = vec![
        paper_at("a", 2019, &["01"], 1, "p1", "j1"),
        paper_at("b", 2019, &["01"], 1, "p1", "j1"),
        paper_at("c", 2019, &["01"], 1, "p1", "j2"),
    ];
    let none = journal_orcid_support(&pubs, &[]);
    assert_eq!(none, vec![JournalSupportRow { publisher: "p1".into(), year: 2019, journals: 0 }]);
    let one = journal_orcid_support(&pubs, &[crossref("a", 0, orcid(1))]);
    assert_eq!(one[0].journals, 1);
    let both = journal_orcid_support(&pubs, &[crossref("a", 0, orcid(1)), crossref("b", 0, orcid(2))]);
    assert_eq!(both[0].journals, 1);
}

#[test]
fn orcid_distribution_shares() {
    let pubs = vec![
        paper_at("a", 2019, &["01"], 4, "p1", "j1"),
        paper_at("b", 2019, &["01"], 4, "p1", "j1"),
        paper_at("small", 2019, &["01"], 3, "p1", "j1"),
        paper_at("c", 2019, &["01"], 5, "p2", "j2"),
    ];
    let rows = orcid_count_distribution(&pubs, &[], 2019, 4, 20);
    assert!(rows.iter().all(|r| r.share_0 == 1.0));

    let rows = orcid_count_distribution(&pubs, &[crossref("c", 0, orcid(1)), crossref("c", 1, orcid(2))], 2019, 4, 20);
    assert_eq!(rows[0].publisher, "p2");
    assert_eq!(rows[0].share_2plus, 1.0);
    assert_eq!(rows[1].papers, 2);
    for r in &rows {
        assert!((r.share_0 + r.share_1 + r.share_2plus - 1.0).abs() < 1e-12);
    }
    assert_eq!(orcid_count_distribution(&pubs, &[], 2019, 4, 1).len(), 1);
}

#[test]
fn fraction_edge_cases() {
    assert_eq!(Fraction::new(0, 0).value(), None);
    assert_eq!(Fraction::new(0, 0).pct(), 0.0);
    assert_eq!(Fraction::new(1, 2) + Fraction::new(1, 2), Fraction::new(2, 4));
}
