//! Author-level join of publications, Crossref assertions and the researcher
//! registry, and the union of Crossref and ORCID-registry assertions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{CrossrefAssertion, Doi, OrcidId, OrcidProfile, PublicationRecord, ResearcherId, ResearcherRecord};
use crate::names::full_name;

/// One author mention with whatever identity could be attached to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkedAuthor {
    pub doi: Doi,
    pub position: u32,
    pub researcher_id: Option<ResearcherId>,
    pub orcid_crossref: Option<OrcidId>,
    pub authenticated: Option<bool>,
}

/// Result of [`link_crossref_authors`]: one row per author mention, sorted
/// by `(doi, position)`.
#[derive(Debug, Clone, Default)]
pub struct Linkage {
    pub authors: Vec<LinkedAuthor>,
    /// Mentions with two or more same-named registry candidates.
    pub ambiguous: usize,
    pub linked: usize,
    rows_by_doi: HashMap<Doi, (usize, u32)>,
}

impl Linkage {
    pub fn rows_for(&self, doi: &Doi) -> &[LinkedAuthor] {
        match self.rows_by_doi.get(doi) {
            Some(&(start, len)) => &self.authors[start..start + len as usize],
            None => &[],
        }
    }

    pub fn row(&self, doi: &Doi, position: u32) -> Option<&LinkedAuthor> {
        self.rows_for(doi).get(position as usize)
    }

    pub fn researcher_at(&self, doi: &Doi, position: u32) -> Option<&ResearcherId> {
        self.row(doi, position).and_then(|r| r.researcher_id.as_ref())
    }

    /// Researchers linked anywhere on the paper.
    pub fn researchers_on<'a>(&'a self, doi: &Doi) -> impl Iterator<Item = &'a ResearcherId> + 'a {
        self.rows_for(doi).iter().filter_map(|r| r.researcher_id.as_ref())
    }

    pub fn contains_mention(&self, doi: &Doi, position: u32) -> bool {
        self.row(doi, position).is_some()
    }

    /// Copies ORCID claims onto the matching author rows. Assertions that
    /// point at unknown mentions are ignored and counted.
    pub fn attach_assertions(&mut self, assertions: &[CrossrefAssertion]) -> usize {
        for row in &mut self.authors {
            row.orcid_crossref = None;
            row.authenticated = None;
        }
        let mut orphans = 0;
        for a in assertions {
            match self.rows_by_doi.get(&a.doi) {
                Some(&(start, len)) if a.author_position < len => {
                    let row = &mut self.authors[start + a.author_position as usize];
                    row.orcid_crossref = Some(a.orcid);
                    row.authenticated = Some(a.authenticated);
                }
                _ => orphans += 1,
            }
        }
        orphans
    }
}

/// Attaches a registry researcher to every author mention whose normalized
/// name equals exactly one researcher that lists the DOI.
pub fn link_crossref_authors(publications: &[PublicationRecord], researchers: &[ResearcherRecord]) -> Linkage {
    let names: Vec<String> = researchers.par_iter().map(|r| full_name(&r.given, &r.family)).collect();
    let mut listing: HashMap<&Doi, Vec<usize>> = HashMap::new();
    for (i, r) in researchers.iter().enumerate() {
        for d in &r.publication_dois {
            listing.entry(d).or_default().push(i);
        }
    }

    let mut order: Vec<&PublicationRecord> = publications.iter().collect();
    order.par_sort_unstable_by(|a, b| a.doi.cmp(&b.doi));

    let per_pub: Vec<(Vec<LinkedAuthor>, usize)> = order
        .par_iter()
        .map(|p| {
            let candidates = listing.get(&p.doi).map(Vec::as_slice).unwrap_or(&[]);
            let mut ambiguous = 0;
            let rows = p
                .authors
                .iter()
                .map(|a| {
                    let researcher_id = if candidates.is_empty() {
                        None
                    } else {
                        let name = full_name(&a.given, &a.family);
                        let mut hits = candidates.iter().filter(|&&i| names[i] == name);
                        match (hits.next(), hits.next()) {
                            (Some(&i), None) => Some(researchers[i].researcher_id.clone()),
                            (Some(_), Some(_)) => {
                                ambiguous += 1;
                                None
                            }
                            _ => None,
                        }
                    };
                    LinkedAuthor {
                        doi: p.doi.clone(),
                        position: a.position,
                        researcher_id,
                        orcid_crossref: None,
                        authenticated: None,
                    }
                })
                .collect();
            (rows, ambiguous)
        })
        .collect();

    let mut linkage = Linkage::default();
    linkage.authors.reserve(per_pub.iter().map(|(r, _)| r.len()).sum());
    for (p, (rows, ambiguous)) in order.iter().zip(per_pub) {
        linkage.rows_by_doi.insert(p.doi.clone(), (linkage.authors.len(), rows.len() as u32));
        linkage.ambiguous += ambiguous;
        linkage.linked += rows.iter().filter(|r| r.researcher_id.is_some()).count();
        linkage.authors.extend(rows);
    }
    if linkage.ambiguous > 0 {
        log::info!("{} author mentions left unlinked due to ambiguous names", linkage.ambiguous);
    }
    linkage
}

/// Splits Crossref assertions into those that point at a known author
/// mention and a count of those that do not.
pub fn retain_linkable(publications: &[PublicationRecord], assertions: Vec<CrossrefAssertion>) -> (Vec<CrossrefAssertion>, usize) {
    let authors: HashMap<&Doi, usize> = publications.iter().map(|p| (&p.doi, p.authors.len())).collect();
    let before = assertions.len();
    let kept: Vec<CrossrefAssertion> = assertions
        .into_iter()
        .filter(|a| authors.get(&a.doi).is_some_and(|&n| (a.author_position as usize) < n))
        .collect();
    let dropped = before - kept.len();
    if dropped > 0 {
        log::info!("ignored {dropped} Crossref assertions that do not resolve to a loaded author mention");
    }
    (kept, dropped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssertionSource {
    Crossref,
    OrcidRegistry,
}

impl fmt::Display for AssertionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssertionSource::Crossref => "crossref",
            AssertionSource::OrcidRegistry => "orcid-registry",
        })
    }
}

/// An ORCID-to-publication claim from either source. Registry rows are
/// paper-level and never carry a position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct UnifiedAssertion {
    pub doi: Doi,
    pub position: Option<u32>,
    pub orcid: OrcidId,
    pub source: AssertionSource,
    pub authenticated: bool,
    pub researcher_id: Option<ResearcherId>,
}

/// One registry row per `(orcid, doi)` where the work DOI is a loaded
/// publication. Profile-listed works count as authenticated, since only the
/// record holder or a source they authorized can add them.
pub fn link_orcid_works(profiles: &[OrcidProfile], publications: &[PublicationRecord]) -> Vec<UnifiedAssertion> {
    let known: HashSet<&Doi> = publications.iter().map(|p| &p.doi).collect();
    let mut rows: Vec<UnifiedAssertion> = profiles
        .iter()
        .flat_map(|p| {
            let known = &known;
            p.work_dois.iter().filter(move |d| known.contains(d)).map(move |d| UnifiedAssertion {
                doi: d.clone(),
                position: None,
                orcid: p.orcid,
                source: AssertionSource::OrcidRegistry,
                authenticated: true,
                researcher_id: None,
            })
        })
        .collect();
    rows.par_sort_unstable_by(|a, b| (&a.doi, a.orcid).cmp(&(&b.doi, b.orcid)));
    rows.dedup_by(|a, b| a.doi == b.doi && a.orcid == b.orcid);
    rows
}

/// The ORCID each registry researcher is taken to hold: the registry's own
/// match when present, otherwise the ORCID asserted most often at the
/// researcher's linked author positions (ties go to the lowest iD).
#[derive(Debug, Clone, Default)]
pub struct ResearcherOrcids {
    by_researcher: BTreeMap<ResearcherId, OrcidId>,
    by_orcid: HashMap<OrcidId, Vec<ResearcherId>>,
}

impl ResearcherOrcids {
    pub fn resolve(researchers: &[ResearcherRecord], linkage: &Linkage, crossref: &[CrossrefAssertion]) -> Self {
        let mut counts: HashMap<&ResearcherId, BTreeMap<OrcidId, usize>> = HashMap::new();
        for a in crossref {
            if let Some(r) = linkage.researcher_at(&a.doi, a.author_position) {
                *counts.entry(r).or_default().entry(a.orcid).or_default() += 1;
            }
        }
        let mut by_researcher = BTreeMap::new();
        for r in researchers {
            let chosen = r.orcid.or_else(|| {
                counts.get(&r.researcher_id).and_then(|c| {
                    // max_by_key keeps the last maximum; iterate in reverse
                    // so ties resolve to the lowest iD.
                    c.iter().rev().max_by_key(|(_, &n)| n).map(|(o, _)| *o)
                })
            });
            if let Some(o) = chosen {
                by_researcher.insert(r.researcher_id.clone(), o);
            }
        }
        Self::from_map(by_researcher)
    }

    pub fn from_map(by_researcher: BTreeMap<ResearcherId, OrcidId>) -> Self {
        let mut by_orcid: HashMap<OrcidId, Vec<ResearcherId>> = HashMap::new();
        for (r, o) in &by_researcher {
            by_orcid.entry(*o).or_default().push(r.clone());
        }
        ResearcherOrcids { by_researcher, by_orcid }
    }

    pub fn orcid_of(&self, researcher: &ResearcherId) -> Option<OrcidId> {
        self.by_researcher.get(researcher).copied()
    }

    pub fn researchers_with(&self, orcid: &OrcidId) -> &[ResearcherId] {
        self.by_orcid.get(orcid).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ResearcherId, &OrcidId)> {
        self.by_researcher.iter()
    }

    pub fn len(&self) -> usize {
        self.by_researcher.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_researcher.is_empty()
    }
}

/// Unified assertions plus the researcher-to-ORCID resolution used to build
/// them.
#[derive(Debug, Clone, Default)]
pub struct AssertionTable {
    pub rows: Vec<UnifiedAssertion>,
    pub researcher_orcids: ResearcherOrcids,
}

/// Unions repaired Crossref rows with ORCID-registry rows, deduplicated on
/// `(doi, orcid, source)`.
///
/// Crossref rows take the researcher linked at their (repaired) position.
/// Registry rows take the single researcher who resolves to the ORCID and
/// lists the DOI; they stay unattributed when there is none or several.
pub fn build_assertion_table(
    linkage: &Linkage,
    registry_rows: &[UnifiedAssertion],
    repaired_crossref: &[CrossrefAssertion],
    researchers: &[ResearcherRecord],
) -> AssertionTable {
    let researcher_orcids = ResearcherOrcids::resolve(researchers, linkage, repaired_crossref);
    let listed: HashMap<&ResearcherId, &ResearcherRecord> =
        researchers.iter().map(|r| (&r.researcher_id, r)).collect();

    let mut rows: Vec<UnifiedAssertion> = Vec::with_capacity(repaired_crossref.len() + registry_rows.len());
    rows.extend(repaired_crossref.iter().map(|a| UnifiedAssertion {
        doi: a.doi.clone(),
        position: Some(a.author_position),
        orcid: a.orcid,
        source: AssertionSource::Crossref,
        authenticated: a.authenticated,
        researcher_id: linkage.researcher_at(&a.doi, a.author_position).cloned(),
    }));
    rows.extend(registry_rows.iter().map(|a| {
        let mut owners = researcher_orcids
            .researchers_with(&a.orcid)
            .iter()
            .filter(|r| listed.get(r).is_some_and(|rec| rec.publication_dois.contains(&a.doi)));
        let researcher_id = match (owners.next(), owners.next()) {
            (Some(r), None) => Some(r.clone()),
            _ => None,
        };
        UnifiedAssertion {
            doi: a.doi.clone(),
            position: None,
            orcid: a.orcid,
            source: AssertionSource::OrcidRegistry,
            authenticated: a.authenticated,
            researcher_id,
        }
    }));

    rows.par_sort_unstable_by(|a, b| (&a.doi, a.orcid, a.source, a.position).cmp(&(&b.doi, b.orcid, b.source, b.position)));
    rows.dedup_by(|later, first| later.doi == first.doi && later.orcid == first.orcid && later.source == first.source);
    AssertionTable { rows, researcher_orcids }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AuthorMention, CountryCode};
    use std::collections::BTreeSet;

    fn doi(s: &str) -> Doi {
        Doi::parse(s).unwrap()
    }

    fn publication(d: &str, names: &[(&str, &str)]) -> PublicationRecord {
        PublicationRecord {
            doi: doi(d),
            year: 2018,
            journal_id: "j".into(),
            publisher_id: "p".into(),
            for_codes: BTreeSet::new(),
            authors: names
                .iter()
                .enumerate()
                .map(|(i, (g, f))| AuthorMention { position: i as u32, given: g.to_string(), family: f.to_string() })
                .collect(),
        }
    }

    fn researcher(id: &str, given: &str, family: &str, dois: &[&str]) -> ResearcherRecord {
        ResearcherRecord {
            researcher_id: ResearcherId::new(id),
            given: given.into(),
            family: family.into(),
            country: CountryCode::parse("PT").unwrap(),
            orcid: None,
            publication_dois: dois.iter().map(|d| doi(d)).collect(),
            funder_ids: BTreeSet::new(),
        }
    }

    fn orcid(n: u64) -> OrcidId {
        OrcidId::from_base_number(n)
    }

    #[test]
    fn exact_name_links() {
        let pubs = [publication("10.1/d", &[("Ana", "Silva"), ("Wei", "Zhang")])];
        let rs = [researcher("r1", "ana", "SILVA", &["10.1/d"])];
        let l = link_crossref_authors(&pubs, &rs);
        assert_eq!(l.authors.len(), 2);
        assert_eq!(l.researcher_at(&doi("10.1/d"), 0).unwrap().as_str(), "r1");
        assert_eq!(l.researcher_at(&doi("10.1/d"), 1), None);
        assert_eq!(l.linked, 1);
    }

    #[test]
    fn ambiguous_names_stay_unlinked() {
        let pubs = [publication("10.1/d", &[("J", "Lee"), ("Ana", "Silva")])];
        let rs = [researcher("r1", "J", "Lee", &["10.1/d"]), researcher("r2", "j", "lee", &["10.1/d"])];
        let l = link_crossref_authors(&pubs, &rs);
        assert_eq!(l.researcher_at(&doi("10.1/d"), 0), None);
        assert_eq!(l.ambiguous, 1);
    }

    #[test]
    fn researcher_must_list_the_doi() {
        let pubs = [publication("10.1/d", &[("Ana", "Silva")])];
        let rs = [researcher("r1", "Ana", "Silva", &["10.1/other"])];
        let l = link_crossref_authors(&pubs, &rs);
        assert_eq!(l.linked, 0);
    }

    #[test]
    fn linkage_ignores_input_order() {
        let pubs = vec![
            publication("10.1/b", &[("Ana", "Silva"), ("Wei", "Zhang")]),
            publication("10.1/a", &[("Wei", "Zhang")]),
        ];
        let rs = vec![researcher("r1", "Ana", "Silva", &["10.1/b"]), researcher("r2", "Wei", "Zhang", &["10.1/a", "10.1/b"])];
        let l1 = link_crossref_authors(&pubs, &rs);
        let mut pubs2 = pubs.clone();
        pubs2.reverse();
        let mut rs2 = rs.clone();
        rs2.reverse();
        let l2 = link_crossref_authors(&pubs2, &rs2);
        assert_eq!(l1.authors, l2.authors);
    }

    #[test]
    fn attach_counts_orphans() {
        let pubs = [publication("10.1/d", &[("Ana", "Silva")])];
        let mut l = link_crossref_authors(&pubs, &[]);
        let a = |d: &str, p| CrossrefAssertion { doi: doi(d), author_position: p, orcid: orcid(1), authenticated: true };
        let orphans = l.attach_assertions(&[a("10.1/d", 0), a("10.1/d", 3), a("10.1/x", 0)]);
        assert_eq!(orphans, 2);
        assert_eq!(l.row(&doi("10.1/d"), 0).unwrap().orcid_crossref, Some(orcid(1)));
        let (kept, dropped) = retain_linkable(&pubs, vec![a("10.1/d", 0), a("10.1/d", 3), a("10.1/x", 0)]);
        assert_eq!((kept.len(), dropped), (1, 2));
    }

    fn profile(o: OrcidId, dois: &[&str]) -> OrcidProfile {
        OrcidProfile {
            orcid: o,
            given: "Ana".into(),
            family: "Silva".into(),
            created: chrono::NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(),
            work_dois: dois.iter().map(|d| doi(d)).collect(),
        }
    }

    #[test]
    fn registry_rows_only_for_known_dois() {
        let pubs = [publication("10.1/a", &[("Ana", "Silva")]), publication("10.1/b", &[("Ana", "Silva")])];
        assert!(link_orcid_works(&[profile(orcid(1), &["10.1/zzz"])], &pubs).is_empty());
        let rows = link_orcid_works(&[profile(orcid(1), &["10.1/a", "10.1/b", "10.1/c"])], &pubs);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.position.is_none() && r.source == AssertionSource::OrcidRegistry));
    }

    #[test]
    fn union_keeps_sources_separate() {
        let pubs = [publication("10.1/a", &[("Ana", "Silva")]), publication("10.1/b", &[("Ana", "Silva")])];
        let mut r = researcher("r1", "Ana", "Silva", &["10.1/a", "10.1/b"]);
        r.orcid = Some(orcid(7));
        let rs = [r];
        let l = link_crossref_authors(&pubs, &rs);
        let crossref = [CrossrefAssertion { doi: doi("10.1/a"), author_position: 0, orcid: orcid(7), authenticated: false }];

        // identical (doi, orcid) in both sources -> two rows
        let registry = link_orcid_works(&[profile(orcid(7), &["10.1/a"])], &pubs);
        let t = build_assertion_table(&l, &registry, &crossref, &rs);
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|u| u.researcher_id.as_ref().unwrap().as_str() == "r1"));

        // disjoint -> sum
        let registry = link_orcid_works(&[profile(orcid(7), &["10.1/b"])], &pubs);
        let t = build_assertion_table(&l, &registry, &crossref, &rs);
        assert_eq!(t.rows.len(), 1 + registry.len());
    }

    #[test]
    fn resolved_orcid_falls_back_to_modal_assertion() {
        let pubs = [
            publication("10.1/a", &[("Ana", "Silva")]),
            publication("10.1/b", &[("Ana", "Silva")]),
            publication("10.1/c", &[("Ana", "Silva")]),
        ];
        let rs = [researcher("r1", "Ana", "Silva", &["10.1/a", "10.1/b", "10.1/c"])];
        let l = link_crossref_authors(&pubs, &rs);
        let a = |d: &str, o| CrossrefAssertion { doi: doi(d), author_position: 0, orcid: orcid(o), authenticated: false };
        let ro = ResearcherOrcids::resolve(&rs, &l, &[a("10.1/a", 9), a("10.1/b", 3), a("10.1/c", 9)]);
        assert_eq!(ro.orcid_of(&ResearcherId::new("r1")), Some(orcid(9)));
        let ro = ResearcherOrcids::resolve(&rs, &l, &[a("10.1/a", 9), a("10.1/b", 3)]);
        assert_eq!(ro.orcid_of(&ResearcherId::new("r1")), Some(orcid(3)));
    }
}
