//! ORCID adoption and engagement indicators over the repaired, unified
//! assertion table.

mod groups;
mod publishers;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub use groups::{breakdown, income_band_rollup, Dimension, IncomeBandRow, MetricsRow};
pub use publishers::{
    avg_authors_per_paper, journal_orcid_support, orcid_count_distribution, AuthorsPerPaperRow, JournalSupportRow,
    OrcidDistributionRow,
};

use crate::ingest::{CountryCode, CrossrefAssertion, Doi, ForCode, OrcidId, OrcidProfile, PublicationRecord, ResearcherId, ResearcherRecord};
use crate::linkage::{AssertionSource, AssertionTable, ResearcherOrcids, UnifiedAssertion};

/// Count ratio kept as integers so pooled sums stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fraction {
    pub num: usize,
    pub den: usize,
}

impl Fraction {
    pub fn new(num: usize, den: usize) -> Self {
        Fraction { num, den }
    }

    /// `None` for an empty denominator.
    pub fn value(self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    /// Percentage, 0 for an empty denominator.
    pub fn pct(self) -> f64 {
        self.value().map_or(0.0, |v| 100.0 * v)
    }
}

impl std::ops::Add for Fraction {
    type Output = Fraction;
    fn add(self, o: Fraction) -> Fraction {
        Fraction { num: self.num + o.num, den: self.den + o.den }
    }
}

impl std::iter::Sum for Fraction {
    fn sum<I: Iterator<Item = Fraction>>(iter: I) -> Fraction {
        iter.fold(Fraction::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub window_start: i32,
    pub window_end: i32,
    pub min_history_years: u32,
    pub min_papers: u32,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec { window_start: 2015, window_end: 2019, min_history_years: 5, min_papers: 5 }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.window_start > self.window_end {
            return Err(format!("window start {} is after end {}", self.window_start, self.window_end));
        }
        Ok(())
    }

    pub fn contains_year(&self, year: i32) -> bool {
        (self.window_start..=self.window_end).contains(&year)
    }
}

/// Denominator of the early-usage share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyUsageDenominator {
    /// All cohort members of the country.
    #[default]
    CountryCohort,
    /// Cohort members of the country whose iD was created that year.
    CreationYearCohort,
}

/// Who is considered for the Crossref-only share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    #[default]
    Cohort,
    AllResearchers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsOptions {
    pub cohort: CohortSpec,
    pub early_usage_denominator: EarlyUsageDenominator,
    pub crossref_only_population: Population,
    /// Publication year for the per-publisher ORCID count distribution.
    pub distribution_year: i32,
    /// Papers need at least this many authors for the distribution.
    pub min_authors: usize,
    pub top_n: usize,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            cohort: CohortSpec::default(),
            early_usage_denominator: EarlyUsageDenominator::default(),
            crossref_only_population: Population::default(),
            distribution_year: 2019,
            min_authors: 4,
            top_n: 20,
        }
    }
}

/// Per-researcher values every grouped metric is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResearcherIndicators {
    pub researcher_id: ResearcherId,
    pub country: CountryCode,
    pub funder_ids: BTreeSet<String>,
    pub adopted: bool,
    /// Set only for adopted researchers with at least one registry DOI.
    pub completeness: Option<Fraction>,
    pub orcid: Option<OrcidId>,
    pub orcid_created: Option<NaiveDate>,
    /// The iD carries an assertion on a paper published in its creation year
    /// or the year after.
    pub early_use: bool,
    /// Window years with at least one Crossref assertion on this researcher.
    pub crossref_years: BTreeSet<i32>,
    /// Subset of `crossref_years` where none of those DOIs reached the ORCID
    /// record.
    pub crossref_only_years: BTreeSet<i32>,
    pub discipline: Option<ForCode>,
}

/// Read-only lookups shared by the metric functions.
pub struct MetricsContext<'a> {
    pub publications: &'a [PublicationRecord],
    pub researchers: &'a [ResearcherRecord],
    pub profiles: &'a [OrcidProfile],
    pub assertions: &'a [UnifiedAssertion],
    pub researcher_orcids: &'a ResearcherOrcids,
    year_of: HashMap<&'a Doi, i32>,
    pub_of: HashMap<&'a Doi, &'a PublicationRecord>,
    created: HashMap<OrcidId, NaiveDate>,
    by_researcher: HashMap<&'a ResearcherId, Vec<&'a UnifiedAssertion>>,
    by_orcid: HashMap<OrcidId, Vec<&'a UnifiedAssertion>>,
    asserted: HashSet<(&'a Doi, OrcidId)>,
    registry: HashSet<(&'a Doi, OrcidId)>,
}

impl<'a> MetricsContext<'a> {
    pub fn new(
        publications: &'a [PublicationRecord],
        researchers: &'a [ResearcherRecord],
        profiles: &'a [OrcidProfile],
        table: &'a AssertionTable,
    ) -> Self {
        let mut by_researcher: HashMap<&ResearcherId, Vec<&UnifiedAssertion>> = HashMap::new();
        let mut by_orcid: HashMap<OrcidId, Vec<&UnifiedAssertion>> = HashMap::new();
        let mut asserted = HashSet::new();
        let mut registry = HashSet::new();
        for a in &table.rows {
            if let Some(r) = &a.researcher_id {
                by_researcher.entry(r).or_default().push(a);
            }
            by_orcid.entry(a.orcid).or_default().push(a);
            asserted.insert((&a.doi, a.orcid));
            if a.source == AssertionSource::OrcidRegistry {
                registry.insert((&a.doi, a.orcid));
            }
        }
        MetricsContext {
            publications,
            researchers,
            profiles,
            assertions: &table.rows,
            researcher_orcids: &table.researcher_orcids,
            year_of: publications.iter().map(|p| (&p.doi, p.year)).collect(),
            pub_of: publications.iter().map(|p| (&p.doi, p)).collect(),
            created: profiles.iter().map(|p| (p.orcid, p.created)).collect(),
            by_researcher,
            by_orcid,
            asserted,
            registry,
        }
    }

    pub fn year_of(&self, doi: &Doi) -> Option<i32> {
        self.year_of.get(doi).copied()
    }

    /// Researcher's registry publications, skipping unknown DOIs.
    fn papers_of<'r>(&'r self, r: &'r ResearcherRecord) -> impl Iterator<Item = &'a PublicationRecord> + 'r {
        r.publication_dois.iter().filter_map(|d| self.pub_of.get(d).copied())
    }

    /// True when `r` meets all three cohort rules.
    pub fn in_cohort(&self, r: &ResearcherRecord, spec: &CohortSpec) -> bool {
        let years: Vec<i32> = r.publication_dois.iter().filter_map(|d| self.year_of(d)).collect();
        let Some(&first) = years.iter().min() else { return false };
        years.iter().any(|&y| spec.contains_year(y))
            && i64::from(spec.window_end - first) > i64::from(spec.min_history_years)
            && years.len() > spec.min_papers as usize
    }

    /// At least one assertion of either source on a window-year paper is
    /// attributed to `r`.
    pub fn adopted(&self, r: &ResearcherId, spec: &CohortSpec) -> bool {
        self.by_researcher
            .get(r)
            .is_some_and(|rows| rows.iter().any(|a| self.year_of(&a.doi).is_some_and(|y| spec.contains_year(y))))
    }

    /// Share of the researcher's registry DOIs that carry an assertion for
    /// their ORCID iD. `None` when they have no registry DOIs.
    pub fn completeness(&self, r: &ResearcherRecord) -> Option<Fraction> {
        let den = r.publication_dois.len();
        if den == 0 {
            return None;
        }
        let num = match self.researcher_orcids.orcid_of(&r.researcher_id) {
            Some(o) => r.publication_dois.iter().filter(|d| self.asserted.contains(&(*d, o))).count(),
            None => 0,
        };
        Some(Fraction::new(num, den))
    }

    pub fn discipline(&self, r: &ResearcherRecord) -> Option<ForCode> {
        let papers: Vec<&PublicationRecord> = self.papers_of(r).collect();
        assign_discipline(&papers)
    }

    fn early_use(&self, orcid: OrcidId, created: NaiveDate) -> bool {
        let y = created.year();
        self.by_orcid.get(&orcid).is_some_and(|rows| {
            rows.iter().any(|a| self.year_of(&a.doi).is_some_and(|py| py == y || py == y + 1))
        })
    }

    /// Per window year: whether `r` has Crossref assertions that year, and
    /// whether none of those DOIs appear in the ORCID record.
    fn crossref_years(&self, r: &ResearcherId, spec: &CohortSpec) -> (BTreeSet<i32>, BTreeSet<i32>) {
        let mut any: BTreeMap<i32, bool> = BTreeMap::new();
        for a in self.by_researcher.get(r).into_iter().flatten() {
            if a.source != AssertionSource::Crossref {
                continue;
            }
            let Some(y) = self.year_of(&a.doi).filter(|y| spec.contains_year(*y)) else { continue };
            let mirrored = self.registry.contains(&(&a.doi, a.orcid));
            *any.entry(y).or_insert(false) |= mirrored;
        }
        let years = any.keys().copied().collect();
        let only = any.into_iter().filter(|(_, mirrored)| !mirrored).map(|(y, _)| y).collect();
        (years, only)
    }

    pub fn indicators(&self, r: &ResearcherRecord, spec: &CohortSpec) -> ResearcherIndicators {
        let adopted = self.adopted(&r.researcher_id, spec);
        let orcid = self.researcher_orcids.orcid_of(&r.researcher_id);
        let orcid_created = orcid.and_then(|o| self.created.get(&o).copied());
        let (crossref_years, crossref_only_years) = self.crossref_years(&r.researcher_id, spec);
        ResearcherIndicators {
            researcher_id: r.researcher_id.clone(),
            country: r.country,
            funder_ids: r.funder_ids.clone(),
            adopted,
            completeness: if adopted { self.completeness(r) } else { None },
            orcid,
            orcid_created,
            early_use: match (orcid, orcid_created) {
                (Some(o), Some(c)) => self.early_use(o, c),
                _ => false,
            },
            crossref_years,
            crossref_only_years,
            discipline: self.discipline(r),
        }
    }
}

/// Researchers with a window-year paper, a publication history longer than
/// `min_history_years` before the window end, and more than `min_papers`
/// papers.
pub fn build_cohort(ctx: &MetricsContext<'_>, spec: &CohortSpec) -> BTreeSet<ResearcherId> {
    ctx.researchers
        .iter()
        .filter(|r| ctx.in_cohort(r, spec))
        .map(|r| r.researcher_id.clone())
        .collect()
}

/// Share of `cohort` with an attributed assertion on a window-year paper.
pub fn adoption(ctx: &MetricsContext<'_>, cohort: &BTreeSet<ResearcherId>, spec: &CohortSpec) -> Fraction {
    Fraction::new(cohort.iter().filter(|r| ctx.adopted(r, spec)).count(), cohort.len())
}

/// Modal FoR code over `papers`; ties go to the code used most in the last
/// five years of the researcher's output, then to the lowest code.
pub fn assign_discipline(papers: &[&PublicationRecord]) -> Option<ForCode> {
    let last = papers.iter().map(|p| p.year).max()?;
    let mut counts: BTreeMap<ForCode, (usize, usize)> = BTreeMap::new();
    for p in papers {
        for &code in &p.for_codes {
            let e = counts.entry(code).or_default();
            e.0 += 1;
            if p.year > last - 5 {
                e.1 += 1;
            }
        }
    }
    // Ascending iteration plus a strict comparison keeps the lowest code.
    let mut best: Option<(ForCode, (usize, usize))> = None;
    for (code, c) in counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((code, c));
        }
    }
    best.map(|(code, _)| code)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EarlyUsageRow {
    pub country: String,
    pub creation_year: i32,
    pub used: usize,
    pub denominator: usize,
    pub pct: f64,
}

/// Per (country, iD creation year): cohort members whose iD was used on a
/// paper from its creation year or the next. Counts are per creation year,
/// not cumulative.
pub fn early_usage_by_creation_year(indicators: &[ResearcherIndicators], denominator: EarlyUsageDenominator) -> Vec<EarlyUsageRow> {
    let mut country_size: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cells: BTreeMap<(&str, i32), (usize, usize)> = BTreeMap::new();
    for ind in indicators {
        *country_size.entry(ind.country.as_str()).or_default() += 1;
        if let Some(created) = ind.orcid_created {
            let e = cells.entry((ind.country.as_str(), created.year())).or_default();
            e.0 += ind.early_use as usize;
            e.1 += 1;
        }
    }
    cells
        .into_iter()
        .map(|((country, year), (used, created_that_year))| {
            let den = match denominator {
                EarlyUsageDenominator::CountryCohort => country_size[country],
                EarlyUsageDenominator::CreationYearCohort => created_that_year,
            };
            EarlyUsageRow {
                country: country.to_string(),
                creation_year: year,
                used,
                denominator: den,
                pct: Fraction::new(used, den).pct(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossrefOnlyRow {
    pub country: String,
    pub year: i32,
    pub crossref_researchers: usize,
    pub crossref_only: usize,
    pub pct: f64,
}

/// Per (country, year): among researchers with Crossref assertions that
/// year, the share whose ORCID record holds none of those DOIs.
pub fn crossref_only_share(indicators: &[ResearcherIndicators]) -> Vec<CrossrefOnlyRow> {
    let mut cells: BTreeMap<(&str, i32), Fraction> = BTreeMap::new();
    for ind in indicators {
        for &y in &ind.crossref_years {
            let f = cells.entry((ind.country.as_str(), y)).or_default();
            f.den += 1;
            f.num += ind.crossref_only_years.contains(&y) as usize;
        }
    }
    cells
        .into_iter()
        .map(|((country, year), f)| CrossrefOnlyRow {
            country: country.to_string(),
            year,
            crossref_researchers: f.den,
            crossref_only: f.num,
            pct: f.pct(),
        })
        .collect()
}

/// Every table the metrics stage produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub cohort_size: usize,
    pub adoption: Fraction,
    pub by_country: Vec<MetricsRow>,
    pub by_funder: Vec<MetricsRow>,
    pub by_discipline: Vec<MetricsRow>,
    pub income_bands: Vec<IncomeBandRow>,
    pub early_usage: Vec<EarlyUsageRow>,
    pub crossref_only: Vec<CrossrefOnlyRow>,
    pub authors_per_paper: Vec<AuthorsPerPaperRow>,
    pub journal_support: Vec<JournalSupportRow>,
    pub orcid_distribution: Vec<OrcidDistributionRow>,
}

/// Runs every metric. `crossref` is the repaired Crossref table, used for
/// the publisher-level analyses.
pub fn compute_metrics(
    ctx: &MetricsContext<'_>,
    crossref: &[CrossrefAssertion],
    band_map: &BTreeMap<String, String>,
    options: &MetricsOptions,
) -> MetricsReport {
    use rayon::prelude::*;

    let spec = &options.cohort;
    let cohort = build_cohort(ctx, spec);
    let indicators: Vec<ResearcherIndicators> = ctx
        .researchers
        .par_iter()
        .filter(|r| cohort.contains(&r.researcher_id))
        .map(|r| ctx.indicators(r, spec))
        .collect();
    let crossref_population: Vec<ResearcherIndicators> = match options.crossref_only_population {
        Population::Cohort => indicators.clone(),
        Population::AllResearchers => ctx.researchers.par_iter().map(|r| ctx.indicators(r, spec)).collect(),
    };

    let by_country = breakdown(&indicators, Dimension::Country);
    let report = MetricsReport {
        cohort_size: cohort.len(),
        adoption: adoption(ctx, &cohort, spec),
        by_funder: breakdown(&indicators, Dimension::Funder),
        by_discipline: breakdown(&indicators, Dimension::Discipline),
        income_bands: income_band_rollup(&by_country, band_map),
        by_country,
        early_usage: early_usage_by_creation_year(&indicators, options.early_usage_denominator),
        crossref_only: crossref_only_share(&crossref_population),
        authors_per_paper: avg_authors_per_paper(ctx.publications),
        journal_support: journal_orcid_support(ctx.publications, crossref),
        orcid_distribution: orcid_count_distribution(
            ctx.publications,
            crossref,
            options.distribution_year,
            options.min_authors,
            options.top_n,
        ),
    };
    log::info!(
        "metrics: cohort {} researchers, adoption {:.2}%",
        report.cohort_size,
        report.adoption.pct()
    );
    report
}

#[cfg(test)]
mod tests;
