use std::collections::BTreeMap;

use serde::Serialize;

use super::{Fraction, ResearcherIndicators};

/// Key used for researchers without any FoR-coded paper.
pub const UNCLASSIFIED: &str = "unclassified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Country,
    /// A researcher counts once for every funder they list.
    Funder,
    Discipline,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub key: String,
    pub researchers: usize,
    pub adopted: usize,
    pub adoption_pct: f64,
    /// Pooled completeness over adopted researchers.
    pub completeness: Fraction,
    pub engagement_pct: f64,
}

fn keys_for(ind: &ResearcherIndicators, dim: Dimension) -> Vec<String> {
    match dim {
        Dimension::Country => vec![ind.country.as_str().to_string()],
        Dimension::Funder => ind.funder_ids.iter().cloned().collect(),
        Dimension::Discipline => vec![ind.discipline.map_or_else(|| UNCLASSIFIED.to_string(), |c| c.to_string())],
    }
}

/// Group-by with pooled adoption and engagement, sorted by key.
pub fn breakdown(indicators: &[ResearcherIndicators], dim: Dimension) -> Vec<MetricsRow> {
    let mut groups: BTreeMap<String, (usize, usize, Fraction)> = BTreeMap::new();
    for ind in indicators {
        for key in keys_for(ind, dim) {
            let g = groups.entry(key).or_default();
            g.0 += 1;
            g.1 += ind.adopted as usize;
            if let Some(c) = ind.completeness {
                g.2 = g.2 + c;
            }
        }
    }
    groups
        .into_iter()
        .map(|(key, (researchers, adopted, completeness))| MetricsRow {
            key,
            researchers,
            adopted,
            adoption_pct: Fraction::new(adopted, researchers).pct(),
            completeness,
            engagement_pct: completeness.pct(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncomeBandRow {
    pub band: String,
    pub researchers: usize,
    /// Pooled over all researchers in the band.
    pub adoption_pct: f64,
    /// Median of the per-country adoption percentages.
    pub median_adoption_pct: f64,
    pub completeness_pct: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => v[n / 2],
        _ => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

/// Rolls country rows up to income bands. Countries missing from
/// `band_map` are left out.
pub fn income_band_rollup(country_rows: &[MetricsRow], band_map: &BTreeMap<String, String>) -> Vec<IncomeBandRow> {
    let mut bands: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
    let mut unmapped = 0;
    for row in country_rows {
        match band_map.get(&row.key) {
            Some(band) => bands.entry(band.as_str()).or_default().push(row),
            None => unmapped += 1,
        }
    }
    if unmapped > 0 {
        log::warn!("{unmapped} countries have no income band and are left out of the rollup");
    }
    bands
        .into_iter()
        .map(|(band, rows)| {
            let adoption: Fraction = rows.iter().map(|r| Fraction::new(r.adopted, r.researchers)).sum();
            let completeness: Fraction = rows.iter().map(|r| r.completeness).sum();
            IncomeBandRow {
                band: band.to_string(),
                researchers: adoption.den,
                adoption_pct: adoption.pct(),
                median_adoption_pct: median(rows.iter().map(|r| r.adoption_pct).collect()),
                completeness_pct: completeness.pct(),
            }
        })
        .collect()
}
