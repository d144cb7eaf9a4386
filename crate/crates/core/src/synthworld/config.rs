use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthorsPerPaper {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationRates {
    pub married_name: f64,
    pub short_name: f64,
    pub transliteration: f64,
}

/// Parameters of a synthetic world. Every field has a default, so a TOML
/// file only needs the fields it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_researchers: usize,
    pub n_papers: usize,
    pub authors_per_paper: AuthorsPerPaper,
    /// Country code -> sampling weight.
    pub countries: BTreeMap<String, f64>,
    /// Country code -> income band, emitted as the band map.
    pub income_bands: BTreeMap<String, String>,
    pub n_publishers: usize,
    pub n_journals: usize,
    pub n_funders: usize,
    /// Two-digit FoR code -> sampling weight.
    pub for_code_weights: BTreeMap<String, f64>,
    pub first_year: i32,
    pub last_year: i32,
    /// Share of researchers holding an ORCID iD.
    pub orcid_ownership_rate: f64,
    /// Chance that an owner's authorship on a paper from an ORCID-supporting
    /// publisher carries a Crossref assertion.
    pub assertion_rate: f64,
    pub authenticated_rate: f64,
    pub shuffle_rate: f64,
    /// Share of owners whose ORCID record auto-imports their Crossref
    /// assertions.
    pub sync_probability: f64,
    /// Chance an owner adds an unasserted paper of theirs to their profile.
    pub self_curation_rate: f64,
    pub name_perturbation: PerturbationRates,
    /// Share of researchers present in the background registry.
    pub registry_coverage: f64,
    /// When set, co-authors on a paper have pairwise name ratio below this.
    pub max_coauthor_name_ratio: Option<f64>,
    /// Share of researchers named from the confusable clusters.
    pub confusable_rate: f64,
}

fn weights(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, w)| (k.to_string(), *w)).collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_researchers: 1000,
            n_papers: 5000,
            authors_per_paper: AuthorsPerPaper { min: 1, max: 8, mean: 4.0 },
            countries: weights(&[
                ("AU", 2.0),
                ("BR", 2.0),
                ("CN", 6.0),
                ("DE", 3.0),
                ("ET", 0.5),
                ("GB", 3.0),
                ("IN", 3.0),
                ("IT", 2.0),
                ("NG", 1.0),
                ("PT", 1.0),
                ("US", 8.0),
                ("ZA", 1.0),
            ]),
            income_bands: [
                ("AU", "High"),
                ("BR", "Upper middle"),
                ("CN", "Upper middle"),
                ("DE", "High"),
                ("ET", "Low"),
                ("GB", "High"),
                ("IN", "Lower middle"),
                ("IT", "High"),
                ("NG", "Lower middle"),
                ("PT", "High"),
                ("US", "High"),
                ("ZA", "Upper middle"),
            ]
            .iter()
            .map(|(c, b)| (c.to_string(), b.to_string()))
            .collect(),
            n_publishers: 8,
            n_journals: 60,
            n_funders: 25,
            for_code_weights: (1..=22).map(|c| (format!("{c:02}"), if c == 11 { 3.0 } else { 1.0 })).collect(),
            first_year: 2005,
            last_year: 2020,
            orcid_ownership_rate: 0.75,
            assertion_rate: 0.9,
            authenticated_rate: 0.3,
            shuffle_rate: 0.02,
            sync_probability: 0.6,
            self_curation_rate: 0.5,
            name_perturbation: PerturbationRates::default(),
            registry_coverage: 1.0,
            max_coauthor_name_ratio: None,
            confusable_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let rates = [
            ("orcid_ownership_rate", self.orcid_ownership_rate),
            ("assertion_rate", self.assertion_rate),
            ("authenticated_rate", self.authenticated_rate),
            ("shuffle_rate", self.shuffle_rate),
            ("sync_probability", self.sync_probability),
            ("self_curation_rate", self.self_curation_rate),
            ("registry_coverage", self.registry_coverage),
            ("confusable_rate", self.confusable_rate),
            ("name_perturbation.married_name", self.name_perturbation.married_name),
            ("name_perturbation.short_name", self.name_perturbation.short_name),
            ("name_perturbation.transliteration", self.name_perturbation.transliteration),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be within [0, 1], got {v}"));
            }
        }
        let p = &self.name_perturbation;
        if p.married_name + p.short_name + p.transliteration > 1.0 {
            return bad("name perturbation rates must sum to at most 1".into());
        }
        for (name, n) in [
            ("n_researchers", self.n_researchers),
            ("n_papers", self.n_papers),
            ("n_publishers", self.n_publishers),
            ("n_journals", self.n_journals),
        ] {
            if n == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.n_journals < self.n_publishers {
            return bad(format!(
                "n_journals ({}) must be at least n_publishers ({})",
                self.n_journals, self.n_publishers
            ));
        }
        let app = &self.authors_per_paper;
        if app.min == 0 || app.min > app.max {
            return bad(format!("authors_per_paper needs 1 <= min <= max, got min={} max={}", app.min, app.max));
        }
        if !(app.min as f64..=app.max as f64).contains(&app.mean) {
            return bad(format!("authors_per_paper.mean {} outside [min, max]", app.mean));
        }
        if app.max > self.n_researchers {
            return bad(format!(
                "authors_per_paper.max ({}) exceeds n_researchers ({})",
                app.max, self.n_researchers
            ));
        }
        if self.first_year > self.last_year || self.first_year < crate::ingest::MIN_YEAR {
            return bad(format!("year range {}..{} is invalid", self.first_year, self.last_year));
        }
        if self.last_year >= chrono::Datelike::year(&chrono::Utc::now().date_naive()) {
            return bad(format!("last_year {} must be in the past", self.last_year));
        }
        if self.countries.is_empty() || self.countries.values().any(|w| !w.is_finite() || *w < 0.0) || self.countries.values().sum::<f64>() <= 0.0 {
            return bad("countries need nonnegative weights with a positive sum".into());
        }
        for c in self.countries.keys() {
            if crate::ingest::CountryCode::parse(c).is_err() {
                return bad(format!("unknown country code {c}"));
            }
        }
        if self.for_code_weights.is_empty() || self.for_code_weights.values().sum::<f64>() <= 0.0 {
            return bad("for_code_weights need a positive sum".into());
        }
        for c in self.for_code_weights.keys() {
            if crate::ingest::ForCode::parse(c).is_err() {
                return bad(format!("invalid FoR code {c}"));
            }
        }
        if let Some(r) = self.max_coauthor_name_ratio {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("max_coauthor_name_ratio must be within [0, 1], got {r}"));
            }
        }
        Ok(())
    }
}
