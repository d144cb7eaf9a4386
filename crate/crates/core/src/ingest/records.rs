use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ids::{CountryCode, Doi, ForCode, OrcidId, ResearcherId};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorMention {
    pub position: u32,
    #[serde(default)]
    pub given: String,
    pub family: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub doi: Doi,
    pub year: i32,
    pub journal_id: String,
    pub publisher_id: String,
    pub for_codes: BTreeSet<ForCode>,
    pub authors: Vec<AuthorMention>,
}

impl PublicationRecord {
    pub fn author(&self, position: u32) -> Option<&AuthorMention> {
        self.authors.get(position as usize)
    }
}

/// One Crossref claim that the author at `author_position` of `doi` holds `orcid`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossrefAssertion {
    pub doi: Doi,
    #[serde(rename = "position")]
    pub author_position: u32,
    pub orcid: OrcidId,
    pub authenticated: bool,
}

impl CrossrefAssertion {
    pub fn key(&self) -> (Doi, u32) {
        (self.doi.clone(), self.author_position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidProfile {
    pub orcid: OrcidId,
    #[serde(default)]
    pub given: String,
    pub family: String,
    pub created: NaiveDate,
    pub work_dois: BTreeSet<Doi>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearcherRecord {
    pub researcher_id: ResearcherId,
    #[serde(default)]
    pub given: String,
    pub family: String,
    pub country: CountryCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orcid: Option<OrcidId>,
    pub publication_dois: BTreeSet<Doi>,
    pub funder_ids: BTreeSet<String>,
}

/// Per-record checks that serde cannot express.
pub trait Validate {
    fn validate(&self) -> Result<(), String>;
}

impl Validate for PublicationRecord {
    fn validate(&self) -> Result<(), String> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", self.year));
        }
        if self.authors.is_empty() {
            return Err("authors must be nonempty".into());
        }
        for (i, a) in self.authors.iter().enumerate() {
            if a.position as usize != i {
                return Err(format!(
                    "author positions must be 0..{} in order; found {} at index {i}",
                    self.authors.len(),
                    a.position
                ));
            }
            if a.family.trim().is_empty() {
                return Err(format!("author {i} has an empty family name"));
            }
        }
        Ok(())
    }
}

impl Validate for CrossrefAssertion {
    fn validate(&self) -> Result<(), String> {
        Ok(())
    }
}

impl Validate for OrcidProfile {
    fn validate(&self) -> Result<(), String> {
        let today = chrono::Utc::now().date_naive();
        if self.created > today {
            return Err(format!("created date {} is in the future", self.created));
        }
        if self.family.trim().is_empty() {
            return Err("family name must be nonempty".into());
        }
        Ok(())
    }
}

impl Validate for ResearcherRecord {
    fn validate(&self) -> Result<(), String> {
        if self.researcher_id.as_str().is_empty() {
            return Err("researcher_id must be nonempty".into());
        }
        if self.family.trim().is_empty() {
            return Err("family name must be nonempty".into());
        }
        Ok(())
    }
}
