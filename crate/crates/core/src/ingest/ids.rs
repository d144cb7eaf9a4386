//! Identifier newtypes shared by every table: DOIs, ORCID iDs, Field of
//! Research codes and country codes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::countries::is_iso_alpha2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdError {
    #[error("DOI {0:?} must start with \"10.\" and carry a suffix after '/'")]
    Doi(String),
    #[error("ORCID iD {0:?} is not of the form XXXX-XXXX-XXXX-XXXC")]
    OrcidFormat(String),
    #[error("ORCID iD {0:?} has an invalid check character")]
    OrcidChecksum(String),
    #[error("Field of Research code {0:?} must be two digits")]
    ForCode(String),
    #[error("country code {0:?} is not an ISO 3166-1 alpha-2 code")]
    Country(String),
}

/// A DOI, lowercased with all whitespace removed.
///
/// Backed by an `Arc<str>` so that the many tables keyed by DOI share one
/// allocation per publication.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Doi(Arc<str>);

impl Doi {
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        let normalized: String = raw
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        match normalized.split_once('/') {
            Some((prefix, suffix))
                if prefix.starts_with("10.") && prefix.len() > 3 && !suffix.is_empty() =>
            {
                Ok(Doi(normalized.into()))
            }
            _ => Err(IdError::Doi(raw.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Doi({})", self.0)
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Doi {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Doi::parse(s)
    }
}

impl Serialize for Doi {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Doi {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::borrow::Cow::<str>::deserialize(deserializer)?;
        Doi::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// ORCID iD in canonical hyphenated form, stored inline as its 16 significant
/// characters so it is `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrcidId([u8; 16]);

/// ISO 7064 MOD 11-2 check character for a run of base digits.
pub fn mod11_2_check_char(digits: &[u8]) -> u8 {
    let total = digits
        .iter()
        .fold(0u32, |acc, d| ((acc + u32::from(d - b'0')) * 2) % 11);
    match (12 - total) % 11 {
        10 => b'X',
        r => b'0' + r as u8,
    }
}

/// True iff `candidate` is a canonical `XXXX-XXXX-XXXX-XXXC` ORCID iD with a
/// valid MOD 11-2 check character.
pub fn validate_orcid_checksum(candidate: &str) -> bool {
    OrcidId::parse(candidate).is_ok()
}

impl OrcidId {
    pub fn parse(candidate: &str) -> Result<Self, IdError> {
        let bytes = candidate.as_bytes();
        if bytes.len() != 19 {
            return Err(IdError::OrcidFormat(candidate.to_string()));
        }
        let mut digits = [0u8; 16];
        let mut n = 0;
        for (i, &b) in bytes.iter().enumerate() {
            if i == 4 || i == 9 || i == 14 {
                if b != b'-' {
                    return Err(IdError::OrcidFormat(candidate.to_string()));
                }
                continue;
            }
            let last = n == 15;
            if !(b.is_ascii_digit() || (last && b == b'X')) {
                return Err(IdError::OrcidFormat(candidate.to_string()));
            }
            digits[n] = b;
            n += 1;
        }
        if mod11_2_check_char(&digits[..15]) != digits[15] {
            return Err(IdError::OrcidChecksum(candidate.to_string()));
        }
        Ok(OrcidId(digits))
    }

    /// Builds the iD whose 15 base digits encode `n`, appending the check
    /// character. Panics if `n` needs more than 15 digits.
    pub fn from_base_number(n: u64) -> Self {
        assert!(n < 1_000_000_000_000_000, "ORCID base number out of range");
        let text = format!("{n:015}");
        let mut digits = [0u8; 16];
        digits[..15].copy_from_slice(text.as_bytes());
        digits[15] = mod11_2_check_char(&digits[..15]);
        OrcidId(digits)
    }
}

impl fmt::Display for OrcidId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.0;
        // All bytes are ASCII by construction.
        let s = |r: std::ops::Range<usize>| std::str::from_utf8(&d[r]).unwrap_or("????");
        write!(f, "{}-{}-{}-{}", s(0..4), s(4..8), s(8..12), s(12..16))
    }
}

impl fmt::Debug for OrcidId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrcidId({self})")
    }
}

impl FromStr for OrcidId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrcidId::parse(s)
    }
}

impl Serialize for OrcidId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrcidId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::borrow::Cow::<str>::deserialize(deserializer)?;
        OrcidId::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Two-digit Field of Research division code ("01".."99").
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ForCode(u8);

impl ForCode {
    pub fn new(code: u8) -> Option<Self> {
        (code < 100).then_some(ForCode(code))
    }

    pub fn parse(raw: &str) -> Result<Self, IdError> {
        let b = raw.as_bytes();
        if b.len() == 2 && b[0].is_ascii_digit() && b[1].is_ascii_digit() {
            Ok(ForCode((b[0] - b'0') * 10 + (b[1] - b'0')))
        } else {
            Err(IdError::ForCode(raw.to_string()))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for ForCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}", self.0)
    }
}

impl fmt::Debug for ForCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ForCode({:02})", self.0)
    }
}

impl Serialize for ForCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ForCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::borrow::Cow::<str>::deserialize(deserializer)?;
        ForCode::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// ISO 3166-1 alpha-2 country code, upper case.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        let upper = raw.trim().to_ascii_uppercase();
        let b = upper.as_bytes();
        if b.len() == 2 && is_iso_alpha2(&upper) {
            Ok(CountryCode([b[0], b[1]]))
        } else {
            Err(IdError::Country(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).unwrap_or("??")
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = std::borrow::Cow::<str>::deserialize(deserializer)?;
        CountryCode::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Opaque key from the background researcher registry.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResearcherId(pub Arc<str>);

impl ResearcherId {
    pub fn new(raw: &str) -> Self {
        ResearcherId(raw.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ResearcherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ResearcherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResearcherId({})", self.0)
    }
}
