//! Line-oriented NDJSON loading with a reject log.
//!
//! Every input line ends up either as an accepted record or as a [`Reject`]
//! naming its 1-based line number, so `accepted + rejected == lines` holds
//! per file. Lines are decoded in parallel and merged in line order by a
//! single pass that enforces key uniqueness, so output never depends on
//! scheduling.

use std::collections::HashSet;
use std::hash::Hash;
use std::io::BufRead;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::records::{CrossrefAssertion, OrcidProfile, PublicationRecord, ResearcherRecord, Validate};
use super::ids::{Doi, OrcidId, ResearcherId};
use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    pub file: String,
    pub line: usize,
    pub reason: String,
}

/// Records accepted from one input stream plus the lines that were not.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejects: Vec<Reject>,
    pub lines: usize,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed { records: Vec::new(), rejects: Vec::new(), lines: 0 }
    }
}

/// Identity used to reject duplicate records within one file.
pub trait Keyed {
    type Key: Hash + Eq;
    fn key(&self) -> Self::Key;
    fn describe_key(key: &Self::Key) -> String;
}

impl Keyed for PublicationRecord {
    type Key = Doi;
    fn key(&self) -> Doi {
        self.doi.clone()
    }
    fn describe_key(key: &Doi) -> String {
        format!("duplicate DOI {key}")
    }
}

impl Keyed for CrossrefAssertion {
    type Key = (Doi, u32);
    fn key(&self) -> (Doi, u32) {
        (self.doi.clone(), self.author_position)
    }
    fn describe_key(key: &(Doi, u32)) -> String {
        format!("duplicate assertion for {} position {}", key.0, key.1)
    }
}

impl Keyed for OrcidProfile {
    type Key = OrcidId;
    fn key(&self) -> OrcidId {
        self.orcid
    }
    fn describe_key(key: &OrcidId) -> String {
        format!("duplicate ORCID profile {key}")
    }
}

impl Keyed for ResearcherRecord {
    type Key = ResearcherId;
    fn key(&self) -> ResearcherId {
        self.researcher_id.clone()
    }
    fn describe_key(key: &ResearcherId) -> String {
        format!("duplicate researcher_id {key}")
    }
}

fn read_lines<R: BufRead>(mut reader: R) -> Result<Vec<Vec<u8>>, IngestError> {
    let mut lines = Vec::new();
    loop {
        let mut buf = Vec::new();
        let n = reader.read_until(b'\n', &mut buf).map_err(IngestError::Io)?;
        if n == 0 {
            break;
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        lines.push(buf);
    }
    Ok(lines)
}

fn decode_line<T: DeserializeOwned + Validate>(line: &[u8]) -> Result<T, String> {
    let text = std::str::from_utf8(line).map_err(|e| format!("invalid UTF-8: {e}"))?;
    if text.trim().is_empty() {
        return Err("blank line".into());
    }
    let record: T = serde_json::from_str(text).map_err(|e| e.to_string())?;
    record.validate()?;
    Ok(record)
}

/// Parses one NDJSON stream. Only a failing reader is fatal.
pub fn parse_stream<T, R>(reader: R, file: &str) -> Result<Parsed<T>, IngestError>
where
    T: DeserializeOwned + Validate + Keyed + Send,
    R: BufRead,
{
    let lines = read_lines(reader)?;
    let decoded: Vec<Result<T, String>> = lines.par_iter().map(|l| decode_line::<T>(l)).collect();

    let mut out = Parsed { records: Vec::with_capacity(decoded.len()), rejects: Vec::new(), lines: lines.len() };
    let mut seen: HashSet<T::Key> = HashSet::with_capacity(decoded.len());
    for (i, result) in decoded.into_iter().enumerate() {
        let reason = match result {
            Ok(record) => {
                let key = record.key();
                if seen.contains(&key) {
                    T::describe_key(&key)
                } else {
                    seen.insert(key);
                    out.records.push(record);
                    continue;
                }
            }
            Err(reason) => reason,
        };
        out.rejects.push(Reject { file: file.to_string(), line: i + 1, reason });
    }
    if !out.rejects.is_empty() {
        log::warn!("{file}: rejected {} of {} lines", out.rejects.len(), out.lines);
    }
    Ok(out)
}

/// Serializes records as NDJSON, one per line.
pub fn write_ndjson<T: Serialize, W: std::io::Write>(records: &[T], mut writer: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
