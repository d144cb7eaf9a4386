//! Person-name normalization shared by linkage and quality checks.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Case-folds, strips diacritics and collapses whitespace.
///
/// `"  José   MÜLLER "` becomes `"jose muller"`. Characters without a Latin
/// decomposition (CJK, Cyrillic, ...) are kept as they are, lowercased.
pub fn normalize_name(raw: &str) -> String {
    let stripped: String = raw.nfd().filter(|c| !is_combining_mark(*c)).collect();
    let mut out = String::with_capacity(stripped.len());
    for word in stripped.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Normalized `"given family"`; an empty given name contributes nothing.
pub fn full_name(given: &str, family: &str) -> String {
    let given = normalize_name(given);
    let family = normalize_name(family);
    if given.is_empty() {
        family
    } else if family.is_empty() {
        given
    } else {
        format!("{given} {family}")
    }
}
