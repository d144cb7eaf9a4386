//! Normalized Levenshtein similarity with substitution cost 2.
//!
//! With insert = delete = 1 and substitute = 2 the edit distance equals
//! `|a| + |b| - 2 * lcs(a, b)`, so the ratio is `2 * lcs / (|a| + |b|)`.
//! Lengths are counted in Unicode scalar values.

/// Edit distance with insert/delete cost 1 and substitution cost 2.
pub fn weighted_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    a.len() + b.len() - 2 * lcs_len(&a, &b)
}

/// `(|a| + |b| - d) / (|a| + |b|)`; two empty strings score 1.
pub fn levenshtein_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let lcs = lcs_len(&a, &b);
    (2 * lcs) as f64 / total as f64
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    let (pattern, text) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if pattern.is_empty() {
        0
    } else if pattern.len() <= 64 {
        lcs_bit_parallel(pattern, text)
    } else {
        lcs_rows(pattern, text)
    }
}

/// Hyyrö's bit-vector LCS length: one machine word holds the DP column.
fn lcs_bit_parallel(pattern: &[char], text: &[char]) -> usize {
    let m = pattern.len();
    let ascii = pattern.iter().all(char::is_ascii);
    let mut table = [0u64; 128];
    let mut other: Vec<(char, u64)> = Vec::new();
    for (i, &c) in pattern.iter().enumerate() {
        if ascii {
            table[c as usize] |= 1 << i;
        } else if let Some(e) = other.iter_mut().find(|e| e.0 == c) {
            e.1 |= 1 << i;
        } else {
            other.push((c, 1 << i));
        }
    }
    let lookup = |c: char| -> u64 {
        if ascii {
            if c.is_ascii() {
                table[c as usize]
            } else {
                0
            }
        } else {
            other.iter().find(|e| e.0 == c).map_or(0, |e| e.1)
        }
    };

    let mut v = !0u64;
    for &c in text {
        let u = v & lookup(c);
        v = v.wrapping_add(u) | (v - u);
    }
    let live = if m == 64 { !0u64 } else { (1u64 << m) - 1 };
    (!v & live).count_ones() as usize
}

fn lcs_rows(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
