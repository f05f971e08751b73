//! Weighted strings, thresholds, heavy strings and the brute-force oracle.
//!
//! Positions in every public signature are 1-based, matching the `.wstr`
//! format and the reported occurrence lists. Letters are stored as their
//! alphabet rank (`u8`), so alphabets are limited to 255 letters.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};

/// Log-space slack when comparing a probability against `1/z`.
pub const EPS_CMP: f64 = 1e-9;
/// Accepted deviation of a row sum from 1.
pub const EPS_SUM: f64 = 1e-6;

/// An ordered set of distinct letters; a letter's rank is its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
    lookup: HashMap<String, u8>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(letters: &[S]) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameter("empty alphabet".into()));
        }
        if letters.len() > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "alphabet of size {} exceeds 255 letters",
                letters.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(letters.len());
        let mut owned = Vec::with_capacity(letters.len());
        for (rank, l) in letters.iter().enumerate() {
            let l = l.as_ref().to_string();
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!("bad letter token {l:?}")));
            }
            if lookup.insert(l.clone(), rank as u8).is_some() {
                return Err(Error::DuplicateLetter(l));
            }
            owned.push(l);
        }
        Ok(Self {
            letters: owned,
            lookup,
        })
    }

    pub fn size(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn rank(&self, letter: &str) -> Option<u8> {
        self.lookup.get(letter).copied()
    }

    pub fn letter(&self, rank: u8) -> &str {
        &self.letters[rank as usize]
    }

    /// True when every letter is a single character, in which case patterns
    /// are read character by character instead of as whitespace tokens.
    pub fn is_char_alphabet(&self) -> bool {
        self.letters.iter().all(|l| l.chars().count() == 1)
    }

    /// Encodes a textual pattern into letter ranks.
    pub fn encode(&self, text: &str) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(text.len());
        if self.is_char_alphabet() {
            let mut buf = [0u8; 4];
            for c in text.chars().filter(|c| !c.is_whitespace()) {
                let s = c.encode_utf8(&mut buf);
                out.push(self.rank(s).ok_or_else(|| Error::UnknownLetter(s.to_string()))?);
            }
        } else {
            for tok in text.split_whitespace() {
                out.push(self.rank(tok).ok_or_else(|| Error::UnknownLetter(tok.to_string()))?);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, ranks: &[u8]) -> String {
        let sep = if self.is_char_alphabet() { "" } else { " " };
        ranks
            .iter()
            .map(|&r| self.letter(r))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

/// The weight threshold `1/z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    z: f64,
}

impl Threshold {
    pub fn new(z: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 1.0) {
            return Err(Error::InvalidParameter(format!("z must be >= 1, got {z}")));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn inv(&self) -> f64 {
        1.0 / self.z
    }

    /// `log(1/z)`.
    pub fn log_inv(&self) -> f64 {
        -self.z.ln()
    }

    pub fn accepts(&self, log_prob: f64) -> bool {
        log_prob >= self.log_inv() - EPS_CMP
    }

    /// `floor(prob * z)` with the same slack as [`Threshold::accepts`], so
    /// that `weight(lp) >= 1` exactly when `accepts(lp)`.
    pub fn weight(&self, log_prob: f64) -> usize {
        if log_prob == f64::NEG_INFINITY {
            return 0;
        }
        (log_prob + self.z.ln() + EPS_CMP).exp().floor() as usize
    }

    /// Number of strings in a z-estimation, `floor(z)`.
    pub fn slots(&self) -> usize {
        self.weight(0.0)
    }

    /// `floor(log2 z)`, the maximum number of heavy-string mismatches of a
    /// solid factor.
    pub fn max_mismatches(&self) -> usize {
        (self.z.log2() + EPS_CMP).floor() as usize
    }
}

/// A sequence of per-position probability distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedString {
    alphabet: Alphabet,
    n: usize,
    probs: Vec<f64>,
    logs: Vec<f64>,
}

impl WeightedString {
    /// Builds a weighted string from rows of probabilities in rank order.
    /// Rows are validated against [`EPS_SUM`] and then renormalised.
    pub fn from_rows(alphabet: Alphabet, rows: &[Vec<f64>]) -> Result<Self> {
        let sigma = alphabet.size();
        let mut probs = Vec::with_capacity(rows.len() * sigma);
        for (i, row) in rows.iter().enumerate() {
            Self::check_row(row, sigma, i + 1)?;
            let sum: f64 = row.iter().sum();
            probs.extend(row.iter().map(|p| p / sum));
        }
        Self::from_flat(alphabet, rows.len(), probs)
    }

    fn check_row(row: &[f64], sigma: usize, line: usize) -> Result<()> {
        if row.len() != sigma {
            return Err(Error::RowWidth {
                line,
                expected: sigma,
                found: row.len(),
            });
        }
        for &p in row {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityRange { line, value: p });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > EPS_SUM {
            return Err(Error::RowSum { line, sum });
        }
        Ok(())
    }

    pub(crate) fn from_flat(alphabet: Alphabet, n: usize, probs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("weighted string must be non-empty".into()));
        }
        let logs = probs.iter().map(|p| p.ln()).collect();
        Ok(Self {
            alphabet,
            n,
            probs,
            logs,
        })
    }

    /// A weighted string where every position is certain.
    pub fn from_plain(alphabet: Alphabet, text: &[u8]) -> Result<Self> {
        let sigma = alphabet.size();
        let rows: Vec<Vec<f64>> = text
            .iter()
            .map(|&c| {
                let mut r = vec![0.0; sigma];
                r[c as usize] = 1.0;
                r
            })
            .collect();
        Self::from_rows(alphabet, &rows)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sigma(&self) -> usize {
        self.alphabet.size()
    }

    /// Probability of `letter` at 1-based position `pos`.
    pub fn prob(&self, pos: usize, letter: u8) -> f64 {
        self.probs[(pos - 1) * self.sigma() + letter as usize]
    }

    pub fn log_prob(&self, pos: usize, letter: u8) -> f64 {
        self.logs[(pos - 1) * self.sigma() + letter as usize]
    }

    /// The distribution at 1-based position `pos`.
    pub fn row(&self, pos: usize) -> &[f64] {
        let s = self.sigma();
        &self.probs[(pos - 1) * s..pos * s]
    }

    /// The weighted string read right to left.
    pub fn reversed(&self) -> Self {
        let s = self.sigma();
        let mut probs = Vec::with_capacity(self.probs.len());
        for pos in (1..=self.n).rev() {
            probs.extend_from_slice(&self.probs[(pos - 1) * s..pos * s]);
        }
        let logs = probs.iter().map(|p: &f64| p.ln()).collect();
        Self {
            alphabet: self.alphabet.clone(),
            n: self.n,
            probs,
            logs,
        }
    }

    fn check_span(&self, pattern: &[u8], i: usize) -> Result<()> {
        let m = pattern.len();
        if i == 0 || i + m > self.n + 1 {
            return Err(Error::OutOfRange {
                pos: i,
                len: m,
                n: self.n,
            });
        }
        if let Some(&c) = pattern.iter().find(|&&c| c as usize >= self.sigma()) {
            return Err(Error::UnknownLetter(format!("rank {c}")));
        }
        Ok(())
    }

    /// `log P(X[i..i+m-1] = pattern)`; `-inf` when a factor is impossible.
    pub fn occurrence_probability(&self, pattern: &[u8], i: usize) -> Result<f64> {
        self.check_span(pattern, i)?;
        Ok(self.occurrence_log_prob_unchecked(pattern, i))
    }

    pub(crate) fn occurrence_log_prob_unchecked(&self, pattern: &[u8], i: usize) -> f64 {
        pattern
            .iter()
            .enumerate()
            .map(|(t, &c)| self.log_prob(i + t, c))
            .sum()
    }

    pub fn is_valid(&self, pattern: &[u8], i: usize, t: Threshold) -> Result<bool> {
        Ok(t.accepts(self.occurrence_probability(pattern, i)?))
    }

    /// Exhaustive scan of every start position; the reference answer for
    /// all index query paths.
    pub fn brute_force_occurrences(&self, pattern: &[u8], t: Threshold) -> Vec<usize> {
        let m = pattern.len();
        if m > self.n || pattern.iter().any(|&c| c as usize >= self.sigma()) {
            return Vec::new();
        }
        (1..=self.n - m + 1)
            .filter(|&i| t.accepts(self.occurrence_log_prob_unchecked(pattern, i)))
            .collect()
    }

    /// Like [`WeightedString::brute_force_occurrences`] but with the
    /// probabilities of the reported occurrences.
    pub fn solid_occurrences(&self, pattern: &[u8], t: Threshold) -> Vec<SolidOccurrence> {
        self.brute_force_occurrences(pattern, t)
            .into_iter()
            .map(|position| SolidOccurrence {
                position,
                pattern_length: pattern.len(),
                log_prob: self.occurrence_log_prob_unchecked(pattern, position),
            })
            .collect()
    }

    /// Parses the `.wstr` text format.
    pub fn parse<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::MalformedHeader {
            line: 1,
            msg: "missing `n sigma` line".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::MalformedHeader {
                line: hline,
                msg: format!("expected a positive integer, found {s:?}"),
            })
        };
        if dims.len() != 2 {
            return Err(Error::MalformedHeader {
                line: hline,
                msg: format!("expected `n sigma`, found {header:?}"),
            });
        }
        let (n, sigma) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        if n == 0 || sigma == 0 {
            return Err(Error::MalformedHeader {
                line: hline,
                msg: "n and sigma must be positive".into(),
            });
        }

        let (aline, letters) = lines.next().ok_or(Error::MalformedHeader {
            line: hline + 1,
            msg: "missing alphabet line".into(),
        })?;
        let letters: Vec<&str> = letters.split_whitespace().collect();
        if letters.len() != sigma {
            return Err(Error::MalformedHeader {
                line: aline,
                msg: format!("expected {sigma} letters, found {}", letters.len()),
            });
        }
        let alphabet = Alphabet::new(&letters)?;

        let mut probs = Vec::with_capacity(n * sigma);
        let mut rows = 0;
        for (line, l) in lines {
            let mut row = Vec::with_capacity(sigma);
            for tok in l.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::NonNumeric {
                    line,
                    token: tok.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonNumeric {
                        line,
                        token: tok.to_string(),
                    });
                }
                row.push(v);
            }
            Self::check_row(&row, sigma, line)?;
            let sum: f64 = row.iter().sum();
            probs.extend(row.iter().map(|p| p / sum));
            rows += 1;
        }
        if rows != n {
            return Err(Error::RowCount {
                expected: n,
                found: rows,
            });
        }
        Self::from_flat(alphabet, n, probs)
    }

    /// Writes the `.wstr` text format.
    pub fn to_wstr(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.sigma());
        let _ = writeln!(out, "{}", self.alphabet.letters().join(" "));
        for pos in 1..=self.n {
            let row: Vec<String> = self.row(pos).iter().map(|p| format!("{p}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

impl fmt::Display for WeightedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wstr())
    }
}

/// One z-valid occurrence together with its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidOccurrence {
    pub position: usize,
    pub pattern_length: usize,
    pub log_prob: f64,
}

/// The heavy string and its log-space prefix products.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyContext {
    heavy: Vec<u8>,
    pp_log: Vec<f64>,
}

impl HeavyContext {
    /// Heavy string with ties resolved towards the lowest alphabet rank.
    pub fn build(x: &WeightedString) -> Self {
        let heavy = (1..=x.len())
            .map(|pos| {
                let row = x.row(pos);
                let mut best = 0usize;
                for (c, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = c;
                    }
                }
                best as u8
            })
            .collect::<Vec<u8>>();
        Self::from_letters(x, heavy).expect("argmax letters are heavy")
    }

    /// Uses an explicit choice of heavy letters; each must attain the row
    /// maximum.
    pub fn from_letters(x: &WeightedString, heavy: Vec<u8>) -> Result<Self> {
        if heavy.len() != x.len() {
            return Err(Error::InvalidParameter("heavy string length mismatch".into()));
        }
        let mut pp_log = Vec::with_capacity(x.len() + 1);
        pp_log.push(0.0);
        let mut acc = 0.0;
        for (t, &c) in heavy.iter().enumerate() {
            let row = x.row(t + 1);
            let max = row.iter().cloned().fold(0.0, f64::max);
            if c as usize >= row.len() || row[c as usize] < max {
                return Err(Error::InvalidParameter(format!(
                    "letter rank {c} is not heavy at position {}",
                    t + 1
                )));
            }
            acc += x.log_prob(t + 1, c);
            pp_log.push(acc);
        }
        Ok(Self { heavy, pp_log })
    }

    pub(crate) fn from_parts(heavy: Vec<u8>, pp_log: Vec<f64>) -> Self {
        Self { heavy, pp_log }
    }

    pub fn len(&self) -> usize {
        self.heavy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heavy.is_empty()
    }

    pub fn heavy(&self) -> &[u8] {
        &self.heavy
    }

    /// Heavy letter at 1-based `pos`.
    pub fn at(&self, pos: usize) -> u8 {
        self.heavy[pos - 1]
    }

    pub fn pp_log(&self) -> &[f64] {
        &self.pp_log
    }

    /// `log P(X[i..j] = H[i..j])`, with `j = i - 1` giving 0.
    pub fn heavy_log_prob(&self, i: usize, j: usize) -> f64 {
        self.pp_log[j] - self.pp_log[i - 1]
    }

    /// Log-probability of the heavy letter at `pos`.
    pub fn heavy_letter_log_prob(&self, pos: usize) -> f64 {
        self.pp_log[pos] - self.pp_log[pos - 1]
    }

    /// Positions (ascending) where `u`, placed at `i`, differs from the
    /// heavy string.
    pub fn mismatches(&self, u: &[u8], i: usize) -> Result<Vec<(usize, u8)>> {
        if i == 0 || i + u.len() > self.len() + 1 {
            return Err(Error::OutOfRange {
                pos: i,
                len: u.len(),
                n: self.len(),
            });
        }
        Ok(u
            .iter()
            .enumerate()
            .filter(|&(t, &c)| c != self.heavy[i - 1 + t])
            .map(|(t, &c)| (i + t, c))
            .collect())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub const EXAMPLE_WSTR: &str = "\
# running example: n = 6 over {A, B}
6 2
A B
1 0
0.5 0.5
0.75 0.25
0.8 0.2
0.5 0.5
0.25 0.75
";

    pub fn example() -> WeightedString {
        WeightedString::parse_str(EXAMPLE_WSTR).unwrap()
    }

    pub fn enc(x: &WeightedString, s: &str) -> Vec<u8> {
        x.alphabet().encode(s).unwrap()
    }
}
