//! Pattern queries over an [`Index`]. Every path produces candidate anchors,
//! each implying a start position, and verifies them; the answers are
//! identical and equal the brute-force occurrence set.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::index::Index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Rectangle query on the grid of paired leaves.
    Grid,
    /// Walk one tree with the longer half of the pattern.
    Verify,
    /// Binary search over one tree's sorted leaves.
    Array,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Mode::Grid),
            "verify" => Ok(Mode::Verify),
            "array" => Ok(Mode::Array),
            _ => Err(Error::InvalidParameter(format!("unknown query mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub candidates: usize,
    /// Grid points in the query rectangle (grid mode only).
    pub points: usize,
    pub rejected: usize,
}

/// Outcome for one candidate. `log_prob` is absent when the candidate was
/// rejected without scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub accepted: bool,
    pub log_prob: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub anchor: usize,
    pub start: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryResult {
    /// 1-based, ascending, no duplicates.
    pub positions: Vec<usize>,
    pub stats: QueryStats,
    pub candidates: Vec<Candidate>,
    /// The pattern used letters outside the alphabet.
    pub unknown_letters: bool,
}

/// Scores `p` at `start` against candidate anchor `a`.
///
/// With the weighted string available this is the exact occurrence test.
/// Without it, the anchor's mismatch list is the only record of non-heavy
/// letters, so a pattern that disagrees with the anchor's string is
/// rejected unscored. That loses nothing: a real occurrence is also
/// generated by the anchor carrying exactly its own mismatches.
pub fn verify_candidate(index: &Index, p: &[u8], start: usize, a: usize) -> Verdict {
    let n = index.len();
    let m = p.len();
    let reject = Verdict {
        accepted: false,
        log_prob: None,
    };
    if start == 0 || start + m > n + 1 {
        return reject;
    }
    let t = index.threshold();
    if let Some(x) = index.weighted_string() {
        let lp = x.occurrence_log_prob_unchecked(p, start);
        return Verdict {
            accepted: t.accepts(lp),
            log_prob: Some(lp),
        };
    }
    let heavy = index.heavy();
    let anchor = &index.anchors()[a];
    let end = start + m - 1;
    let inside: Vec<_> = anchor
        .diffs
        .iter()
        .filter(|d| d.pos >= start && d.pos <= end)
        .collect();
    for (off, &c) in p.iter().enumerate() {
        let pos = start + off;
        let expected = inside
            .iter()
            .find(|d| d.pos == pos)
            .map_or(heavy.at(pos), |d| d.letter);
        if c != expected {
            return reject;
        }
    }
    let lp = inside.iter().fold(heavy.heavy_log_prob(start, end), |acc, d| {
        acc - heavy.heavy_letter_log_prob(d.pos) + d.log_prob
    });
    Verdict {
        accepted: t.accepts(lp),
        log_prob: Some(lp),
    }
}

fn split(index: &Index, p: &[u8]) -> Result<(usize, Vec<u8>, Vec<u8>)> {
    let mu = index.scheme().leftmost_pattern_minimizer(p)?;
    let right = p[mu - 1..].to_vec();
    let left_rev: Vec<u8> = p[..mu].iter().rev().copied().collect();
    Ok((mu, right, left_rev))
}

/// Runs one query on letter ranks.
pub fn query(index: &Index, p: &[u8], mode: Mode) -> Result<QueryResult> {
    let ell = index.scheme().ell();
    if p.len() < ell {
        return Err(Error::PatternTooShort { m: p.len(), ell });
    }
    let sigma = index.alphabet().size();
    if p.iter().any(|&c| c as usize >= sigma) {
        return Ok(QueryResult {
            unknown_letters: true,
            ..QueryResult::default()
        });
    }
    let (mu, right, left_rev) = split(index, p)?;
    let h = index.heavy().heavy();
    let m = p.len();
    let mut stats = QueryStats::default();
    let anchors: Vec<usize> = match mode {
        Mode::Grid => {
            let xs = index.forward().spell(h, &right);
            let ys = index.backward().spell(h, &left_rev);
            let pts = index.grid().range_report(xs, ys);
            stats.points = pts.len();
            pts.iter().map(|pt| pt.anchor as usize).collect()
        }
        Mode::Verify => {
            if 2 * mu <= m {
                let t = index.forward();
                t.leaf_anchor[t.spell(h, &right)].iter().map(|&a| a as usize).collect()
            } else {
                let t = index.backward();
                t.leaf_anchor[t.spell(h, &left_rev)].iter().map(|&a| a as usize).collect()
            }
        }
        Mode::Array => {
            if 2 * mu <= m {
                let arr = index.forward_array();
                arr.leaf_anchor[arr.search(h, &right)].iter().map(|&a| a as usize).collect()
            } else {
                let arr = index.backward_array();
                arr.leaf_anchor[arr.search(h, &left_rev)].iter().map(|&a| a as usize).collect()
            }
        }
    };

    let mut found = BTreeSet::new();
    let mut candidates = Vec::with_capacity(anchors.len());
    for a in anchors {
        let pos = index.anchors()[a].pos;
        stats.candidates += 1;
        let verdict = if pos >= mu {
            verify_candidate(index, p, pos + 1 - mu, a)
        } else {
            Verdict {
                accepted: false,
                log_prob: None,
            }
        };
        let start = (pos + 1).saturating_sub(mu);
        if verdict.accepted {
            found.insert(start);
        } else {
            stats.rejected += 1;
        }
        candidates.push(Candidate {
            anchor: a,
            start,
            verdict,
        });
    }
    Ok(QueryResult {
        positions: found.into_iter().collect(),
        stats,
        candidates,
        unknown_letters: false,
    })
}

/// Like [`query`] on text, treating letters outside the alphabet as a
/// warning rather than an error.
pub fn query_text(index: &Index, text: &str, mode: Mode) -> Result<QueryResult> {
    match index.alphabet().encode(text) {
        Ok(p) => query(index, &p, mode),
        Err(Error::UnknownLetter(_)) => Ok(QueryResult {
            unknown_letters: true,
            ..QueryResult::default()
        }),
        Err(e) => Err(e),
    }
}
