//! Sampled anchors: a minimizer position paired with the heavy-string
//! mismatches of the solid factor that selected it.

use std::cmp::Ordering;

use super::handle::{Direction, Handle};
use crate::minimizers::MinimizerScheme;
use crate::model::{HeavyContext, Threshold, WeightedString};

/// A letter differing from the heavy string, with its probability so that
/// occurrences can be scored without the weighted string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diff {
    pub pos: usize,
    pub letter: u8,
    pub log_prob: f64,
}

/// Leaf label shared by the forward and backward trees. The forward string
/// is `H[pos..n]` and the backward string is `H[1..pos]` reversed, both with
/// `diffs` applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub pos: usize,
    /// Ascending by position.
    pub diffs: Vec<Diff>,
}

impl Anchor {
    pub fn new(x: &WeightedString, pos: usize, diffs: &[(usize, u8)]) -> Self {
        let mut diffs: Vec<Diff> = diffs
            .iter()
            .map(|&(p, c)| Diff {
                pos: p,
                letter: c,
                log_prob: x.log_prob(p, c),
            })
            .collect();
        diffs.sort_by_key(|d| d.pos);
        Self { pos, diffs }
    }

    pub fn pairs(&self) -> Vec<(usize, u8)> {
        self.diffs.iter().map(|d| (d.pos, d.letter)).collect()
    }

    pub fn forward_handle(&self, n: usize) -> Handle {
        Handle::new(Direction::Forward, self.pos, n + 1 - self.pos, &self.pairs())
    }

    pub fn backward_handle(&self) -> Handle {
        Handle::new(Direction::Backward, self.pos, self.pos, &self.pairs())
    }

    pub fn handle(&self, dir: Direction, n: usize) -> Handle {
        match dir {
            Direction::Forward => self.forward_handle(n),
            Direction::Backward => self.backward_handle(),
        }
    }

    fn key(&self) -> (usize, impl Iterator<Item = (usize, u8)> + '_) {
        (self.pos, self.diffs.iter().map(|d| (d.pos, d.letter)))
    }
}

impl Eq for Anchor {}

impl PartialOrd for Anchor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Anchor {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, da) = self.key();
        let (pb, db) = other.key();
        pa.cmp(&pb).then_with(|| da.cmp(db))
    }
}

/// If the length-ℓ window of `H` with `diffs` applied starting at `start` is
/// solid, the position of its minimizer.
pub(crate) fn window_anchor(
    x: &WeightedString,
    window: &[u8],
    start: usize,
    t: Threshold,
    scheme: &MinimizerScheme,
) -> Option<usize> {
    if !t.accepts(x.occurrence_log_prob_unchecked(window, start)) {
        return None;
    }
    let off = scheme.window_minimizer(window).ok()?;
    Some(start + off - 1)
}

/// Window letters of `H` with `diffs` applied over `[start, start + ℓ)`.
pub(crate) fn window_letters(
    heavy: &HeavyContext,
    start: usize,
    ell: usize,
    diffs: &[(usize, u8)],
) -> Vec<u8> {
    let mut w = heavy.heavy()[start - 1..start - 1 + ell].to_vec();
    for &(p, c) in diffs {
        if p >= start && p < start + ell {
            w[p - start] = c;
        }
    }
    w
}
