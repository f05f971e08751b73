//! Space-efficient construction: a depth-first walk over every solid
//! factor, extended to the end of the text with heavy letters and grown one
//! letter at a time to the left. Only the current root-to-node path is held
//! uncompacted; nodes that end up marked by a minimizer are retained in a
//! compacted "extended" tree.

use super::anchor::Anchor;
use crate::error::Result;
use crate::minimizers::{MinimizerScheme, SlidingKmerHeap};
use crate::model::{HeavyContext, Threshold, WeightedString};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DfsStats {
    /// Every node of the extended solid factor tree visited.
    pub nodes_created: usize,
    /// Largest number of uncompacted path nodes alive at once.
    pub peak_live_path: usize,
    /// Nodes kept in the compacted extended tree.
    pub retained_nodes: usize,
}

/// A node of the retained tree. Its string is the letters at `pos..=n`,
/// heavy except at `diffs`; the incoming edge spells positions
/// `pos..parent.pos` read right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtNode {
    pub pos: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Mismatches of the node's own string, ascending.
    pub diffs: Vec<(usize, u8)>,
    /// Full mismatch sets of the windows whose minimizer is this node.
    pub marks: Vec<Vec<(usize, u8)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTree {
    pub nodes: Vec<ExtNode>,
    pub root: usize,
}

impl ExtendedTree {
    pub fn marked(&self) -> impl Iterator<Item = &ExtNode> {
        self.nodes.iter().filter(|v| !v.marks.is_empty())
    }

    /// Anchors in sorted order.
    pub fn anchors(&self, x: &WeightedString) -> Vec<Anchor> {
        let mut out: Vec<Anchor> = self
            .marked()
            .flat_map(|v| v.marks.iter().map(move |d| Anchor::new(x, v.pos, d)))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

struct Frame {
    pos: usize,
    pushed_diff: bool,
    log_prob: f64,
    on_heavy: bool,
    next_letter: usize,
    kept: Vec<usize>,
    pending: Vec<Vec<(usize, u8)>>,
}

pub fn build_extended(
    x: &WeightedString,
    heavy: &HeavyContext,
    t: Threshold,
    scheme: &MinimizerScheme,
) -> Result<(ExtendedTree, DfsStats)> {
    let n = x.len();
    let sigma = x.sigma();
    let ell = scheme.ell();
    let mut stats = DfsStats::default();
    let mut heap = SlidingKmerHeap::new(*scheme, n + 1);
    // Mismatches along the current path, descending positions.
    let mut diffs: Vec<(usize, u8)> = Vec::new();
    let mut nodes: Vec<ExtNode> = Vec::new();
    let mut stack = vec![Frame {
        pos: n + 1,
        pushed_diff: false,
        log_prob: 0.0,
        on_heavy: true,
        next_letter: 0,
        kept: Vec::new(),
        pending: Vec::new(),
    }];
    stats.nodes_created = 1;
    stats.peak_live_path = 1;

    let ascending = |d: &[(usize, u8)]| d.iter().rev().copied().collect::<Vec<_>>();

    loop {
        let top = stack.last_mut().unwrap();
        if top.pos > 1 && top.next_letter < sigma {
            let a = top.next_letter as u8;
            top.next_letter += 1;
            let q = top.pos - 1;
            let h = heavy.at(q);
            let (log_prob, on_heavy, pushed) = if a == h {
                if top.on_heavy {
                    (0.0, true, false)
                } else {
                    (top.log_prob + x.log_prob(q, a), false, false)
                }
            } else {
                let base = if top.on_heavy { 0.0 } else { top.log_prob };
                (base + x.log_prob(q, a), false, true)
            };
            if !on_heavy && !t.accepts(log_prob) {
                continue;
            }
            if pushed {
                diffs.push((q, a));
            }
            heap.prepend(a);
            stack.push(Frame {
                pos: q,
                pushed_diff: pushed,
                log_prob,
                on_heavy,
                next_letter: 0,
                kept: Vec::new(),
                pending: Vec::new(),
            });
            stats.nodes_created += 1;
            stats.peak_live_path = stats.peak_live_path.max(stack.len());

            if heap.len() >= ell {
                let window = heap.front(ell);
                if t.accepts(x.occurrence_log_prob_unchecked(&window, q)) {
                    let (_, off) = heap.current_min()?;
                    let target = q + off - 1;
                    // The frame at position p sits at depth n + 1 - p.
                    stack[n + 1 - target].pending.push(ascending(&diffs));
                }
            }
            continue;
        }

        let mut f = stack.pop().unwrap();
        let own = ascending(&diffs);
        if f.pos <= n {
            heap.drop_front();
            if f.pushed_diff {
                diffs.pop();
            }
        }
        f.pending.sort();
        f.pending.dedup();
        let is_root = stack.is_empty();
        let keep = is_root || !f.pending.is_empty() || f.kept.len() >= 2;
        let handoff = if keep {
            let id = nodes.len();
            for &c in &f.kept {
                nodes[c].parent = Some(id);
            }
            nodes.push(ExtNode {
                pos: f.pos,
                parent: None,
                children: std::mem::take(&mut f.kept),
                diffs: own,
                marks: f.pending,
            });
            Some(id)
        } else {
            f.kept.pop()
        };
        match stack.last_mut() {
            Some(parent) => {
                if let Some(id) = handoff {
                    parent.kept.push(id);
                }
            }
            None => {
                stats.retained_nodes = nodes.len();
                let root = nodes.len() - 1;
                return Ok((ExtendedTree { nodes, root }, stats));
            }
        }
    }
}
