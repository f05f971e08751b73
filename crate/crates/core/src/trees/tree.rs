//! Compacted tries over heavy-relative leaf strings, their canonical form,
//! and the sorted-array view.

use std::ops::Range;

use super::handle::{cmp_prefix, Direction, Handle};
use crate::error::{Error, Result};

pub const NONE: u32 = u32::MAX;

/// Builder-side trie: string depths, ordered children and the anchors whose
/// strings end at each node. Node 0 is the root.
#[derive(Debug, Clone, Default)]
pub struct RawTree {
    pub depth: Vec<usize>,
    pub children: Vec<Vec<usize>>,
    pub leaves: Vec<Vec<u32>>,
}

impl RawTree {
    pub fn with_root() -> Self {
        let mut t = Self::default();
        t.add(0);
        t
    }

    pub fn add(&mut self, depth: usize) -> usize {
        self.depth.push(depth);
        self.children.push(Vec::new());
        self.leaves.push(Vec::new());
        self.depth.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub parent: u32,
    pub first_child: u32,
    pub next_sibling: u32,
    /// String depth at the bottom of the incoming edge.
    pub depth: u32,
    /// Letters on the incoming edge; empty for the root.
    pub edge: Handle,
    /// Leaf ranks in this subtree; the first `own` belong to this node.
    pub lo: u32,
    pub hi: u32,
    pub own: u32,
}

/// A compacted trie whose leaves are anchors. Nodes are in preorder with
/// children sorted by first letter, and leaf ranks follow the in-order
/// traversal, so every node covers a contiguous range of ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizerFactorTree {
    pub dir: Direction,
    pub nodes: Vec<Node>,
    /// Anchor id of each leaf rank.
    pub leaf_anchor: Vec<u32>,
}

impl MinimizerFactorTree {
    /// Canonical form of a raw trie. Edge labels are taken from the first
    /// leaf below each edge so equal tries give equal trees whatever built
    /// them.
    pub fn from_raw(raw: &RawTree, dir: Direction, handles: &[Handle], heavy: &[u8]) -> Result<Self> {
        let mut nodes: Vec<Node> = Vec::with_capacity(raw.depth.len());
        let mut leaf_anchor = Vec::new();
        // first leaf anchor for every raw node
        let mut first = vec![u32::MAX; raw.depth.len()];
        let mut order = Vec::with_capacity(raw.depth.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(raw.children[v].iter().rev());
        }
        for &v in order.iter().rev() {
            let mut leaves = raw.leaves[v].clone();
            leaves.sort_unstable();
            first[v] = leaves
                .first()
                .copied()
                .or_else(|| raw.children[v].first().map(|&c| first[c]))
                .unwrap_or(u32::MAX);
        }

        // (raw node, new parent index)
        let mut stack = vec![(0usize, NONE)];
        let mut last_child: Vec<u32> = Vec::new();
        while let Some((v, parent)) = stack.pop() {
            let id = nodes.len() as u32;
            let depth = raw.depth[v];
            let edge = if parent == NONE {
                Handle::new(dir, 1, 0, &[])
            } else {
                let pd = nodes[parent as usize].depth as usize;
                let f = first[v];
                if f == u32::MAX {
                    return Err(Error::Internal("trie node without leaves".into()));
                }
                handles[f as usize].slice(pd, depth - pd)
            };
            let mut leaves = raw.leaves[v].clone();
            leaves.sort_unstable();
            let lo = leaf_anchor.len() as u32;
            leaf_anchor.extend(&leaves);
            nodes.push(Node {
                parent,
                first_child: NONE,
                next_sibling: NONE,
                depth: depth as u32,
                edge,
                lo,
                hi: lo,
                own: leaves.len() as u32,
            });
            last_child.push(NONE);
            if parent != NONE {
                let p = parent as usize;
                if last_child[p] == NONE {
                    nodes[p].first_child = id;
                } else {
                    nodes[last_child[p] as usize].next_sibling = id;
                }
                last_child[p] = id;
            }
            let mut kids = raw.children[v].clone();
            kids.sort_by_key(|&c| handles[first[c] as usize].char_at(heavy, depth));
            for &c in kids.iter().rev() {
                stack.push((c, id));
            }
        }
        // Children follow their parent in preorder, so a reverse sweep sees
        // every child before its parent.
        for id in (0..nodes.len()).rev() {
            let mut hi = nodes[id].lo + nodes[id].own;
            let mut c = nodes[id].first_child;
            while c != NONE {
                hi = hi.max(nodes[c as usize].hi);
                c = nodes[c as usize].next_sibling;
            }
            nodes[id].hi = hi;
        }
        Ok(Self {
            dir,
            nodes,
            leaf_anchor,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_anchor.len()
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mut c = self.nodes[v].first_child;
        std::iter::from_fn(move || {
            if c == NONE {
                return None;
            }
            let out = c as usize;
            c = self.nodes[out].next_sibling;
            Some(out)
        })
    }

    /// Leaf ranks whose strings start with `q`; empty when `q` leaves the
    /// trie.
    pub fn spell(&self, heavy: &[u8], q: &[u8]) -> Range<usize> {
        let mut v = 0usize;
        let mut d = 0usize;
        'walk: while d < q.len() {
            for c in self.children(v) {
                let edge = &self.nodes[c].edge;
                if edge.char_at(heavy, 0) != q[d] {
                    continue;
                }
                let mut t = 0;
                while t < edge.len && d < q.len() {
                    if edge.char_at(heavy, t) != q[d] {
                        return 0..0;
                    }
                    t += 1;
                    d += 1;
                }
                v = c;
                continue 'walk;
            }
            return 0..0;
        }
        self.nodes[v].lo as usize..self.nodes[v].hi as usize
    }

    /// Decoded string of the path ending at node `v`.
    pub fn path_string(&self, heavy: &[u8], v: usize) -> Vec<u8> {
        let mut parts = Vec::new();
        let mut u = v as u32;
        while u != NONE {
            parts.push(self.nodes[u as usize].edge.decode(heavy));
            u = self.nodes[u as usize].parent;
        }
        parts.into_iter().rev().flatten().collect()
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn validate(&self, heavy: &[u8], max_diffs: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Corrupt(m.to_string()));
        if self.nodes.is_empty() {
            return bad("tree without root");
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if node.edge.diffs.len() > max_diffs {
                return bad("edge with too many mismatches");
            }
            if id > 0 {
                let kids = self.children(id).count();
                if node.own == 0 && kids < 2 {
                    return bad("non-branching internal node");
                }
                if node.edge.len == 0 {
                    return bad("empty edge");
                }
                let p = &self.nodes[node.parent as usize];
                if p.depth + node.edge.len as u32 != node.depth {
                    return bad("edge length disagrees with depths");
                }
            }
            let mut prev: Option<u8> = None;
            for c in self.children(id) {
                let ch = self.nodes[c].edge.char_at(heavy, 0);
                if prev.is_some_and(|p| p >= ch) {
                    return bad("children out of order");
                }
                prev = Some(ch);
            }
        }
        Ok(())
    }

    pub fn to_array(&self, handles: &[Handle]) -> ArrayIndex {
        ArrayIndex {
            dir: self.dir,
            leaf_anchor: self.leaf_anchor.clone(),
            handles: self
                .leaf_anchor
                .iter()
                .map(|&a| handles[a as usize].clone())
                .collect(),
        }
    }
}

/// Leaves in lexicographic order with their strings, searched by binary
/// search instead of a trie walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayIndex {
    pub dir: Direction,
    pub leaf_anchor: Vec<u32>,
    pub handles: Vec<Handle>,
}

impl ArrayIndex {
    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    /// Ranks whose strings start with `q`.
    pub fn search(&self, heavy: &[u8], q: &[u8]) -> Range<usize> {
        use std::cmp::Ordering::*;
        let lo = self
            .handles
            .partition_point(|h| cmp_prefix(heavy, h, q) == Less);
        let hi = self
            .handles
            .partition_point(|h| cmp_prefix(heavy, h, q) != Greater);
        lo..hi.max(lo)
    }
}
