//! Reference construction: anchors enumerated from a materialized
//! z-estimation, tries built from fully decoded strings.

use std::collections::BTreeSet;

use super::anchor::{window_anchor, window_letters, Anchor};
use super::tree::RawTree;
use crate::estimation::EstimationFamily;
use crate::minimizers::MinimizerScheme;
use crate::model::{HeavyContext, WeightedString};

/// Every solid factor appears respecting the property in some string of
/// the family, so trimming each property interval at each of its
/// mismatches visits every distinct `(start, mismatch set)` pair.
pub fn anchors_from_family(
    x: &WeightedString,
    heavy: &HeavyContext,
    family: &EstimationFamily,
    scheme: &MinimizerScheme,
) -> Vec<Anchor> {
    let n = x.len();
    let t = family.threshold();
    let ell = scheme.ell();
    let mut nodes: BTreeSet<(usize, Vec<(usize, u8)>)> = BTreeSet::new();
    for (s, pi) in family.strings().iter().zip(family.properties()) {
        let mism: Vec<usize> = (1..=n).filter(|&p| s[p - 1] != heavy.at(p)).collect();
        for i in 1..=n {
            nodes.insert((i, Vec::new()));
            let end = pi.get(i);
            let from = mism.partition_point(|&p| p < i);
            let mut diffs = Vec::new();
            for &p in mism[from..].iter().take_while(|&&p| p <= end) {
                diffs.push((p, s[p - 1]));
                nodes.insert((i, diffs.clone()));
            }
        }
    }
    let mut anchors = BTreeSet::new();
    for (i, diffs) in nodes {
        if i + ell > n + 1 {
            continue;
        }
        let window = window_letters(heavy, i, ell, &diffs);
        if let Some(pos) = window_anchor(x, &window, i, t, scheme) {
            anchors.insert(Anchor::new(x, pos, &diffs));
        }
    }
    anchors.into_iter().collect()
}

/// Compacted trie of plain strings by recursive partitioning of the sorted
/// list. `strings[a]` is the string of anchor `a`.
pub fn raw_tree_plain(strings: &[Vec<u8>]) -> RawTree {
    let mut order: Vec<u32> = (0..strings.len() as u32).collect();
    order.sort_by(|&a, &b| strings[a as usize].cmp(&strings[b as usize]).then(a.cmp(&b)));
    let s = |k: usize| &strings[order[k] as usize];
    let lcp = |a: &[u8], b: &[u8]| a.iter().zip(b).take_while(|(x, y)| x == y).count();

    let mut raw = RawTree::with_root();
    // (node, range of `order`)
    let mut work = vec![(0usize, 0usize, order.len())];
    while let Some((v, lo, hi)) = work.pop() {
        let d = raw.depth[v];
        let mut k = lo;
        while k < hi && s(k).len() == d {
            raw.leaves[v].push(order[k]);
            k += 1;
        }
        while k < hi {
            let c = s(k)[d];
            let mut end = k;
            while end < hi && s(end)[d] == c {
                end += 1;
            }
            let depth = lcp(s(k), s(end - 1));
            let child = raw.add(depth);
            raw.children[v].push(child);
            work.push((child, k, end));
            k = end;
        }
    }
    raw
}
