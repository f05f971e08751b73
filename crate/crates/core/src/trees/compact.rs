//! Turns the marked nodes of the extended tree into compacted tries: the
//! leaf strings are sorted with a heavy-relative comparator, then inserted
//! left to right, attaching each one below the ancestor whose depth equals
//! its LCP with the previous string.

use super::anchor::Anchor;
use super::handle::{heavy_cmp, heavy_lcp, Direction, Handle, HeavyLce};
use super::tree::RawTree;

pub fn reverse_and_compact(anchors: &[Anchor], dir: Direction, lce: &HeavyLce) -> RawTree {
    let n = lce.heavy().len();
    let handles: Vec<Handle> = anchors.iter().map(|a| a.handle(dir, n)).collect();
    let mut order: Vec<u32> = (0..anchors.len() as u32).collect();
    order.sort_by(|&a, &b| heavy_cmp(lce, &handles[a as usize], &handles[b as usize]).then(a.cmp(&b)));

    let mut raw = RawTree::with_root();
    // Rightmost path, root first.
    let mut path = vec![0usize];
    let mut prev: Option<&Handle> = None;
    for &a in &order {
        let h = &handles[a as usize];
        let l = prev.map_or(0, |p| heavy_lcp(lce, p, h));
        let mut last = None;
        while raw.depth[*path.last().unwrap()] > l {
            last = path.pop();
        }
        let top = *path.last().unwrap();
        if raw.depth[top] < l {
            // Split the edge into `last` at depth l.
            let below = last.expect("a deeper node was popped");
            let mid = raw.add(l);
            let slot = raw.children[top]
                .iter()
                .position(|&c| c == below)
                .expect("popped node is a child");
            raw.children[top][slot] = mid;
            raw.children[mid].push(below);
            path.push(mid);
        }
        let top = *path.last().unwrap();
        if h.len == l {
            raw.leaves[top].push(a);
        } else {
            let leaf = raw.add(h.len);
            raw.leaves[leaf].push(a);
            raw.children[top].push(leaf);
            path.push(leaf);
        }
        prev = Some(h);
    }
    raw
}
