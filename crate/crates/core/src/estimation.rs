//! z-estimations: ⌊z⌋ plain strings with property arrays whose
//! property-respecting occurrence counts reproduce `⌊P(U at i)·z⌋` for every
//! string `U` and position `i`.
//!
//! Construction sweeps positions left to right. Before position `e`, every
//! slot (string index) has an active suffix `S_j[a_j..e-1]`, and the active
//! suffixes form a trie of the solid factors ending at `e-1` in which the
//! node for `V` holds exactly `⌊P(V)·z⌋` slots. Extending by letter `c` must
//! give the node `Vc` exactly `⌊P(V)·p_e(c)·z⌋` slots drawn from `V`'s slots.
//! The trie is walked bottom-up: counts already satisfied below a node are
//! kept, and the shortfall for each letter is taken from slots that are not
//! committed deeper, ending their active suffix at that node.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{HeavyContext, Threshold, WeightedString};

/// Property array: `pi[i]` is the end of the longest property interval
/// starting at `i` (1-based, `i - 1` when empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyArray {
    pi: Vec<usize>,
}

impl PropertyArray {
    pub fn new(pi: Vec<usize>) -> Result<Self> {
        let n = pi.len();
        for (t, &v) in pi.iter().enumerate() {
            let i = t + 1;
            if v + 1 < i || v > n {
                return Err(Error::InvalidParameter(format!(
                    "pi[{i}] = {v} outside [{}, {n}]",
                    i - 1
                )));
            }
            if t > 0 && pi[t - 1] > v {
                return Err(Error::InvalidParameter(format!("pi decreases at {i}")));
            }
        }
        Ok(Self { pi })
    }

    pub fn get(&self, i: usize) -> usize {
        self.pi[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationFamily {
    strings: Vec<Vec<u8>>,
    properties: Vec<PropertyArray>,
    threshold: Threshold,
}

/// Occurrences `i` of `p` in `s` with `i + |p| - 1 <= pi[i]`, 1-based.
pub fn occ_with_property(s: &[u8], pi: &PropertyArray, p: &[u8]) -> Vec<usize> {
    let m = p.len();
    if m == 0 || m > s.len() {
        return Vec::new();
    }
    (1..=s.len() - m + 1)
        .filter(|&i| i + m - 1 <= pi.get(i) && &s[i - 1..i - 1 + m] == p)
        .collect()
}

impl EstimationFamily {
    pub fn from_parts(
        strings: Vec<Vec<u8>>,
        properties: Vec<PropertyArray>,
        threshold: Threshold,
    ) -> Result<Self> {
        let n = strings.first().map_or(0, Vec::len);
        if strings.len() != properties.len()
            || strings.iter().any(|s| s.len() != n)
            || properties.iter().any(|p| p.len() != n)
        {
            return Err(Error::InvalidParameter("inconsistent family shape".into()));
        }
        Ok(Self {
            strings,
            properties,
            threshold,
        })
    }

    pub fn strings(&self) -> &[Vec<u8>] {
        &self.strings
    }

    pub fn properties(&self) -> &[PropertyArray] {
        &self.properties
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    /// Length `n` of every string.
    pub fn len(&self) -> usize {
        self.strings.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of strings, `⌊z⌋`.
    pub fn size(&self) -> usize {
        self.strings.len()
    }

    /// Number of strings in which `p` occurs at `i` respecting the property.
    pub fn count(&self, p: &[u8], i: usize) -> Result<usize> {
        let n = self.len();
        if i == 0 || i + p.len() > n + 1 {
            return Err(Error::OutOfRange {
                pos: i,
                len: p.len(),
                n,
            });
        }
        let end = i + p.len() - 1;
        Ok(self
            .strings
            .iter()
            .zip(&self.properties)
            .filter(|(s, pi)| end <= pi.get(i) && &s[i - 1..end] == p)
            .count())
    }

    /// One line per string: the letters, a tab, then the property array.
    pub fn dump(&self, alphabet: &crate::model::Alphabet) -> String {
        let mut out = String::new();
        for (s, pi) in self.strings.iter().zip(&self.properties) {
            let pis: Vec<String> = pi.as_slice().iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}\t{}", alphabet.decode(s), pis.join(" "));
        }
        out
    }

    /// Total letters held, `n·⌊z⌋`.
    pub fn resident_letters(&self) -> usize {
        self.len() * self.size()
    }
}

struct Frame {
    depth: usize,
    log_prob: f64,
    children: Vec<(u8, Vec<usize>)>,
    next_child: usize,
    pool: Vec<usize>,
    counts: Vec<usize>,
}

/// Splits `members` into slots whose active suffix ends at this depth and
/// children keyed by the letter `depth` positions before `e - 1`.
fn make_frame(
    strings: &[Vec<u8>],
    active: &[usize],
    e: usize,
    sigma: usize,
    depth: usize,
    log_prob: f64,
    members: Vec<usize>,
) -> Frame {
    let mut pool = Vec::new();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); sigma];
    for j in members {
        if active[j] == depth {
            pool.push(j);
        } else {
            buckets[strings[j][e - 2 - depth] as usize].push(j);
        }
    }
    let children = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(c, b)| (c as u8, b))
        .collect();
    Frame {
        depth,
        log_prob,
        children,
        next_child: 0,
        pool,
        counts: vec![0; sigma],
    }
}

/// Builds a z-estimation of `x`.
pub fn build_estimation(x: &WeightedString, t: Threshold) -> Result<EstimationFamily> {
    let n = x.len();
    let sigma = x.sigma();
    let slots = t.slots();
    let heavy = HeavyContext::build(x);

    let mut strings = vec![vec![0u8; n]; slots];
    // Active suffix length of each slot after the last processed position.
    let mut active = vec![0usize; slots];
    // starts[j][e - 1] = first start position i with S_j[i..e] counted.
    let mut starts = vec![vec![0usize; n]; slots];

    for e in 1..=n {
        // Letter preference when taking slots from a pool.
        let mut letters: Vec<u8> = (0..sigma as u8).collect();
        let h = heavy.at(e);
        letters.retain(|&c| c != h);
        letters.insert(0, h);

        let mut new_active = vec![0usize; slots];
        let mut assigned = vec![false; slots];

        let mut stack = vec![make_frame(&strings, &active, e, sigma, 0, 0.0, (0..slots).collect())];
        loop {
            let top = stack.last_mut().unwrap();
            if top.next_child < top.children.len() {
                let (b, members) = std::mem::take(&mut top.children[top.next_child]);
                top.next_child += 1;
                let depth = top.depth + 1;
                let lp = top.log_prob + x.log_prob(e - depth, b);
                debug_assert_eq!(t.weight(lp), members.len(), "node weight drift at e = {e}");
                let child = make_frame(&strings, &active, e, sigma, depth, lp, members);
                stack.push(child);
                continue;
            }

            let mut frame = stack.pop().unwrap();
            frame.pool.sort_unstable();
            let mut taken = 0;
            for &c in &letters {
                let target = t.weight(frame.log_prob + x.log_prob(e, c));
                let have = frame.counts[c as usize];
                if target < have {
                    return Err(Error::Internal(format!(
                        "estimation counts exceed target at position {e}"
                    )));
                }
                let extra = target - have;
                if taken + extra > frame.pool.len() {
                    return Err(Error::Internal(format!(
                        "estimation pool exhausted at position {e}"
                    )));
                }
                for &j in &frame.pool[taken..taken + extra] {
                    strings[j][e - 1] = c;
                    new_active[j] = frame.depth + 1;
                    assigned[j] = true;
                }
                taken += extra;
                frame.counts[c as usize] = target;
            }
            let rest = frame.pool.split_off(taken);

            match stack.last_mut() {
                Some(parent) => {
                    parent.pool.extend(rest);
                    for (acc, v) in parent.counts.iter_mut().zip(&frame.counts) {
                        *acc += v;
                    }
                }
                None => {
                    for j in rest {
                        debug_assert!(!assigned[j]);
                        strings[j][e - 1] = h;
                        new_active[j] = 0;
                    }
                    break;
                }
            }
        }

        for j in 0..slots {
            active[j] = new_active[j];
            starts[j][e - 1] = e + 1 - active[j];
        }
    }

    let properties = starts
        .iter()
        .map(|a| {
            // pi[i] = max { e : a(e) <= i }, at least i - 1; a is non-decreasing.
            let mut pi = Vec::with_capacity(n);
            let mut e = 0usize;
            for i in 1..=n {
                while e < n && a[e] <= i {
                    e += 1;
                }
                pi.push(e.max(i - 1));
            }
            PropertyArray::new(pi)
        })
        .collect::<Result<Vec<_>>>()?;

    EstimationFamily::from_parts(strings, properties, t)
}
