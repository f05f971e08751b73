//! (ℓ,k)-minimizer schemes.
//!
//! A scheme orders k-mers either lexicographically or by a Karp–Rabin
//! fingerprint (ties broken lexicographically), and selects the leftmost
//! smallest k-mer of every length-ℓ window.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::estimation::EstimationFamily;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

const KR_MOD: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Lexicographic,
    Fingerprint { seed: u64 },
}

impl Order {
    pub fn tag(&self) -> u8 {
        match self {
            Order::Lexicographic => 0,
            Order::Fingerprint { .. } => 1,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Order::Lexicographic => 0,
            Order::Fingerprint { seed } => *seed,
        }
    }
}

/// Total order key of a k-mer: fingerprint first (zero for lexicographic
/// order), then the packed letters, which sort lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KmerKey {
    pub fingerprint: u64,
    pub packed: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimizerScheme {
    ell: usize,
    k: usize,
    order: Order,
    sigma: usize,
    bits: u32,
    base: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % KR_MOD as u128) as u64
}

/// Bits per packed letter for an alphabet of size `sigma`.
fn letter_bits(sigma: usize) -> u32 {
    (usize::BITS - (sigma.max(2) - 1).leading_zeros()).max(1)
}

/// `ceil(log_sigma ell) + 2`, the smallest k for which minimizer density is
/// expected to be O(1/ℓ), capped at ℓ.
pub fn default_k(ell: usize, sigma: usize) -> usize {
    let mut t = 0usize;
    if sigma >= 2 {
        let mut pow = 1usize;
        while pow < ell {
            pow = pow.saturating_mul(sigma);
            t += 1;
        }
    }
    (t + 2).min(ell).min(128 / letter_bits(sigma) as usize)
}

impl MinimizerScheme {
    pub fn new(ell: usize, k: usize, order: Order, sigma: usize) -> Result<Self> {
        if ell == 0 || k == 0 || k > ell {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= ell, got ell = {ell}, k = {k}"
            )));
        }
        if sigma == 0 || sigma > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("unsupported sigma {sigma}")));
        }
        let bits = letter_bits(sigma);
        if k as u32 * bits > 128 {
            return Err(Error::InvalidParameter(format!(
                "k = {k} too large for sigma = {sigma} (k-mers are packed into 128 bits)"
            )));
        }
        let base = (splitmix64(order.seed()) % (KR_MOD - (1 << 20))) + (1 << 20);
        Ok(Self {
            ell,
            k,
            order,
            sigma,
            bits,
            base,
        })
    }

    /// Scheme with [`default_k`] and fingerprint order under `seed`.
    pub fn with_defaults(ell: usize, sigma: usize, seed: u64) -> Result<Self> {
        Self::new(ell, default_k(ell, sigma), Order::Fingerprint { seed }, sigma)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    fn pack(&self, kmer: &[u8]) -> u128 {
        kmer.iter()
            .fold(0u128, |acc, &c| (acc << self.bits) | c as u128)
    }

    fn fingerprint_of_packed(&self, packed: u128) -> u64 {
        match self.order {
            Order::Lexicographic => 0,
            Order::Fingerprint { .. } => {
                let mask = (1u128 << self.bits) - 1;
                let mut h = 0u64;
                for t in (0..self.k).rev() {
                    let c = ((packed >> (t as u32 * self.bits)) & mask) as u64;
                    h = (mulmod(h, self.base) + c + 1) % KR_MOD;
                }
                h
            }
        }
    }

    fn key_of_packed(&self, packed: u128) -> KmerKey {
        KmerKey {
            fingerprint: self.fingerprint_of_packed(packed),
            packed,
        }
    }

    pub fn kmer_key(&self, kmer: &[u8]) -> KmerKey {
        debug_assert_eq!(kmer.len(), self.k);
        self.key_of_packed(self.pack(kmer))
    }

    /// 1-based offset of the leftmost smallest k-mer of a length-ℓ window.
    pub fn window_minimizer(&self, window: &[u8]) -> Result<usize> {
        if window.len() != self.ell {
            return Err(Error::InvalidParameter(format!(
                "window of length {} but ell = {}",
                window.len(),
                self.ell
            )));
        }
        Ok(self.min_offset(window))
    }

    fn min_offset(&self, window: &[u8]) -> usize {
        let mut best = (self.kmer_key(&window[..self.k]), 1);
        for off in 1..=window.len() - self.k {
            let key = self.kmer_key(&window[off..off + self.k]);
            if key < best.0 {
                best = (key, off + 1);
            }
        }
        best.1
    }

    /// The leftmost minimizer μ of a pattern, `f(P[1..ℓ])`.
    pub fn leftmost_pattern_minimizer(&self, pattern: &[u8]) -> Result<usize> {
        if pattern.len() < self.ell {
            return Err(Error::PatternTooShort {
                m: pattern.len(),
                ell: self.ell,
            });
        }
        Ok(self.min_offset(&pattern[..self.ell]))
    }

    /// 1-based minimizer positions of a plain string, ascending. Strings
    /// shorter than ℓ have none.
    pub fn minimizer_set_plain(&self, s: &[u8]) -> Vec<usize> {
        if s.len() < self.ell {
            return Vec::new();
        }
        let (k, w) = (self.k, self.ell - self.k + 1);
        let mut out = Vec::new();
        let mut deque: VecDeque<(KmerKey, usize)> = VecDeque::new();
        for start in 0..=s.len() - k {
            let key = self.kmer_key(&s[start..start + k]);
            while deque.back().is_some_and(|&(b, _)| b > key) {
                deque.pop_back();
            }
            deque.push_back((key, start));
            if start + 1 >= w {
                let window_start = start + 1 - w;
                while deque.front().is_some_and(|&(_, p)| p < window_start) {
                    deque.pop_front();
                }
                let pos = deque.front().unwrap().1 + 1;
                if out.last() != Some(&pos) {
                    out.push(pos);
                }
            }
        }
        out
    }

    /// Minimizers of every property-respecting window of a z-estimation.
    pub fn minimizer_set_family(&self, family: &EstimationFamily) -> MinimizerSet {
        let mut entries = BTreeSet::new();
        let n = family.len();
        for (j, (s, pi)) in family.strings().iter().zip(family.properties()).enumerate() {
            if n < self.ell {
                continue;
            }
            for i in 1..=n - self.ell + 1 {
                if i + self.ell - 1 <= pi.get(i) {
                    let off = self.min_offset(&s[i - 1..i - 1 + self.ell]);
                    entries.insert((i + off - 1, j + 1));
                }
            }
        }
        MinimizerSet { entries }
    }
}

/// Minimizers of a z-estimation as `(position, string index)` pairs,
/// both 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinimizerSet {
    pub entries: BTreeSet<(usize, usize)>,
}

impl MinimizerSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|&(i, _)| i).collect()
    }

    pub fn in_string(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().filter(move |e| e.1 == j).map(|e| e.0)
    }
}

/// Minimizer of the front window of a string that grows and shrinks at its
/// front, as the current string does during the depth-first construction.
///
/// k-mer keys are kept per string length on a stack, and a segment tree over
/// stack depths answers the window minimum in O(log n).
#[derive(Debug, Clone)]
pub struct SlidingKmerHeap {
    scheme: MinimizerScheme,
    letters: Vec<u8>,
    // packed[d] is the packed code of the first min(d, k) letters when the
    // string has length d, left-aligned as a k-mer.
    packed: Vec<u128>,
    size: usize,
    tree: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Slot {
    key: KmerKey,
    // Larger depth means further left in the string; ties go to the left.
    neg_depth: i64,
}

const EMPTY: Slot = Slot {
    key: KmerKey {
        fingerprint: u64::MAX,
        packed: u128::MAX,
    },
    neg_depth: i64::MAX,
};

impl SlidingKmerHeap {
    pub fn new(scheme: MinimizerScheme, capacity: usize) -> Self {
        let size = (capacity + 1).next_power_of_two();
        Self {
            scheme,
            letters: Vec::with_capacity(capacity),
            packed: vec![0],
            size,
            tree: vec![EMPTY; 2 * size],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn set(&mut self, depth: usize, slot: Slot) {
        let mut idx = self.size + depth;
        self.tree[idx] = slot;
        while idx > 1 {
            idx /= 2;
            self.tree[idx] = self.tree[2 * idx].min(self.tree[2 * idx + 1]);
        }
    }

    /// Prepends a letter to the string.
    pub fn prepend(&mut self, letter: u8) {
        let s = &self.scheme;
        let prev = *self.packed.last().unwrap();
        let code = ((letter as u128) << (s.bits * (s.k as u32 - 1))) | (prev >> s.bits);
        let key = (self.letters.len() + 1 >= s.k).then(|| s.key_of_packed(code));
        self.letters.push(letter);
        self.packed.push(code);
        if self.letters.len() >= self.size {
            self.grow();
        }
        if let Some(key) = key {
            let d = self.letters.len();
            self.set(
                d,
                Slot {
                    key,
                    neg_depth: -(d as i64),
                },
            );
        }
    }

    fn grow(&mut self) {
        let old: Vec<Slot> = self.tree[self.size..2 * self.size].to_vec();
        self.size *= 2;
        self.tree = vec![EMPTY; 2 * self.size];
        for (d, slot) in old.into_iter().enumerate() {
            if slot != EMPTY {
                self.set(d, slot);
            }
        }
    }

    /// Removes the first letter.
    pub fn drop_front(&mut self) {
        let d = self.letters.len();
        if d == 0 {
            return;
        }
        self.set(d, EMPTY);
        self.letters.pop();
        self.packed.pop();
    }

    /// Minimizer of the first `min(ℓ, len)` letters: its key and 1-based
    /// offset. Fails while fewer than k letters are present.
    pub fn current_min(&self) -> Result<(KmerKey, usize)> {
        let d = self.letters.len();
        let s = &self.scheme;
        if d < s.k {
            return Err(Error::InvalidParameter(format!(
                "window of {d} letters is shorter than k = {}",
                s.k
            )));
        }
        let width = s.ell.min(d) - s.k + 1;
        let (mut lo, mut hi) = (self.size + d + 1 - width, self.size + d + 1);
        let mut best = EMPTY;
        while lo < hi {
            if lo & 1 == 1 {
                best = best.min(self.tree[lo]);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                best = best.min(self.tree[hi]);
            }
            lo /= 2;
            hi /= 2;
        }
        let depth = (-best.neg_depth) as usize;
        Ok((best.key, d - depth + 1))
    }

    /// The current string, front first.
    pub fn front(&self, len: usize) -> Vec<u8> {
        self.letters.iter().rev().take(len).copied().collect()
    }
}
