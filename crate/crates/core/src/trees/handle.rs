//! Strings stored relative to the heavy string: a start position, a
//! direction, a length and the few positions where they differ from `H`.

use std::cmp::Ordering;

use crate::model::HeavyContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Reads `H[start], H[start + 1], ...`.
    Forward,
    /// Reads `H[start], H[start - 1], ...`.
    Backward,
}

impl Direction {
    pub fn tag(self) -> u8 {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    /// Position of offset `t` (0-based) from `start`.
    #[inline]
    pub fn step(self, start: usize, t: usize) -> usize {
        match self {
            Direction::Forward => start + t,
            Direction::Backward => start - t,
        }
    }

    #[inline]
    fn offset(self, start: usize, pos: usize) -> usize {
        match self {
            Direction::Forward => pos - start,
            Direction::Backward => start - pos,
        }
    }
}

/// A heavy-relative string. `diffs` holds `(position, letter)` pairs in
/// reading order, each inside the string's span.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Handle {
    pub dir: Direction,
    pub start: usize,
    pub len: usize,
    pub diffs: Vec<(usize, u8)>,
}

impl Handle {
    /// Builds a handle, keeping only the diffs inside the span.
    pub fn new(dir: Direction, start: usize, len: usize, diffs: &[(usize, u8)]) -> Self {
        let mut kept: Vec<(usize, u8)> = diffs
            .iter()
            .copied()
            .filter(|&(p, _)| match dir {
                Direction::Forward => p >= start && p < start + len,
                Direction::Backward => p <= start && p + len > start,
            })
            .collect();
        match dir {
            Direction::Forward => kept.sort_unstable_by_key(|d| d.0),
            Direction::Backward => kept.sort_unstable_by_key(|d| std::cmp::Reverse(d.0)),
        }
        Self {
            dir,
            start,
            len,
            diffs: kept,
        }
    }

    #[inline]
    pub fn char_at(&self, heavy: &[u8], t: usize) -> u8 {
        let pos = self.dir.step(self.start, t);
        self.diffs
            .iter()
            .find(|d| d.0 == pos)
            .map_or(heavy[pos - 1], |d| d.1)
    }

    pub fn decode(&self, heavy: &[u8]) -> Vec<u8> {
        (0..self.len).map(|t| self.char_at(heavy, t)).collect()
    }

    /// The sub-handle covering offsets `[from, from + len)`.
    pub fn slice(&self, from: usize, len: usize) -> Handle {
        Handle::new(self.dir, self.dir.step(self.start, from), len, &self.diffs)
    }

    fn diff_offsets(&self) -> impl Iterator<Item = usize> + '_ {
        self.diffs.iter().map(move |d| self.dir.offset(self.start, d.0))
    }
}

const MOD: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MOD;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MOD {
        s - MOD
    } else {
        s
    }
}

/// Longest-common-extension queries on the heavy string in both reading
/// directions, via Karp-Rabin prefix fingerprints and doubling search.
#[derive(Debug, Clone)]
pub struct HeavyLce {
    heavy: Vec<u8>,
    // fwd[t] fingerprints H[1..t]; bwd[t] fingerprints H[n-t+1..n] read
    // right to left.
    fwd: Vec<u64>,
    bwd: Vec<u64>,
    pow: Vec<u64>,
}

impl HeavyLce {
    pub fn new(heavy: &HeavyContext) -> Self {
        let h = heavy.heavy().to_vec();
        let n = h.len();
        let base = 1_000_003u64;
        let mut pow = vec![1u64; n + 1];
        let mut fwd = vec![0u64; n + 1];
        let mut bwd = vec![0u64; n + 1];
        for t in 0..n {
            pow[t + 1] = mulmod(pow[t], base);
            fwd[t + 1] = (mulmod(fwd[t], base) + h[t] as u64 + 1) % MOD;
            bwd[t + 1] = (mulmod(bwd[t], base) + h[n - 1 - t] as u64 + 1) % MOD;
        }
        Self {
            heavy: h,
            fwd,
            bwd,
            pow,
        }
    }

    pub fn heavy(&self) -> &[u8] {
        &self.heavy
    }

    fn sub(table: &[u64], pow: &[u64], from: usize, len: usize) -> u64 {
        let hi = table[from + len];
        let lo = mulmod(table[from], pow[len]);
        (hi + MOD - lo) % MOD
    }

    fn fingerprint(&self, dir: Direction, pos: usize, len: usize) -> u64 {
        match dir {
            // H[pos..pos+len-1] is fwd[pos-1+len] minus fwd[pos-1].
            Direction::Forward => Self::sub(&self.fwd, &self.pow, pos - 1, len),
            // Reading left from pos: index into the reversed string.
            Direction::Backward => {
                let n = self.heavy.len();
                Self::sub(&self.bwd, &self.pow, n - pos, len)
            }
        }
    }

    /// Longest `l <= max` with the heavy strings read from `a` and `b` in
    /// direction `dir` agreeing on `l` letters.
    pub fn lce(&self, dir: Direction, a: usize, b: usize, max: usize) -> usize {
        if a == b {
            return max;
        }
        if max == 0 || self.heavy[a - 1] != self.heavy[b - 1] {
            return 0;
        }
        // Doubling, then binary search on the last step.
        let mut lo = 1;
        let mut step = 1;
        while lo < max {
            let hi = (lo + step).min(max);
            if self.fingerprint(dir, a, hi) == self.fingerprint(dir, b, hi) {
                lo = hi;
                step *= 2;
            } else {
                let (mut l, mut r) = (lo, hi - 1);
                while l < r {
                    let mid = (l + r).div_ceil(2);
                    if self.fingerprint(dir, a, mid) == self.fingerprint(dir, b, mid) {
                        l = mid;
                    } else {
                        r = mid - 1;
                    }
                }
                return l;
            }
        }
        lo
    }
}

/// Length of the longest common prefix of two handles read in the same
/// direction.
pub fn heavy_lcp(lce: &HeavyLce, a: &Handle, b: &Handle) -> usize {
    debug_assert_eq!(a.dir, b.dir);
    let dir = a.dir;
    let heavy = lce.heavy();
    let lim = a.len.min(b.len);
    let mut special: Vec<usize> = a.diff_offsets().chain(b.diff_offsets()).collect();
    special.sort_unstable();
    special.dedup();
    let mut t = 0;
    for q in special {
        if q >= lim {
            break;
        }
        if q < t {
            continue;
        }
        let l = lce.lce(dir, dir.step(a.start, t), dir.step(b.start, t), q - t);
        if l < q - t {
            return t + l;
        }
        if a.char_at(heavy, q) != b.char_at(heavy, q) {
            return q;
        }
        t = q + 1;
    }
    if t >= lim {
        return lim;
    }
    t + lce.lce(dir, dir.step(a.start, t), dir.step(b.start, t), lim - t)
}

/// Lexicographic comparison of the decoded strings.
pub fn heavy_cmp(lce: &HeavyLce, a: &Handle, b: &Handle) -> Ordering {
    let l = heavy_lcp(lce, a, b);
    if l == a.len || l == b.len {
        return a.len.cmp(&b.len);
    }
    let heavy = lce.heavy();
    a.char_at(heavy, l).cmp(&b.char_at(heavy, l))
}

/// Orders the first `q.len()` letters of `h` against `q`; `Equal` when `q`
/// is a prefix of `h`.
pub fn cmp_prefix(heavy: &[u8], h: &Handle, q: &[u8]) -> Ordering {
    for (t, &c) in q.iter().enumerate() {
        if t >= h.len {
            return Ordering::Less;
        }
        match h.char_at(heavy, t).cmp(&c) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::random_mixed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_lcp(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).take_while(|(x, y)| x == y).count()
    }

    fn random_handle(rng: &mut ChaCha8Rng, heavy: &[u8], dir: Direction, sigma: u8) -> Handle {
        let n = heavy.len();
        let start = rng.gen_range(1..=n);
        let max = match dir {
            Direction::Forward => n - start + 1,
            Direction::Backward => start,
        };
        let len = rng.gen_range(0..=max);
        let mut diffs = Vec::new();
        for _ in 0..rng.gen_range(0..4) {
            if len == 0 {
                break;
            }
            let pos = dir.step(start, rng.gen_range(0..len));
            let c = (heavy[pos - 1] + rng.gen_range(1..sigma)) % sigma;
            if !diffs.iter().any(|d: &(usize, u8)| d.0 == pos) {
                diffs.push((pos, c));
            }
        }
        Handle::new(dir, start, len, &diffs)
    }

    #[test]
    fn lcp_matches_decoded_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for round in 0..40 {
            let sigma = if round % 2 == 0 { 2 } else { 4 };
            let n = rng.gen_range(1..80);
            let x = random_mixed(&mut rng, n, sigma, 0.2);
            let ctx = HeavyContext::build(&x);
            let lce = HeavyLce::new(&ctx);
            let h = ctx.heavy();
            for _ in 0..200 {
                let dir = if rng.gen_bool(0.5) {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                let a = random_handle(&mut rng, h, dir, sigma as u8);
                let b = if rng.gen_bool(0.2) {
                    a.clone()
                } else {
                    random_handle(&mut rng, h, dir, sigma as u8)
                };
                let (da, db) = (a.decode(h), b.decode(h));
                assert_eq!(heavy_lcp(&lce, &a, &b), naive_lcp(&da, &db));
                assert_eq!(heavy_cmp(&lce, &a, &b), da.cmp(&db));
            }
        }
    }

    #[test]
    fn single_diff_gives_offset() {
        let x = crate::model::fixtures::example();
        let ctx = HeavyContext::build(&x);
        let lce = HeavyLce::new(&ctx);
        let a = Handle::new(Direction::Forward, 1, 6, &[]);
        let b = Handle::new(Direction::Forward, 1, 6, &[(4, 1)]);
        assert_eq!(heavy_lcp(&lce, &a, &a), 6);
        assert_eq!(heavy_lcp(&lce, &a, &b), 3);
    }

    #[test]
    fn slice_and_prefix_compare() {
        let heavy = [0u8, 0, 0, 0, 0, 1];
        let h = Handle::new(Direction::Backward, 5, 5, &[(2, 1)]);
        assert_eq!(h.decode(&heavy), vec![0, 0, 0, 1, 0]);
        assert_eq!(h.slice(2, 3).decode(&heavy), vec![0, 1, 0]);
        assert_eq!(cmp_prefix(&heavy, &h, &[0, 0, 0]), Ordering::Equal);
        assert_eq!(cmp_prefix(&heavy, &h, &[0, 0, 1]), Ordering::Less);
        assert_eq!(cmp_prefix(&heavy, &h, &[0, 0, 0, 1, 0, 0]), Ordering::Less);
    }
}
