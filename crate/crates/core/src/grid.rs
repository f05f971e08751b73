//! Points pairing forward and backward leaf ranks, with orthogonal range
//! reporting over a wavelet matrix.

use std::ops::Range;

use crate::error::{Error, Result};

/// Below this many points a linear scan answers queries.
pub const SCAN_THRESHOLD: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub x: u32,
    pub y: u32,
    pub anchor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitVec {
    words: Vec<u64>,
    // ones before each word
    ranks: Vec<u32>,
}

impl BitVec {
    fn new(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64) + 1];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        let mut ranks = Vec::with_capacity(words.len());
        let mut acc = 0u32;
        for w in &words {
            ranks.push(acc);
            acc += w.count_ones();
        }
        Self { words, ranks }
    }

    /// Ones in `[0, i)`.
    #[inline]
    fn rank1(&self, i: usize) -> usize {
        let (w, b) = (i / 64, i % 64);
        let mask = if b == 0 { 0 } else { u64::MAX >> (64 - b) };
        self.ranks[w] as usize + (self.words[w] & mask).count_ones() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct WaveletMatrix {
    levels: Vec<BitVec>,
    zeros: Vec<usize>,
    bits: u32,
}

impl WaveletMatrix {
    fn new(values: &[u32]) -> Self {
        let max = values.iter().copied().max().unwrap_or(0);
        let bits = (32 - max.leading_zeros()).max(1);
        let mut cur = values.to_vec();
        let mut levels = Vec::with_capacity(bits as usize);
        let mut zeros = Vec::with_capacity(bits as usize);
        for l in (0..bits).rev() {
            let flags: Vec<bool> = cur.iter().map(|v| (v >> l) & 1 == 1).collect();
            levels.push(BitVec::new(&flags));
            let (z, o): (Vec<u32>, Vec<u32>) = cur.iter().partition(|v| (*v >> l) & 1 == 0);
            zeros.push(z.len());
            cur = z;
            cur.extend(o);
        }
        Self { levels, zeros, bits }
    }

    /// Values at positions `[b, e)` lying in `[lo, hi)`.
    fn report(&self, b: usize, e: usize, lo: u32, hi: u32, out: &mut Vec<u32>) {
        // (level, b, e, prefix)
        let mut work = vec![(0usize, b, e, 0u32)];
        while let Some((level, b, e, prefix)) = work.pop() {
            if b >= e {
                continue;
            }
            let rest = self.bits as usize - level;
            let span_lo = (prefix as u64) << rest;
            let span_hi = ((prefix as u64) + 1) << rest;
            if span_hi <= lo as u64 || span_lo >= hi as u64 {
                continue;
            }
            if level == self.bits as usize {
                out.push(prefix);
                continue;
            }
            let bv = &self.levels[level];
            let (ob, oe) = (bv.rank1(b), bv.rank1(e));
            let z = self.zeros[level];
            work.push((level + 1, z + ob, z + oe, prefix * 2 + 1));
            work.push((level + 1, b - ob, e - oe, prefix * 2));
        }
    }
}

/// `ys[x]` is the backward rank paired with forward rank `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    ys: Vec<u32>,
    x_of_y: Vec<u32>,
    anchors: Vec<u32>,
    wm: Option<WaveletMatrix>,
}

impl Grid {
    /// `fwd[x]` and `bwd[y]` are the anchors at each leaf rank. Every anchor
    /// must appear exactly once on each side.
    pub fn build(fwd: &[u32], bwd: &[u32]) -> Result<Self> {
        let n = fwd.len();
        if bwd.len() != n {
            return Err(Error::Internal(format!(
                "{} forward leaves but {} backward leaves",
                n,
                bwd.len()
            )));
        }
        let mut y_of_anchor = vec![u32::MAX; n];
        for (y, &a) in bwd.iter().enumerate() {
            let slot = y_of_anchor
                .get_mut(a as usize)
                .ok_or_else(|| Error::Internal(format!("anchor {a} out of range")))?;
            if *slot != u32::MAX {
                return Err(Error::Internal(format!("anchor {a} repeated in backward tree")));
            }
            *slot = y as u32;
        }
        let mut ys = Vec::with_capacity(n);
        for &a in fwd {
            let y = *y_of_anchor
                .get(a as usize)
                .filter(|&&y| y != u32::MAX)
                .ok_or_else(|| Error::Internal(format!("anchor {a} has no backward leaf")))?;
            ys.push(y);
        }
        Self::from_ys(ys, fwd.to_vec())
    }

    pub fn from_ys(ys: Vec<u32>, anchors: Vec<u32>) -> Result<Self> {
        let n = ys.len();
        let mut x_of_y = vec![u32::MAX; n];
        for (x, &y) in ys.iter().enumerate() {
            match x_of_y.get_mut(y as usize) {
                Some(s) if *s == u32::MAX => *s = x as u32,
                _ => return Err(Error::Corrupt("grid is not a permutation".into())),
            }
        }
        let wm = (n >= SCAN_THRESHOLD).then(|| WaveletMatrix::new(&ys));
        Ok(Self {
            ys,
            x_of_y,
            anchors,
            wm,
        })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn ys(&self) -> &[u32] {
        &self.ys
    }

    pub fn point(&self, x: usize) -> GridPoint {
        GridPoint {
            x: x as u32,
            y: self.ys[x],
            anchor: self.anchors[x],
        }
    }

    /// Points with `x` in `xs` and `y` in `ys`, ascending by `x`.
    pub fn range_report(&self, xs: Range<usize>, ys: Range<usize>) -> Vec<GridPoint> {
        let n = self.len();
        let (x0, x1) = (xs.start.min(n), xs.end.min(n));
        let (y0, y1) = (ys.start.min(n), ys.end.min(n));
        if x0 >= x1 || y0 >= y1 {
            return Vec::new();
        }
        match &self.wm {
            Some(wm) => {
                let mut found = Vec::new();
                wm.report(x0, x1, y0 as u32, y1 as u32, &mut found);
                let mut xs: Vec<usize> = found.iter().map(|&y| self.x_of_y[y as usize] as usize).collect();
                xs.sort_unstable();
                xs.into_iter().map(|x| self.point(x)).collect()
            }
            None => self.scan(x0..x1, y0..y1),
        }
    }

    /// Reference answer by linear scan.
    pub fn scan(&self, xs: Range<usize>, ys: Range<usize>) -> Vec<GridPoint> {
        let n = self.len();
        (xs.start.min(n)..xs.end.min(n))
            .filter(|&x| ys.contains(&(self.ys[x] as usize)))
            .map(|x| self.point(x))
            .collect()
    }
}
