//! Binary index container. All integers are fixed-width little-endian; the
//! layout is described in `docs/FORMAT.md`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::minimizers::{MinimizerScheme, Order};
use crate::model::{Alphabet, HeavyContext, Threshold, WeightedString};
use crate::trees::{Anchor, Diff, Direction, Handle, MinimizerFactorTree, Node};

pub const MAGIC: &[u8; 8] = b"MINWST\0\0";
pub const VERSION: u32 = 1;

const FLAG_RETAIN_X: u8 = 1;
const FLAG_FALLBACK: u8 = 2;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u32_raw(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len());
        self.buf.extend_from_slice(b);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Corrupt(format!("truncated at byte {}", self.at)))?;
        let out = &self.buf[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32_raw(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(self.u32_raw()? as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()?;
        self.take(n)
    }
    /// Element count, checked against the bytes left so corrupt input
    /// cannot request huge allocations.
    fn count(&mut self, min_size: usize) -> Result<usize> {
        let n = self.u32()?;
        if n.saturating_mul(min_size) > self.buf.len() - self.at {
            return Err(Error::Corrupt(format!("count {n} exceeds remaining bytes")));
        }
        Ok(n)
    }
}

/// Mismatches as `(gap, letter)` where the gap is measured from the
/// previous entry (or from `origin`) along the reading direction.
fn write_diffs(w: &mut Writer, dir: Direction, origin: usize, diffs: &[(usize, u8)]) {
    w.u8(diffs.len() as u8);
    let mut prev = origin;
    for &(pos, letter) in diffs {
        let gap = match dir {
            Direction::Forward => pos - prev,
            Direction::Backward => prev - pos,
        };
        w.u32(gap);
        w.u8(letter);
        prev = pos;
    }
}

fn read_diffs(r: &mut Reader, dir: Direction, origin: usize, n: usize) -> Result<Vec<(usize, u8)>> {
    let count = r.u8()? as usize;
    let mut prev = origin;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let gap = r.u32()?;
        let letter = r.u8()?;
        let pos = match dir {
            Direction::Forward => prev.checked_add(gap),
            Direction::Backward => prev.checked_sub(gap),
        }
        .filter(|&p| p >= 1 && p <= n)
        .ok_or_else(|| Error::Corrupt("mismatch position out of range".into()))?;
        out.push((pos, letter));
        prev = pos;
    }
    Ok(out)
}

fn write_tree(w: &mut Writer, t: &MinimizerFactorTree) {
    w.u8(t.dir.tag());
    w.u32(t.nodes.len());
    for node in &t.nodes {
        w.u32_raw(node.parent);
        w.u32_raw(node.first_child);
        w.u32_raw(node.next_sibling);
        w.u32_raw(node.depth);
        w.u32(node.edge.start);
        w.u32(node.edge.len);
        write_diffs(w, t.dir, node.edge.start, &node.edge.diffs);
        w.u32_raw(node.lo);
        w.u32_raw(node.hi);
        w.u32_raw(node.own);
    }
    w.u32(t.leaf_anchor.len());
    for &a in &t.leaf_anchor {
        w.u32_raw(a);
    }
}

fn read_tree(r: &mut Reader, n: usize, anchors: usize) -> Result<MinimizerFactorTree> {
    let dir = match r.u8()? {
        0 => Direction::Forward,
        1 => Direction::Backward,
        d => return Err(Error::Corrupt(format!("bad tree direction {d}"))),
    };
    let count = r.count(37)?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let parent = r.u32_raw()?;
        let first_child = r.u32_raw()?;
        let next_sibling = r.u32_raw()?;
        let depth = r.u32_raw()?;
        let start = r.u32()?;
        let len = r.u32()?;
        let diffs = read_diffs(r, dir, start, n)?;
        let (lo, hi, own) = (r.u32_raw()?, r.u32_raw()?, r.u32_raw()?);
        nodes.push(Node {
            parent,
            first_child,
            next_sibling,
            depth,
            edge: Handle {
                dir,
                start,
                len,
                diffs,
            },
            lo,
            hi,
            own,
        });
    }
    // Preorder storage makes every link point forwards, except to the
    // parent, so no chain of links can cycle.
    let none = crate::trees::NONE;
    let links_ok = nodes.iter().enumerate().all(|(id, v)| {
        let id = id as u32;
        let in_range = |l: u32| l == none || (l as usize) < count;
        let parent_ok = if id == 0 { v.parent == none } else { v.parent < id };
        parent_ok
            && in_range(v.first_child)
            && in_range(v.next_sibling)
            && (v.first_child == none || v.first_child == id + 1)
            && (v.next_sibling == none || (v.next_sibling > id && id > 0))
    });
    if count == 0 || !links_ok {
        return Err(Error::Corrupt("bad tree links".into()));
    }
    for v in &nodes {
        let span_ok = v.edge.len == 0
            || match dir {
                Direction::Forward => v.edge.start >= 1 && v.edge.start + v.edge.len <= n + 1,
                Direction::Backward => v.edge.start <= n && v.edge.start >= v.edge.len,
            };
        if !span_ok {
            return Err(Error::Corrupt("edge outside the text".into()));
        }
    }
    let leaves = r.count(4)?;
    let mut leaf_anchor = Vec::with_capacity(leaves);
    for _ in 0..leaves {
        let a = r.u32_raw()?;
        if a as usize >= anchors {
            return Err(Error::Corrupt("leaf refers to a missing anchor".into()));
        }
        leaf_anchor.push(a);
    }
    if nodes.iter().any(|v| v.lo > v.hi || v.hi as usize > leaves) {
        return Err(Error::Corrupt("leaf range out of bounds".into()));
    }
    Ok(MinimizerFactorTree {
        dir,
        nodes,
        leaf_anchor,
    })
}

impl Index {
    /// Canonical serialization; equal indexes give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u32_raw(VERSION);
        let n = self.len();
        w.u64(n as u64);
        w.u32(self.alphabet.size());
        for l in self.alphabet.letters() {
            w.bytes(l.as_bytes());
        }
        w.f64(self.threshold.z());
        let s = &self.scheme;
        w.u32(s.ell());
        w.u32(s.k());
        w.u8(s.order().tag());
        w.u64(s.order().seed());
        let mut flags = 0;
        if self.x.is_some() {
            flags |= FLAG_RETAIN_X;
        }
        if self.fallback {
            flags |= FLAG_FALLBACK;
        }
        w.u8(flags);

        w.buf.extend_from_slice(self.heavy.heavy());
        for &v in &self.heavy.pp_log()[1..] {
            w.f64(v);
        }

        w.u32(self.anchors.len());
        for a in &self.anchors {
            w.u32(a.pos);
            let pairs = a.pairs();
            write_diffs(&mut w, Direction::Forward, 0, &pairs);
            for d in &a.diffs {
                w.f64(d.log_prob);
            }
        }
        write_tree(&mut w, &self.forward);
        write_tree(&mut w, &self.backward);

        w.u32(self.grid.len());
        for &y in self.grid.ys() {
            w.u32_raw(y);
        }

        if let Some(x) = &self.x {
            for pos in 1..=n {
                for &p in x.row(pos) {
                    w.f64(p);
                }
            }
        }
        w.buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Corrupt("bad magic".into()));
        }
        let version = r.u32_raw()?;
        if version != VERSION {
            return Err(Error::Corrupt(format!("unsupported version {version}")));
        }
        let n = r.u64()? as usize;
        if n == 0 || n > buf.len() {
            return Err(Error::Corrupt(format!("bad length {n}")));
        }
        let sigma = r.count(4)?;
        let mut letters = Vec::with_capacity(sigma);
        for _ in 0..sigma {
            let b = r.bytes()?;
            letters.push(
                std::str::from_utf8(b)
                    .map_err(|_| Error::Corrupt("letter is not UTF-8".into()))?
                    .to_string(),
            );
        }
        let alphabet = Alphabet::new(&letters)?;
        let threshold = Threshold::new(r.f64()?)?;
        let ell = r.u32()?;
        let k = r.u32()?;
        let tag = r.u8()?;
        let seed = r.u64()?;
        let order = match tag {
            0 => Order::Lexicographic,
            1 => Order::Fingerprint { seed },
            t => return Err(Error::Corrupt(format!("bad order tag {t}"))),
        };
        let scheme = MinimizerScheme::new(ell, k, order, sigma)?;
        let flags = r.u8()?;

        let heavy_letters = r.take(n)?.to_vec();
        if heavy_letters.iter().any(|&c| c as usize >= sigma) {
            return Err(Error::Corrupt("heavy letter outside the alphabet".into()));
        }
        let mut pp_log = Vec::with_capacity(n + 1);
        pp_log.push(0.0);
        for _ in 0..n {
            let v = r.f64()?;
            if !v.is_finite() || v > 1e-9 {
                return Err(Error::Corrupt("bad heavy prefix probability".into()));
            }
            pp_log.push(v);
        }
        let heavy = HeavyContext::from_parts(heavy_letters, pp_log);

        let count = r.count(5)?;
        let mut anchors = Vec::with_capacity(count);
        for _ in 0..count {
            let pos = r.u32()?;
            if pos == 0 || pos > n {
                return Err(Error::Corrupt("anchor position out of range".into()));
            }
            let pairs = read_diffs(&mut r, Direction::Forward, 0, n)?;
            if pairs.len() > threshold.max_mismatches() {
                return Err(Error::Corrupt("anchor with too many mismatches".into()));
            }
            let mut diffs = Vec::with_capacity(pairs.len());
            for (p, letter) in pairs {
                if letter as usize >= sigma {
                    return Err(Error::Corrupt("mismatch letter outside the alphabet".into()));
                }
                diffs.push(Diff {
                    pos: p,
                    letter,
                    log_prob: r.f64()?,
                });
            }
            anchors.push(Anchor { pos, diffs });
        }
        let forward = read_tree(&mut r, n, anchors.len())?;
        let backward = read_tree(&mut r, n, anchors.len())?;
        if forward.dir != Direction::Forward || backward.dir != Direction::Backward {
            return Err(Error::Corrupt("trees stored in the wrong order".into()));
        }
        let max = threshold.max_mismatches();
        forward.validate(heavy.heavy(), max)?;
        backward.validate(heavy.heavy(), max)?;

        let points = r.count(4)?;
        let mut ys = Vec::with_capacity(points);
        for _ in 0..points {
            ys.push(r.u32_raw()?);
        }

        let x = if flags & FLAG_RETAIN_X != 0 {
            let mut probs = Vec::with_capacity(n * sigma);
            for _ in 0..n * sigma {
                probs.push(r.f64()?);
            }
            Some(WeightedString::from_flat(alphabet.clone(), n, probs)?)
        } else {
            None
        };
        if r.at != buf.len() {
            return Err(Error::Corrupt("trailing bytes".into()));
        }

        let index = Index::finish(alphabet, threshold, scheme, heavy, anchors, forward, backward, x)?;
        if index.grid().ys() != ys.as_slice() {
            return Err(Error::Corrupt("grid does not match the trees".into()));
        }
        if index.fallback() != (flags & FLAG_FALLBACK != 0) {
            return Err(Error::Corrupt("fallback flag disagrees with parameters".into()));
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    /// Serialized size in bytes.
    pub fn size_bytes(&self) -> usize {
        self.to_bytes().len()
    }
}
