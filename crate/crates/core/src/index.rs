//! Building an index: anchors from either construction path, both trees,
//! their array forms and the grid.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimation::build_estimation;
use crate::grid::Grid;
use crate::minimizers::{default_k, MinimizerScheme, Order};
use crate::model::{Alphabet, HeavyContext, Threshold, WeightedString};
use crate::trees::{
    anchors_from_family, build_extended, raw_tree_plain, reverse_and_compact, Anchor, ArrayIndex,
    DfsStats, Direction, Handle, HeavyLce, MinimizerFactorTree, RawTree,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildPath {
    /// Materialize a z-estimation, enumerate its factors, build tries from
    /// decoded strings.
    Naive,
    /// Depth-first walk with only the current path uncompacted.
    SpaceEfficient,
}

impl std::str::FromStr for BuildPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(BuildPath::Naive),
            "se" | "space-efficient" => Ok(BuildPath::SpaceEfficient),
            _ => Err(Error::InvalidParameter(format!("unknown build path {s:?}"))),
        }
    }
}

impl std::fmt::Display for BuildPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BuildPath::Naive => "naive",
            BuildPath::SpaceEfficient => "se",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub z: f64,
    pub ell: usize,
    /// `None` picks `default_k(ell, sigma)`.
    pub k: Option<usize>,
    pub order: Order,
    pub path: BuildPath,
    /// Keep the weighted string for verification.
    pub retain_x: bool,
}

impl BuildConfig {
    pub fn new(z: f64, ell: usize) -> Self {
        Self {
            z,
            ell,
            k: None,
            order: Order::Fingerprint {
                seed: crate::minimizers::DEFAULT_SEED,
            },
            path: BuildPath::SpaceEfficient,
            retain_x: true,
        }
    }

    pub fn scheme(&self, sigma: usize) -> Result<MinimizerScheme> {
        let k = self.k.unwrap_or_else(|| default_k(self.ell, sigma).min(self.ell));
        MinimizerScheme::new(self.ell, k, self.order, sigma)
    }
}

/// Construction counters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BuildStats {
    pub anchors: usize,
    pub forward_nodes: usize,
    pub backward_nodes: usize,
    /// Space-efficient path only.
    pub dfs: Option<DfsStats>,
    /// Naive path only: letters of the materialized family.
    pub family_letters: Option<usize>,
    pub seconds: f64,
}

/// Everything a query needs.
#[derive(Debug, Clone)]
pub struct Index {
    pub(crate) alphabet: Alphabet,
    pub(crate) threshold: Threshold,
    pub(crate) scheme: MinimizerScheme,
    pub(crate) heavy: HeavyContext,
    pub(crate) anchors: Vec<Anchor>,
    pub(crate) forward: MinimizerFactorTree,
    pub(crate) backward: MinimizerFactorTree,
    pub(crate) forward_array: ArrayIndex,
    pub(crate) backward_array: ArrayIndex,
    pub(crate) grid: Grid,
    pub(crate) x: Option<WeightedString>,
    pub(crate) fallback: bool,
}

impl Index {
    pub fn build(x: &WeightedString, config: &BuildConfig) -> Result<(Self, BuildStats)> {
        let clock = Instant::now();
        // Positions, node ids and leaf ranks are stored as u32.
        if x.len() >= u32::MAX as usize / 2 {
            return Err(Error::InvalidParameter(format!("text of length {} is too long", x.len())));
        }
        let t = Threshold::new(config.z)?;
        let scheme = config.scheme(x.sigma())?;
        let heavy = HeavyContext::build(x);
        let lce = HeavyLce::new(&heavy);
        let n = x.len();
        let mut stats = BuildStats::default();

        let (anchors, raw_f, raw_b) = match config.path {
            BuildPath::Naive => {
                let family = build_estimation(x, t)?;
                stats.family_letters = Some(family.resident_letters());
                let anchors = anchors_from_family(x, &heavy, &family, &scheme);
                let h = heavy.heavy();
                let fs: Vec<Vec<u8>> = anchors.iter().map(|a| a.forward_handle(n).decode(h)).collect();
                let bs: Vec<Vec<u8>> = anchors.iter().map(|a| a.backward_handle().decode(h)).collect();
                let (rf, rb) = (raw_tree_plain(&fs), raw_tree_plain(&bs));
                (anchors, rf, rb)
            }
            BuildPath::SpaceEfficient => {
                let (ext, dfs) = build_extended(x, &heavy, t, &scheme)?;
                stats.dfs = Some(dfs);
                let anchors = ext.anchors(x);
                let rf = reverse_and_compact(&anchors, Direction::Forward, &lce);
                let rb = reverse_and_compact(&anchors, Direction::Backward, &lce);
                (anchors, rf, rb)
            }
        };
        let retained = config.retain_x.then(|| x.clone());
        let index = Self::assemble(
            x.alphabet().clone(),
            t,
            scheme,
            heavy,
            anchors,
            &raw_f,
            &raw_b,
            retained,
        )?;
        stats.anchors = index.anchors.len();
        stats.forward_nodes = index.forward.node_count();
        stats.backward_nodes = index.backward.node_count();
        stats.seconds = clock.elapsed().as_secs_f64();
        Ok((index, stats))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        alphabet: Alphabet,
        threshold: Threshold,
        scheme: MinimizerScheme,
        heavy: HeavyContext,
        anchors: Vec<Anchor>,
        raw_f: &RawTree,
        raw_b: &RawTree,
        x: Option<WeightedString>,
    ) -> Result<Self> {
        let n = heavy.len();
        let h = heavy.heavy();
        let fh: Vec<Handle> = anchors.iter().map(|a| a.forward_handle(n)).collect();
        let bh: Vec<Handle> = anchors.iter().map(|a| a.backward_handle()).collect();
        let forward = MinimizerFactorTree::from_raw(raw_f, Direction::Forward, &fh, h)?;
        let backward = MinimizerFactorTree::from_raw(raw_b, Direction::Backward, &bh, h)?;
        let max = threshold.max_mismatches();
        if anchors.iter().any(|a| a.diffs.len() > max) {
            return Err(Error::Internal("anchor exceeds the mismatch bound".into()));
        }
        forward.validate(h, max)?;
        backward.validate(h, max)?;
        Self::finish(alphabet, threshold, scheme, heavy, anchors, forward, backward, x)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn finish(
        alphabet: Alphabet,
        threshold: Threshold,
        scheme: MinimizerScheme,
        heavy: HeavyContext,
        anchors: Vec<Anchor>,
        forward: MinimizerFactorTree,
        backward: MinimizerFactorTree,
        x: Option<WeightedString>,
    ) -> Result<Self> {
        let n = heavy.len();
        let fh: Vec<Handle> = anchors.iter().map(|a| a.forward_handle(n)).collect();
        let bh: Vec<Handle> = anchors.iter().map(|a| a.backward_handle()).collect();
        let forward_array = forward.to_array(&fh);
        let backward_array = backward.to_array(&bh);
        let grid = Grid::build(&forward.leaf_anchor, &backward.leaf_anchor)?;
        let fallback = threshold.max_mismatches() > scheme.ell();
        Ok(Self {
            alphabet,
            threshold,
            scheme,
            heavy,
            anchors,
            forward,
            backward,
            forward_array,
            backward_array,
            grid,
            x,
            fallback,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn scheme(&self) -> &MinimizerScheme {
        &self.scheme
    }

    pub fn heavy(&self) -> &HeavyContext {
        &self.heavy
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn forward(&self) -> &MinimizerFactorTree {
        &self.forward
    }

    pub fn backward(&self) -> &MinimizerFactorTree {
        &self.backward
    }

    pub fn forward_array(&self) -> &ArrayIndex {
        &self.forward_array
    }

    pub fn backward_array(&self) -> &ArrayIndex {
        &self.backward_array
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weighted_string(&self) -> Option<&WeightedString> {
        self.x.as_ref()
    }

    /// Text length `n`.
    pub fn len(&self) -> usize {
        self.heavy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heavy.is_empty()
    }

    /// Set when `floor(log2 z) > ℓ`: sampling no longer bounds the index
    /// size and the build is reported as degraded.
    pub fn fallback(&self) -> bool {
        self.fallback
    }

    /// Drops the weighted string; queries then verify from the anchors'
    /// mismatch records.
    pub fn discard_x(&mut self) {
        self.x = None;
    }

    /// Human-readable tree dump: one line per node, indented by depth,
    /// showing the edge letters and the labels of leaves ending there.
    pub fn dump_tree(&self, dir: Direction) -> String {
        use std::fmt::Write;
        let tree = match dir {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        };
        let h = self.heavy.heavy();
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((v, level)) = stack.pop() {
            let node = &tree.nodes[v];
            let labels: Vec<String> = tree.leaf_anchor[node.lo as usize..(node.lo + node.own) as usize]
                .iter()
                .map(|&a| self.anchor_label(a as usize))
                .collect();
            let _ = writeln!(
                out,
                "{}{}{}{}",
                "  ".repeat(level),
                if v == 0 { "." } else { "" },
                self.alphabet.decode(&node.edge.decode(h)),
                if labels.is_empty() {
                    String::new()
                } else {
                    format!(" {}", labels.join(" "))
                }
            );
            let kids: Vec<usize> = tree.children(v).collect();
            for &c in kids.iter().rev() {
                stack.push((c, level + 1));
            }
        }
        out
    }

    /// `(pos; p:letter, ...)` using alphabet letters.
    pub fn anchor_label(&self, a: usize) -> String {
        let anchor = &self.anchors[a];
        let diffs: Vec<String> = anchor
            .diffs
            .iter()
            .map(|d| format!("{}:{}", d.pos, self.alphabet.letter(d.letter)))
            .collect();
        format!("({};{})", anchor.pos, diffs.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::example;

    fn example_config(path: BuildPath) -> BuildConfig {
        BuildConfig {
            z: 4.0,
            ell: 3,
            k: Some(2),
            order: Order::Lexicographic,
            path,
            retain_x: true,
        }
    }

    #[test]
    fn example_anchors() {
        let x = example();
        let (idx, stats) = Index::build(&x, &example_config(BuildPath::SpaceEfficient)).unwrap();
        let labels: Vec<String> = (0..idx.anchors().len()).map(|a| idx.anchor_label(a)).collect();
        assert_eq!(
            labels,
            vec!["(1;)", "(1;2:B)", "(2;)", "(3;)", "(3;2:B)", "(3;5:B)", "(4;)", "(4;5:B)"]
        );
        assert_eq!(stats.anchors, 8);
        assert!(stats.dfs.unwrap().peak_live_path <= x.len() + 1);
        assert!(!idx.fallback());
    }

    #[test]
    fn paths_agree_on_example() {
        let x = example();
        let (a, _) = Index::build(&x, &example_config(BuildPath::SpaceEfficient)).unwrap();
        let (b, _) = Index::build(&x, &example_config(BuildPath::Naive)).unwrap();
        assert_eq!(a.anchors(), b.anchors());
        assert_eq!(a.forward(), b.forward());
        assert_eq!(a.backward(), b.backward());
    }

    #[test]
    fn fallback_flag() {
        let x = example();
        let mut c = example_config(BuildPath::SpaceEfficient);
        c.z = 16.0;
        c.ell = 3;
        c.k = Some(1);
        let (idx, _) = Index::build(&x, &c).unwrap();
        assert!(idx.fallback());
    }

    #[test]
    fn path_parsing() {
        assert_eq!("naive".parse::<BuildPath>().unwrap(), BuildPath::Naive);
        assert_eq!("se".parse::<BuildPath>().unwrap(), BuildPath::SpaceEfficient);
        assert!("fast".parse::<BuildPath>().is_err());
    }
}
