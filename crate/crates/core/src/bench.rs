//! Benchmark harness: a TOML spec of datasets and parameter sweeps, run
//! cell by cell into CSV rows.
//!
//! ```toml
//! timing = true            # false blanks every wall-clock column
//!
//! [[dataset]]
//! name = "uni"
//! kind = "uniform"         # snp-like | rssi-like | uniform
//! n = 10000
//! sigma = 4
//! delta = 100.0            # percent of uncertain rows
//! seed = 7
//!
//! [[sweep]]
//! datasets = ["uni"]       # default: all
//! z = [16.0]
//! ell = [16, 32, 64, 128]
//! k = "auto"               # or an integer
//! order = "fingerprint"    # or "lex"
//! seed = 1                 # minimizer order and pattern sampling
//! paths = ["naive", "se"]
//! mode = "grid"
//! patterns = 200
//! retain_x = true
//! ```
//!
//! Patterns alternate between solid factors of X and uniform strings, with
//! lengths uniform in `[ell, min(n, 4 ell)]`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{self, Kind};
use crate::index::{BuildConfig, BuildPath, Index};
use crate::minimizers::Order;
use crate::model::WeightedString;
use crate::par::{map_ordered, Execution};
use crate::query::{query, Mode};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
    #[serde(rename = "sweep")]
    pub sweeps: Vec<SweepSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub kind: String,
    pub n: usize,
    pub sigma: usize,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum KSetting {
    Fixed(usize),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub datasets: Option<Vec<String>>,
    pub z: Vec<f64>,
    pub ell: Vec<usize>,
    #[serde(default)]
    pub k: Option<KSetting>,
    #[serde(default = "fingerprint")]
    pub order: String,
    pub seed: u64,
    #[serde(default = "se_only")]
    pub paths: Vec<String>,
    #[serde(default = "grid")]
    pub mode: String,
    #[serde(default = "two_hundred")]
    pub patterns: usize,
    #[serde(default = "yes")]
    pub retain_x: bool,
}

fn yes() -> bool {
    true
}
fn fingerprint() -> String {
    "fingerprint".into()
}
fn se_only() -> Vec<String> {
    vec!["se".into()]
}
fn grid() -> String {
    "grid".into()
}
fn two_hundred() -> usize {
    200
}

/// One CSV row. Empty cells mean "not applicable" or, with a non-`ok`
/// status, "not measured".
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub sigma: usize,
    pub z: f64,
    pub ell: usize,
    pub k: usize,
    pub path: String,
    pub mode: String,
    pub status: String,
    pub fallback: Option<bool>,
    pub index_bytes: Option<usize>,
    pub anchors: Option<usize>,
    pub nodes: Option<usize>,
    pub peak_live_path: Option<usize>,
    pub family_letters: Option<usize>,
    pub build_ms: Option<f64>,
    pub query_mean_us: Option<f64>,
    pub query_median_us: Option<f64>,
    pub patterns: Option<usize>,
    pub candidates_per_query: Option<f64>,
    pub occurrences_per_query: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Internal(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }
}

impl BenchSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        for d in &self.datasets {
            d.kind.parse::<Kind>()?;
            if self.datasets.iter().filter(|e| e.name == d.name).count() > 1 {
                return bad(format!("dataset {:?} defined twice", d.name));
            }
        }
        for s in &self.sweeps {
            for name in s.datasets.iter().flatten() {
                if !self.datasets.iter().any(|d| &d.name == name) {
                    return bad(format!("sweep refers to unknown dataset {name:?}"));
                }
            }
            for p in &s.paths {
                p.parse::<BuildPath>()?;
            }
            s.mode.parse::<Mode>()?;
            s.order_for()?;
            if let Some(KSetting::Word(w)) = &s.k {
                if w != "auto" {
                    return bad(format!("k must be an integer or \"auto\", got {w:?}"));
                }
            }
        }
        Ok(())
    }
}

impl SweepSpec {
    fn order_for(&self) -> Result<Order> {
        match self.order.as_str() {
            "fingerprint" => Ok(Order::Fingerprint { seed: self.seed }),
            "lex" | "lexicographic" => Ok(Order::Lexicographic),
            o => Err(Error::InvalidParameter(format!("unknown order {o:?}"))),
        }
    }

    fn k(&self) -> Option<usize> {
        match self.k {
            Some(KSetting::Fixed(k)) => Some(k),
            _ => None,
        }
    }
}

struct Cell<'a> {
    data: &'a DatasetSpec,
    x: &'a Result<WeightedString>,
    sweep: &'a SweepSpec,
    z: f64,
    ell: usize,
    path: &'a str,
}

fn round3(v: f64) -> f64 {
    (v * 1e3).round() / 1e3
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        (v[h - 1] + v[h]) / 2.0
    }
}

fn run_cell(cell: &Cell, timing: bool) -> BenchRow {
    let mut row = BenchRow {
        dataset: cell.data.name.clone(),
        n: cell.data.n,
        sigma: cell.data.sigma,
        z: cell.z,
        ell: cell.ell,
        path: cell.path.to_string(),
        mode: cell.sweep.mode.clone(),
        ..BenchRow::default()
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| measure(cell, timing, &mut row)));
    row.status = match outcome {
        Ok(Ok(())) => "ok".into(),
        Ok(Err(e)) => format!("error: {e}"),
        Err(_) => "error: panic".into(),
    };
    row
}

fn measure(cell: &Cell, timing: bool, row: &mut BenchRow) -> Result<()> {
    let x = cell.x.as_ref().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let sweep = cell.sweep;
    let config = BuildConfig {
        z: cell.z,
        ell: cell.ell,
        k: sweep.k(),
        order: sweep.order_for()?,
        path: cell.path.parse()?,
        retain_x: sweep.retain_x,
    };
    row.k = config.scheme(x.sigma())?.k();
    let (index, stats) = Index::build(x, &config)?;
    row.fallback = Some(index.fallback());
    row.index_bytes = Some(index.size_bytes());
    row.anchors = Some(stats.anchors);
    row.nodes = Some(stats.forward_nodes + stats.backward_nodes);
    row.peak_live_path = stats.dfs.map(|d| d.peak_live_path);
    row.family_letters = stats.family_letters;

    let mode: Mode = sweep.mode.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed ^ cell.data.seed.rotate_left(17));
    let hi = x.len().min(4 * cell.ell);
    let pats = if cell.ell <= hi {
        gen::pattern_mix(&mut rng, x, index.threshold(), cell.ell..=hi, sweep.patterns)
    } else {
        Vec::new()
    };
    let mut times = Vec::with_capacity(pats.len());
    let (mut cand, mut occ) = (0usize, 0usize);
    for p in &pats {
        let t0 = Instant::now();
        let r = query(&index, p, mode)?;
        times.push(t0.elapsed().as_secs_f64() * 1e6);
        cand += r.stats.candidates;
        occ += r.positions.len();
    }
    row.patterns = Some(pats.len());
    if !pats.is_empty() {
        let q = pats.len() as f64;
        row.candidates_per_query = Some(round3(cand as f64 / q));
        row.occurrences_per_query = Some(round3(occ as f64 / q));
        if timing {
            row.query_mean_us = Some(round3(times.iter().sum::<f64>() / q));
            row.query_median_us = Some(round3(median(&mut times)));
        }
    }
    if timing {
        row.build_ms = Some(round3(stats.seconds * 1e3));
    }
    Ok(())
}

/// Runs every cell. Cells are independent; rows come back in spec order
/// (sweep, dataset, z, ell, path) whatever the execution.
pub fn run(spec: &BenchSpec, exec: Execution) -> BenchReport {
    let inputs: Vec<Result<WeightedString>> = map_ordered(&spec.datasets, exec, |d| {
        let kind: Kind = d.kind.parse()?;
        gen::generate(kind, d.n, d.sigma, d.delta, d.seed)
    });
    let mut cells = Vec::new();
    for sweep in &spec.sweeps {
        for (data, x) in spec.datasets.iter().zip(&inputs) {
            if let Some(names) = &sweep.datasets {
                if !names.contains(&data.name) {
                    continue;
                }
            }
            for &z in &sweep.z {
                for &ell in &sweep.ell {
                    for path in &sweep.paths {
                        cells.push(Cell {
                            data,
                            x,
                            sweep,
                            z,
                            ell,
                            path,
                        });
                    }
                }
            }
        }
    }
    // Cells hold references only, so they can be shared across threads.
    let rows = map_ordered(&cells, exec, |c| run_cell(c, spec.timing));
    BenchReport { rows }
}
