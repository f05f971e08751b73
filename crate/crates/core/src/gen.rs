//! Synthetic weighted strings.
//!
//! `delta` is the percentage of uncertain positions (rows with more than one
//! non-zero entry); every other row is a single certain letter. Uncertain
//! rows are quantised to multiples of 1/1000 so generated files stay short.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Threshold, WeightedString};

const UNITS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Two alleles: a dominant letter and one alternative.
    SnpLike,
    /// Mass spread over neighbouring letters, as when binning a noisy
    /// signal strength reading.
    RssiLike,
    /// A random distribution over the whole alphabet.
    Uniform,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snp-like" => Ok(Kind::SnpLike),
            "rssi-like" => Ok(Kind::RssiLike),
            "uniform" => Ok(Kind::Uniform),
            _ => Err(Error::InvalidParameter(format!("unknown generator kind {s:?}"))),
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::SnpLike => "snp-like",
            Kind::RssiLike => "rssi-like",
            Kind::Uniform => "uniform",
        })
    }
}

/// `ACGT` for four letters, `A`, `B`, ... otherwise.
pub fn default_alphabet(sigma: usize) -> Result<Alphabet> {
    if sigma == 4 {
        return Alphabet::new(&["A", "C", "G", "T"]);
    }
    let letters: Vec<String> = (0..sigma)
        .map(|i| match i {
            0..=25 => ((b'A' + i as u8) as char).to_string(),
            _ => format!("L{i}"),
        })
        .collect();
    Alphabet::new(&letters)
}

pub fn generate(kind: Kind, n: usize, sigma: usize, delta: f64, seed: u64) -> Result<WeightedString> {
    if !(0.0..=100.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside [0, 100]")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if sigma < 2 && delta > 0.0 {
        return Err(Error::InvalidParameter(
            "uncertain positions need at least two letters".into(),
        ));
    }
    let alphabet = default_alphabet(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uncertain_count = ((delta / 100.0) * n as f64).round() as usize;
    let mut uncertain = vec![false; n];
    for i in sample(&mut rng, n, uncertain_count.min(n)) {
        uncertain[i] = true;
    }

    let mut rows = Vec::with_capacity(n);
    for &u in &uncertain {
        let mut units = vec![0u32; sigma];
        let major = rng.gen_range(0..sigma);
        if !u {
            units[major] = UNITS;
        } else {
            match kind {
                Kind::SnpLike => {
                    let mut alt = rng.gen_range(0..sigma - 1);
                    if alt >= major {
                        alt += 1;
                    }
                    let minor = rng.gen_range(10..=500);
                    units[alt] = minor;
                    units[major] = UNITS - minor;
                }
                Kind::RssiLike => {
                    let width = rng.gen_range(1..=2.min(sigma - 1)) as i64;
                    let spread: f64 = rng.gen_range(0.5..1.5);
                    let w: Vec<f64> = (-width..=width)
                        .map(|d| (-(d * d) as f64 / (2.0 * spread * spread)).exp())
                        .collect();
                    let cells: Vec<usize> = (-width..=width)
                        .map(|d| (major as i64 + d).clamp(0, sigma as i64 - 1) as usize)
                        .collect();
                    spread_units(&mut units, &cells, &w);
                }
                Kind::Uniform => {
                    let w: Vec<f64> = (0..sigma).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let cells: Vec<usize> = (0..sigma).collect();
                    spread_units(&mut units, &cells, &w);
                }
            }
            // Quantisation may leave a single non-zero cell; force two.
            if units.iter().filter(|&&v| v > 0).count() < 2 {
                let top = (0..sigma).max_by_key(|&c| units[c]).unwrap();
                let other = (top + 1) % sigma;
                units[top] -= 1;
                units[other] += 1;
            }
        }
        rows.push(units.iter().map(|&v| v as f64 / UNITS as f64).collect());
    }
    WeightedString::from_rows(alphabet, &rows)
}

fn spread_units(units: &mut [u32], cells: &[usize], w: &[f64]) {
    let total: f64 = w.iter().sum();
    let mut given = 0;
    for (&c, &v) in cells.iter().zip(w) {
        let u = ((v / total) * UNITS as f64).floor() as u32;
        units[c] += u;
        given += u;
    }
    units[cells[cells.len() / 2]] += UNITS - given;
}

/// Every row an independent random distribution, skewed so that long solid
/// factors exist. Used by randomized tests.
pub fn random_dense<R: Rng>(rng: &mut R, n: usize, sigma: usize) -> WeightedString {
    let alphabet = default_alphabet(sigma).expect("sigma in range");
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..sigma).map(|_| rng.gen_range(0.0..1.0)).collect();
            let boost = rng.gen_range(0..sigma);
            row[boost] += rng.gen_range(0.0..4.0);
            if rng.gen_bool(0.3) {
                let zero = rng.gen_range(0..sigma);
                if zero != boost {
                    row[zero] = 0.0;
                }
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect();
    WeightedString::from_rows(alphabet, &rows).expect("rows are distributions")
}

/// Like [`random_dense`] but only a `delta` fraction of rows is uncertain.
pub fn random_mixed<R: Rng>(rng: &mut R, n: usize, sigma: usize, delta: f64) -> WeightedString {
    let dense = random_dense(rng, n, sigma);
    let rows: Vec<Vec<f64>> = (1..=n)
        .map(|pos| {
            if rng.gen_bool(delta) {
                dense.row(pos).to_vec()
            } else {
                let mut r = vec![0.0; sigma];
                r[rng.gen_range(0..sigma)] = 1.0;
                r
            }
        })
        .collect();
    WeightedString::from_rows(dense.alphabet().clone(), &rows).expect("rows are distributions")
}

/// A uniformly random plain string of letter ranks.
pub fn random_text<R: Rng>(rng: &mut R, n: usize, sigma: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..sigma as u8)).collect()
}

/// A random z-solid factor of length `m`, letters drawn uniformly among
/// those that keep the prefix solid. `None` if the sampled start admits none.
pub fn solid_factor<R: Rng>(rng: &mut R, x: &WeightedString, t: Threshold, m: usize) -> Option<Vec<u8>> {
    let n = x.len();
    if m == 0 || m > n {
        return None;
    }
    let start = rng.gen_range(1..=n + 1 - m);
    let mut p = Vec::with_capacity(m);
    let mut lp = 0.0;
    for pos in start..start + m {
        let choices: Vec<u8> = (0..x.sigma() as u8)
            .filter(|&c| t.accepts(lp + x.log_prob(pos, c)))
            .collect();
        if choices.is_empty() {
            return None;
        }
        let c = choices[rng.gen_range(0..choices.len())];
        lp += x.log_prob(pos, c);
        p.push(c);
    }
    Some(p)
}

/// Query workload: alternately a solid factor (a few attempts, then a
/// uniform string) and a uniform string, lengths in `lens`.
pub fn pattern_mix<R: Rng>(
    rng: &mut R,
    x: &WeightedString,
    t: Threshold,
    lens: std::ops::RangeInclusive<usize>,
    count: usize,
) -> Vec<Vec<u8>> {
    (0..count)
        .map(|i| {
            let m = rng.gen_range(lens.clone());
            if i % 2 == 0 {
                for _ in 0..8 {
                    if let Some(p) = solid_factor(rng, x, t, m) {
                        return p;
                    }
                }
            }
            random_text(rng, m, x.sigma())
        })
        .collect()
}
