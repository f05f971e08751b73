//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line whatever the capture mode;
//! the process fails if any criterion does.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use minwst::estimation::occ_with_property;
use minwst::gen::{generate, random_dense, random_mixed, random_text, solid_factor, Kind};
use minwst::grid::Grid;
use minwst::par::map_ordered;
use minwst::trees::Direction;
use minwst::{
    build_estimation, query, query_text, BuildConfig, BuildPath, EstimationFamily, Execution, HeavyContext, Index,
    MinimizerScheme, Mode, Order, PropertyArray, Threshold, WeightedString,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNNING_EXAMPLE: &str = "6 2\nA B\n1 0\n0.5 0.5\n0.75 0.25\n0.8 0.2\n0.5 0.5\n0.25 0.75\n";
const MODES: [Mode; 3] = [Mode::Grid, Mode::Verify, Mode::Array];

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn example() -> WeightedString {
    WeightedString::parse_str(RUNNING_EXAMPLE).unwrap()
}

fn example_index(retain_x: bool) -> Index {
    let config = BuildConfig {
        z: 4.0,
        ell: 3,
        k: Some(2),
        order: Order::Lexicographic,
        path: BuildPath::SpaceEfficient,
        retain_x,
    };
    Index::build(&example(), &config).unwrap().0
}

fn config(z: f64, ell: usize, path: BuildPath, seed: u64, retain_x: bool) -> BuildConfig {
    BuildConfig {
        z,
        ell,
        k: None,
        order: Order::Fingerprint { seed },
        path,
        retain_x,
    }
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, sigma: usize) -> WeightedString {
    if rng.gen_bool(0.5) {
        random_dense(rng, n, sigma)
    } else {
        let d = rng.gen_range(0.1..0.7);
        random_mixed(rng, n, sigma, d)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn worked_examples() -> Outcome {
    let x = example();
    let enc = |s: &str| x.alphabet().encode(s).unwrap();
    let p = x.occurrence_probability(&enc("ABA"), 3).unwrap().exp();
    ensure!(close(p, 3.0 / 40.0), "P(ABA at 3) = {p}");

    let t = Threshold::new(4.0).unwrap();
    for (s, want) in [("AAAA", true), ("AABB", false), ("ABAB", false)] {
        ensure!(x.is_valid(&enc(s), 1, t).unwrap() == want, "validity of {s}");
    }

    let family = build_estimation(&x, t).unwrap();
    let c = family.count(&enc("AB"), 1).unwrap();
    ensure!(c == 2, "Count(AB, 1) = {c}");

    let pi3 = PropertyArray::new(vec![4, 4, 5, 6, 6, 6]).unwrap();
    let occ = occ_with_property(&enc("ABAABB"), &pi3, &enc("AB"));
    ensure!(occ == vec![1, 4], "Occ(AB, S3) = {occ:?}");

    let scheme = MinimizerScheme::new(4, 2, Order::Lexicographic, 2).unwrap();
    let m = scheme.minimizer_set_plain(&enc("ABAABB"));
    ensure!(m == vec![3], "minimizers of ABAABB = {m:?}");
    Ok("probability, validity, count, occurrences and minimizers exact".into())
}

fn query_examples() -> Outcome {
    for retain in [true, false] {
        let idx = example_index(retain);
        for mode in MODES {
            for (p, want) in [("AAAA", vec![1]), ("BAAB", vec![]), ("BABA", vec![])] {
                let got = query_text(&idx, p, mode).unwrap().positions;
                ensure!(got == want, "{p} in {mode:?} (retain X {retain}): {got:?}");
            }
        }
    }
    let idx = example_index(true);
    let r = query_text(&idx, "BAAB", Mode::Verify).unwrap();
    ensure!(r.stats.candidates == 2, "BAAB examined {} candidates", r.stats.candidates);
    let mut probs: Vec<f64> = r.candidates.iter().map(|c| c.verdict.log_prob.unwrap().exp()).collect();
    probs.sort_by(f64::total_cmp);
    ensure!(
        close(probs[0], 3.0 / 40.0) && close(probs[1], 3.0 / 20.0),
        "candidate probabilities {probs:?}"
    );
    Ok("AAAA -> {1}, BAAB and BABA -> {} in all modes; BAAB verify scores 3/20 and 3/40".into())
}

fn oracle_sweep() -> Outcome {
    const INSTANCES: usize = 500;
    const PATTERNS: usize = 20;
    let seeds: Vec<u64> = (0..INSTANCES as u64).collect();
    let results = map_ordered(&seeds, Execution::Parallel, |&seed| -> Result<(usize, usize), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003 ^ seed);
        let ell = *[4usize, 8, 16].choose(&mut rng).unwrap();
        let n = rng.gen_range(8.max(ell)..=200);
        let sigma = if rng.gen_bool(0.5) { 2 } else { 4 };
        let x = random_instance(&mut rng, n, sigma);
        let z = rng.gen_range(2.0..=16.0);
        let retain = seed % 2 == 0;
        let (idx, _) = Index::build(&x, &config(z, ell, BuildPath::SpaceEfficient, rng.gen(), retain))
            .map_err(|e| e.to_string())?;
        let t = idx.threshold();
        let mut nonempty = 0;
        for j in 0..PATTERNS {
            let m = rng.gen_range(ell..=n.min(4 * ell));
            let p = if j % 2 == 0 {
                (0..8).find_map(|_| solid_factor(&mut rng, &x, t, m)).unwrap_or_else(|| random_text(&mut rng, m, sigma))
            } else {
                random_text(&mut rng, m, sigma)
            };
            let want = x.brute_force_occurrences(&p, t);
            nonempty += usize::from(!want.is_empty());
            for mode in MODES {
                let got = query(&idx, &p, mode).map_err(|e| e.to_string())?.positions;
                if got != want {
                    return Err(format!("seed {seed}, {mode:?}: got {got:?}, want {want:?}"));
                }
            }
        }
        Ok((PATTERNS, nonempty))
    });
    let mut trials = 0;
    let mut hits = 0;
    for r in results {
        let (t, h) = r?;
        trials += t;
        hits += h;
    }
    Ok(format!("{trials} trials x 3 modes equal brute force ({hits} with occurrences)"))
}

fn for_each_pattern(sigma: usize, max_len: usize, f: &mut impl FnMut(&[u8]) -> Result<(), String>) -> Result<(), String> {
    let mut p = Vec::with_capacity(max_len);
    fn rec(
        p: &mut Vec<u8>,
        sigma: usize,
        max_len: usize,
        f: &mut impl FnMut(&[u8]) -> Result<(), String>,
    ) -> Result<(), String> {
        if !p.is_empty() {
            f(p)?;
        }
        if p.len() == max_len {
            return Ok(());
        }
        for c in 0..sigma as u8 {
            p.push(c);
            rec(p, sigma, max_len, f)?;
            p.pop();
        }
        Ok(())
    }
    rec(&mut p, sigma, max_len, f)
}

fn estimation_contract() -> Outcome {
    let seeds: Vec<u64> = (0..200).collect();
    let checked = map_ordered(&seeds, Execution::Parallel, |&seed| -> Result<usize, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004 ^ seed);
        let n = rng.gen_range(1..=25);
        let sigma = rng.gen_range(1..=4);
        let x = random_instance(&mut rng, n, sigma);
        let t = Threshold::new(rng.gen_range(1.0..=8.0)).unwrap();
        let family: EstimationFamily = build_estimation(&x, t).map_err(|e| e.to_string())?;
        let mut checks = 0;
        for_each_pattern(sigma, 6, &mut |p| {
            if p.len() > n {
                return Ok(());
            }
            for i in 1..=n + 1 - p.len() {
                let lp = x.occurrence_probability(p, i).unwrap();
                let want = t.weight(lp);
                let got = family.count(p, i).map_err(|e| e.to_string())?;
                if got != want {
                    return Err(format!("seed {seed}: Count({p:?}, {i}) = {got}, want {want}"));
                }
                checks += 1;
            }
            Ok(())
        })?;
        Ok(checks)
    });
    let mut total = 0;
    for c in checked {
        total += c?;
    }
    Ok(format!("200 instances, {total} (pattern, position) pairs exact"))
}

fn leaf_labels(idx: &Index, dir: Direction) -> Vec<String> {
    let tree = match dir {
        Direction::Forward => idx.forward(),
        Direction::Backward => idx.backward(),
    };
    let mut v: Vec<String> = tree.leaf_anchor.iter().map(|&a| idx.anchor_label(a as usize)).collect();
    v.sort();
    v
}

fn path_equivalence(peaks: &mut Vec<(usize, usize)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    for case in 0..120 {
        let n = rng.gen_range(1..=60);
        let sigma = rng.gen_range(2..=4);
        let x = random_instance(&mut rng, n, sigma);
        let z = rng.gen_range(1.0..=8.0);
        let ell = rng.gen_range(1..=8.min(n));
        let seed = rng.gen();
        let retain = rng.gen_bool(0.5);
        let (a, _) = Index::build(&x, &config(z, ell, BuildPath::Naive, seed, retain)).map_err(|e| e.to_string())?;
        let (b, sb) =
            Index::build(&x, &config(z, ell, BuildPath::SpaceEfficient, seed, retain)).map_err(|e| e.to_string())?;
        peaks.push((sb.dfs.unwrap().peak_live_path, n));
        for dir in [Direction::Forward, Direction::Backward] {
            ensure!(a.dump_tree(dir) == b.dump_tree(dir), "case {case}: {dir:?} trees differ");
            ensure!(leaf_labels(&a, dir) == leaf_labels(&b, dir), "case {case}: leaf labels differ");
        }
        ensure!(a.to_bytes() == b.to_bytes(), "case {case}: serializations differ");
    }
    Ok("120 instances: same trees, leaf labels and bytes".into())
}

fn peak_property(peaks: &mut Vec<(usize, usize)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    for _ in 0..200 {
        let n = rng.gen_range(1..=400);
        let sigma = rng.gen_range(2..=4);
        let x = random_instance(&mut rng, n, sigma);
        let z = rng.gen_range(1.0..=32.0);
        let ell = rng.gen_range(1..=16.min(n));
        let (_, s) = Index::build(&x, &config(z, ell, BuildPath::SpaceEfficient, rng.gen(), false))
            .map_err(|e| e.to_string())?;
        peaks.push((s.dfs.unwrap().peak_live_path, n));
    }
    let x = generate(Kind::SnpLike, 20_000, 4, 10.0, 6).unwrap();
    let (_, s) = Index::build(&x, &config(16.0, 32, BuildPath::SpaceEfficient, 1, false)).map_err(|e| e.to_string())?;
    peaks.push((s.dfs.unwrap().peak_live_path, 20_000));
    let worst = peaks.iter().map(|&(p, n)| p as i64 - (n as i64 + 1)).max().unwrap();
    for &(p, n) in peaks.iter() {
        ensure!(p <= n + 1, "peak {p} > n + 1 = {}", n + 1);
    }
    Ok(format!("{} builds, max(peak - (n+1)) = {worst}", peaks.len()))
}

fn heavy_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let mut factors = 0usize;
    for case in 0..150 {
        let n = rng.gen_range(1..=20);
        let sigma = rng.gen_range(2..=4);
        let x = random_instance(&mut rng, n, sigma);
        let t = Threshold::new(rng.gen_range(1.0..=16.0)).unwrap();
        let h = HeavyContext::build(&x);
        let bound = t.max_mismatches();
        // Depth-first over every solid factor at every start.
        for i in 1..=n {
            let mut stack = vec![(i, 0.0f64, 0usize)];
            while let Some((next, lp, mm)) = stack.pop() {
                if next > n {
                    continue;
                }
                for c in 0..sigma as u8 {
                    let lp2 = lp + x.log_prob(next, c);
                    if !t.accepts(lp2) {
                        continue;
                    }
                    let mm2 = mm + usize::from(c != h.at(next));
                    factors += 1;
                    ensure!(mm2 <= bound, "case {case}: factor at {i} has {mm2} > {bound} mismatches");
                    stack.push((next + 1, lp2, mm2));
                }
            }
        }
    }
    // Stored mismatch lists at larger scales.
    let mut lists = 0usize;
    for (kind, n, z) in [(Kind::Uniform, 2000, 16.0), (Kind::SnpLike, 10_000, 64.0), (Kind::RssiLike, 3000, 8.0)] {
        let x = generate(kind, n, 4, 30.0, 9).unwrap();
        let (idx, _) = Index::build(&x, &config(z, 32, BuildPath::SpaceEfficient, 3, false)).map_err(|e| e.to_string())?;
        let bound = idx.threshold().max_mismatches();
        for a in idx.anchors() {
            ensure!(a.diffs.len() <= bound, "{kind}: anchor with {} mismatches", a.diffs.len());
            lists += 1;
        }
        for tree in [idx.forward(), idx.backward()] {
            for v in &tree.nodes {
                ensure!(v.edge.diffs.len() <= bound, "{kind}: edge with {} mismatches", v.edge.diffs.len());
                lists += 1;
            }
        }
    }
    Ok(format!("{factors} solid factors at n <= 20 and {lists} stored lists within bound"))
}

fn grid_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008);
    for g in 0..60 {
        let len = match g % 3 {
            0 => rng.gen_range(0..64),
            1 => rng.gen_range(64..1024),
            _ => rng.gen_range(1024..6000),
        };
        let mut ys: Vec<u32> = (0..len as u32).collect();
        ys.shuffle(&mut rng);
        let anchors: Vec<u32> = (0..len as u32).map(|i| i * 7 + 1).collect();
        let grid = Grid::from_ys(ys, anchors).map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            let mut r = || {
                let a = rng.gen_range(0..=len);
                let b = rng.gen_range(0..=len);
                a.min(b)..a.max(b)
            };
            let (xs, ys) = (r(), r());
            let got = grid.range_report(xs.clone(), ys.clone());
            let want = grid.scan(xs.clone(), ys.clone());
            ensure!(got == want, "grid {g} of {len}: rectangle {xs:?} x {ys:?}");
        }
    }
    Ok("60 grids x 1000 rectangles equal the scan".into())
}

fn minimizer_density() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0009);
    let n = 100_000;
    let ell = 64;
    let text = random_text(&mut rng, n, 4);
    let scheme = MinimizerScheme::new(ell, 5, Order::Fingerprint { seed: 0xACCE }, 4).unwrap();
    let d = scheme.minimizer_set_plain(&text).len() as f64 / n as f64;
    let (lo, hi) = (1.0 / ell as f64, 4.0 / ell as f64);
    ensure!(d >= lo && d <= hi, "density {d:.5} outside [{lo:.5}, {hi:.5}]");
    Ok(format!("density {d:.5} in [{lo:.5}, {hi:.5}] (2/(w+1) = {:.5})", 2.0 / (ell - 5 + 2) as f64))
}

fn size_trends() -> Outcome {
    let x = generate(Kind::SnpLike, 10_000, 4, 10.0, 0xACCE_0010).unwrap();
    let bytes = |z: f64, ell: usize| -> Result<usize, String> {
        let (idx, _) = Index::build(&x, &config(z, ell, BuildPath::SpaceEfficient, 77, false)).map_err(|e| e.to_string())?;
        Ok(idx.size_bytes())
    };
    let by_ell: Vec<usize> = [16, 32, 64, 128].iter().map(|&l| bytes(16.0, l)).collect::<Result<_, _>>()?;
    let by_z: Vec<usize> = [2.0, 4.0, 8.0, 16.0].iter().map(|&z| bytes(z, 64)).collect::<Result<_, _>>()?;
    ensure!(by_ell.windows(2).all(|w| w[1] <= w[0]), "bytes over ell {by_ell:?} not non-increasing");
    ensure!(by_z.windows(2).all(|w| w[1] >= w[0]), "bytes over z {by_z:?} not non-decreasing");
    ensure!(by_z[3] > by_z[0], "z has no effect: {by_z:?}");
    Ok(format!("ell 16..128: {by_ell:?}; z 2..16: {by_z:?}"))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("minwst-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0011);
    let mut answers = 0;
    for case in 0..40 {
        let n = rng.gen_range(20..=300);
        let sigma = rng.gen_range(2..=4);
        let x = random_instance(&mut rng, n, sigma);
        let ell = rng.gen_range(3..=12);
        let path = if case % 2 == 0 { BuildPath::Naive } else { BuildPath::SpaceEfficient };
        let cfg = config(rng.gen_range(1.0..12.0), ell, path, rng.gen(), case % 3 != 0);
        let (a, _) = Index::build(&x, &cfg).map_err(|e| e.to_string())?;
        let (b, _) = Index::build(&x, &cfg).map_err(|e| e.to_string())?;
        ensure!(a.to_bytes() == b.to_bytes(), "case {case}: rebuild differs");
        let file = dir.join(format!("{case}.idx"));
        a.save(&file).map_err(|e| e.to_string())?;
        let back = Index::load(&file).map_err(|e| e.to_string())?;
        ensure!(std::fs::read(&file).unwrap() == b.to_bytes(), "case {case}: file differs");
        for _ in 0..30 {
            let m = rng.gen_range(ell..=n.min(3 * ell).max(ell));
            let p = solid_factor(&mut rng, &x, a.threshold(), m).unwrap_or_else(|| random_text(&mut rng, m, sigma));
            for mode in MODES {
                let r1 = query(&a, &p, mode).map_err(|e| e.to_string())?;
                let r2 = query(&back, &p, mode).map_err(|e| e.to_string())?;
                ensure!(r1 == r2, "case {case}: answers differ after reload");
                answers += 1;
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("40 configs rebuilt byte-identically; {answers} answers preserved by save/load"))
}

fn main() {
    let mut peaks = Vec::new();
    let mut table: BTreeMap<usize, (&str, Outcome, f64)> = BTreeMap::new();
    let mut run = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} {tag} {name} ({secs:.1}s): {detail}");
        table.insert(id, (name, out, secs));
    };
    run(1, "worked examples", &mut worked_examples);
    run(2, "query examples", &mut query_examples);
    run(3, "oracle equivalence sweep", &mut oracle_sweep);
    run(4, "z-estimation contract", &mut estimation_contract);
    run(5, "construction path equivalence", &mut || path_equivalence(&mut peaks));
    run(6, "space-efficient peak path", &mut || peak_property(&mut peaks));
    run(7, "heavy-string mismatch bound", &mut heavy_bound);
    run(8, "grid exactness", &mut grid_exactness);
    run(9, "minimizer density", &mut minimizer_density);
    run(10, "index size trends", &mut size_trends);
    run(11, "determinism and round trip", &mut determinism);

    let failed: Vec<usize> = table.iter().filter(|(_, v)| v.1.is_err()).map(|(&k, _)| k).collect();
    println!("acceptance: {} passed, {} failed", table.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
