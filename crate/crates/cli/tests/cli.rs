use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use minwst::gen::{generate, pattern_mix, Kind};
use minwst::Threshold;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const RUNNING_EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/running_example.wstr");

fn minwst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minwst"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn example_index(dir: &TempDir) -> PathBuf {
    let idx = dir.path().join("ex.idx");
    let o = minwst(&["build", "--z", "4", "--ell", "3", "--k", "2", "--order", "lex", "-o", s(&idx), RUNNING_EXAMPLE]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    idx
}

#[test]
fn running_example_counts() {
    let dir = TempDir::new().unwrap();
    let idx = example_index(&dir);
    let pats = dir.path().join("p.txt");
    fs::write(&pats, "AAAA\nBAAB\nBABA\n").unwrap();
    for mode in ["grid", "verify", "array"] {
        let o = minwst(&["query", "--mode", mode, s(&idx), s(&pats)]);
        assert_eq!(o.status.code(), Some(0));
        let counts: Vec<String> = stdout(&o).lines().map(|l| l.split('\t').nth(2).unwrap().to_string()).collect();
        assert_eq!(counts, ["1", "0", "0"], "{mode}");
    }
}

#[test]
fn tree_dump_lists_anchors() {
    let dir = TempDir::new().unwrap();
    let idx = dir.path().join("ex.idx");
    let o = minwst(&["build", "--z", "4", "--ell", "3", "--k", "2", "--order", "lex", "--dump", "-o", s(&idx), RUNNING_EXAMPLE]);
    let out = stdout(&o);
    for label in ["(1;)", "(1;2:B)", "(2;)", "(3;)", "(3;2:B)", "(3;5:B)", "(4;)", "(4;5:B)"] {
        assert_eq!(out.matches(label).count(), 2, "{label}");
    }
}

#[test]
fn empty_pattern_file_gives_empty_output() {
    let dir = TempDir::new().unwrap();
    let idx = example_index(&dir);
    let pats = dir.path().join("p.txt");
    fs::write(&pats, "").unwrap();
    let o = minwst(&["query", s(&idx), s(&pats)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn short_pattern_gets_error_line() {
    let dir = TempDir::new().unwrap();
    let idx = example_index(&dir);
    let pats = dir.path().join("p.txt");
    fs::write(&pats, "AA\nAAAA\n").unwrap();
    let o = minwst(&["query", s(&idx), s(&pats)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].contains("error: pattern of length 2"));
    assert_eq!(lines[1], "2\tAAAA\t1\t1");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let idx = example_index(&dir);
    assert_eq!(minwst(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(minwst(&["build", "--z", "4"]).status.code(), Some(1));

    let bad = dir.path().join("bad.wstr");
    fs::write(&bad, "2 2\nA B\n0.5 0.6\n1 0\n").unwrap();
    let o = minwst(&["build", "--z", "4", "--ell", "3", "-o", s(&dir.path().join("x")), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));

    let pats = dir.path().join("p.txt");
    fs::write(&pats, "AAAA\n").unwrap();
    let o = minwst(&["query", "--ell", "5", s(&idx), s(&pats)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scheme mismatch"));

    let garbage = dir.path().join("g.idx");
    fs::write(&garbage, b"not an index").unwrap();
    assert_eq!(minwst(&["query", s(&garbage), s(&pats)]).status.code(), Some(2));

    let fb = dir.path().join("fb.idx");
    let o = minwst(&["build", "--z", "64", "--ell", "3", "--k", "2", "-o", s(&fb), RUNNING_EXAMPLE]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(minwst(&["query", s(&fb), s(&pats)]).status.code(), Some(0));
}

#[test]
fn paths_give_identical_files_and_modes_agree() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("x.wstr");
    let o = minwst(&["gen", "--kind", "snp-like", "--n", "10000", "--sigma", "4", "--delta", "8", "--seed", "11", "-o", s(&input)]);
    assert_eq!(o.status.code(), Some(0));
    let mut files = Vec::new();
    for path in ["naive", "se", "se"] {
        let out = dir.path().join(format!("{path}-{}.idx", files.len()));
        let o = minwst(&["build", "--z", "8", "--ell", "16", "--seed", "5", "--path", path, "-o", s(&out), s(&input)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);

    let x = generate(Kind::SnpLike, 10000, 4, 8.0, 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pats = pattern_mix(&mut rng, &x, Threshold::new(8.0).unwrap(), 16..=64, 1000);
    let text: String = pats.iter().map(|p| x.alphabet().decode(p) + "\n").collect();
    let pfile = dir.path().join("p.txt");
    fs::write(&pfile, text).unwrap();
    let idx = dir.path().join("se-1.idx");
    let outs: Vec<String> = ["grid", "verify", "array"]
        .iter()
        .map(|m| stdout(&minwst(&["query", "--mode", m, s(&idx), s(&pfile)])))
        .collect();
    assert_eq!(outs[0].lines().count(), 1000);
    assert!(outs[0].lines().any(|l| !l.ends_with("\t0\t")));
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[1], outs[2]);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.wstr");
    let b = dir.path().join("b.wstr");
    for f in [&a, &b] {
        minwst(&["gen", "--kind", "rssi-like", "--n", "300", "--sigma", "8", "--delta", "40", "--seed", "2", "-o", s(f)]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(minwst(&["gen", "--kind", "uniform", "--n", "5", "--sigma", "2", "--delta", "120", "--seed", "1", "-o", s(&a)]).status.code(), Some(2));
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("b.toml");
    fs::write(
        &spec,
        "timing = false\n[[dataset]]\nname = \"d\"\nkind = \"uniform\"\nn = 300\nsigma = 4\ndelta = 20.0\nseed = 1\n\
         [[sweep]]\nz = [4.0]\nell = [8, 16]\nseed = 2\npatterns = 10\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(minwst(&["bench", s(&spec), "-o", s(&a)]).status.code(), Some(0));
    assert_eq!(minwst(&["bench", "--sequential", s(&spec), "-o", s(&b)]).status.code(), Some(0));
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
}
