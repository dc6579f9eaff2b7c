use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use recsim::analysis::{analyze_forms, FormVariable, TrendThresholds};
use recsim::samples::{read_forms, FormBundle};

fn recsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recsim"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = recsim(args, cwd);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn small_graph(cwd: &Path) {
    ok(&["gen-graph", "--out", "g.txt", "--members", "300", "--seed", "3"], cwd);
}

fn names(dir: &Path) -> Vec<Vec<String>> {
    read_forms(dir).unwrap().iter().map(|f| f.rows.iter().map(|r| r.name.clone()).collect()).collect()
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    for out in ["a", "b"] {
        ok(&["simulate", "--graph", "g.txt", "--out", out, "--visits", "3", "--seed", "11"], cwd);
    }
    ok(&["simulate", "--graph", "g.txt", "--out", "c", "--visits", "3", "--seed", "12"], cwd);
    let (a, b) = (dir_contents(&cwd.join("a")), dir_contents(&cwd.join("b")));
    assert_eq!(a.len(), 3);
    assert_eq!(a, b);
    assert_ne!(names(&cwd.join("a")), names(&cwd.join("c")));
}

#[test]
fn gen_graph_is_byte_identical_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    ok(&["gen-graph", "--out", "a.txt", "--members", "100"], cwd);
    ok(&["gen-graph", "--out", "b.txt", "--members", "100"], cwd);
    ok(&["gen-graph", "--out", "c.txt", "--members", "100", "--seed", "1"], cwd);
    let read = |n: &str| fs::read_to_string(cwd.join(n)).unwrap();
    assert_eq!(read("a.txt"), read("b.txt"));
    assert_ne!(read("a.txt"), read("c.txt"));
    assert!(read("a.txt").contains("# seed=42\n"));
}

#[test]
fn parallel_seeds_match_sequential_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    let common = ["simulate", "--graph", "g.txt", "--visits", "2", "--profile", "linkedin-like"];
    ok(&[&common[..], &["--out", "par", "--parallel-seeds", "3", "--seed", "5"]].concat(), cwd);
    ok(&[&common[..], &["--out", "seq", "--seed", "6"]].concat(), cwd);
    let par = dir_contents(&cwd.join("par"));
    assert_eq!(par.len(), 6);
    for (name, bytes) in dir_contents(&cwd.join("seq")) {
        assert_eq!(par[&format!("seed-6/{name}")], bytes);
    }
}

#[test]
fn simulate_embeds_effective_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    ok(&["simulate", "--graph", "g.txt", "--out", "o", "--visits", "1", "--set", "churn_fraction=0.3"], cwd);
    let form = read_forms(&cwd.join("o")).unwrap().remove(0);
    assert!(form.metadata.contains(&"seed=42".to_string()));
    assert!(form.metadata.contains(&"set churn_fraction=0.3".to_string()));
    assert!(form.metadata.iter().any(|m| m.contains(" churn_fraction=0.3 ")));
}

#[test]
fn profiles_file_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    fs::write(cwd.join("p.conf"), "# recsim-profiles v1\n[tiny]\nbase = linkedin-like\nlist_capacity = 7\npool_size = 20\n").unwrap();
    ok(&["simulate", "--graph", "g.txt", "--out", "o", "--visits", "2", "--config", "p.conf", "--profile", "tiny"], cwd);
    let forms = read_forms(&cwd.join("o")).unwrap();
    assert_eq!(forms.len(), 2);
    assert!(forms.iter().all(|f| f.rows.len() == 7 && f.network_name == "tiny"));
}

#[test]
fn failures_name_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    let out = recsim(&["simulate", "--graph", "g.txt", "--out", "o", "--profile", "nope"], cwd);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("simulate: profile") && err.contains("unknown profile `nope`"), "{err}");
    assert!(!cwd.join("o").exists());

    fs::write(cwd.join("bad.tsv"), "garbage\n").unwrap();
    let out = recsim(&["ingest", "--input", "bad.tsv", "--out", "b.json"], cwd);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ingest: read forms") && err.contains("bad.tsv") && err.contains("line 1"), "{err}");
}

#[test]
fn ingest_fragment_gives_three_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let input = fixture("fragment.tsv");
    let before = fs::read(&input).unwrap();
    ok(&["ingest", "--input", input.to_str().unwrap(), "--out", "bundle.json"], cwd);
    assert_eq!(fs::read(&input).unwrap(), before);
    let bundle = FormBundle::from_json(&fs::read_to_string(cwd.join("bundle.json")).unwrap()).unwrap();
    assert_eq!(bundle.forms.len(), 1);
    let rows = &bundle.forms[0].rows;
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].name, "John Doe");
    assert_eq!(rows[0].shared_connections, Some(21));
    assert_eq!(rows[2].shared_connections, None);
    assert!(bundle.provenance.contains(&"command=ingest".to_string()));
}

#[test]
fn analyze_facebook_bundle_peaks_low() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    ok(&["gen-graph", "--out", "g.txt", "--seed", "0"], cwd);
    ok(&["simulate", "--graph", "g.txt", "--out", "sim", "--visits", "5", "--profile", "facebook-like"], cwd);
    ok(&["ingest", "--input", "sim", "--out", "bundle.json"], cwd);
    ok(&["analyze", "--input", "bundle.json", "--out", "rep"], cwd);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(cwd.join("rep/report.json")).unwrap()).unwrap();
    let shared = json["variables"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["variable"] == serde_json::to_value(FormVariable::SharedConnections).unwrap())
        .unwrap();
    let bins = shared["histogram"]["bins"].as_object().unwrap();
    let (mode, _) = bins
        .iter()
        .map(|(k, v)| (k.parse::<i64>().unwrap(), v.as_u64().unwrap()))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap();
    assert!(mode <= 3, "mode {mode}");

    let forms = read_forms(&cwd.join("bundle.json")).unwrap();
    let own = analyze_forms(&forms, &TrendThresholds::default()).unwrap();
    let own_shared = own.variable(FormVariable::SharedConnections);
    assert_eq!(own_shared.histogram.mode().unwrap().0, mode);
    assert_eq!(shared["pooled_class"]["tag"], serde_json::to_value(own_shared.pooled_class.as_ref().unwrap().tag).unwrap());

    let csv = fs::read_to_string(cwd.join("rep/histogram-shared_connections.csv")).unwrap();
    assert!(csv.starts_with("# recsim-histogram v1\n"));
    assert!(csv.contains("\nvalue,count\n"));
}

#[test]
fn analyze_writes_location_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    fs::write(cwd.join("ref.csv"), "country,count\nA,920\nB,80\n").unwrap();
    fs::write(cwd.join("obs.csv"), "country,share\nA,0.7\nB,0.3\n").unwrap();
    let input = fixture("fragment.tsv");
    ok(
        &[
            "analyze", "--input", input.to_str().unwrap(), "--out", "rep", "--reference-locations", "ref.csv",
            "--observed-locations", "obs.csv",
        ],
        cwd,
    );
    let text = fs::read_to_string(cwd.join("rep/locations.txt")).unwrap();
    assert!(text.starts_with("# recsim-locations v1\n"));
    let b_line = text.lines().find(|l| l.trim_start().starts_with('B')).unwrap();
    assert!(b_line.trim_end().ends_with('*'), "{text}");
}

#[test]
fn validate_self_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    small_graph(cwd);
    ok(&["simulate", "--graph", "g.txt", "--out", "sim", "--visits", "3"], cwd);
    ok(&["ingest", "--input", "sim", "--out", "b.json"], cwd);
    ok(&["validate", "--simulated", "sim", "--observed", "b.json", "--out", "val"], cwd);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(cwd.join("val/similarity.json")).unwrap()).unwrap();
    for v in json["variables"].as_array().unwrap() {
        assert_eq!(v["total_variation"], 0.0);
        assert_eq!(v["trend_agreement"], true);
    }

    let input = fixture("fragment.tsv");
    let out = recsim(&["validate", "--simulated", "sim", "--observed", input.to_str().unwrap(), "--out", "v2"], cwd);
    assert!(!out.status.success());
    ok(&["validate", "--simulated", "sim", "--observed", input.to_str().unwrap(), "--out", "v2", "--as-network", "x"], cwd);
}
