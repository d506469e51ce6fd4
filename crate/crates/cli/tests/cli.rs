//! End-to-end runs of the `gridnet` binary and the pipeline library.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gridnet::{analyze_path, AnalysisBundle, AnalyzeOptions};

const NODES: &str = "id,kind\na,substation\nb,consumer\nc,consumer\n";
const EDGES: &str = "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\na,b,0.2,1,0,100\nb,c,0.3,2,0,80\n";

fn write_grid(dir: &Path, nodes: &str, edges: &str) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("nodes.csv"), nodes).unwrap();
    fs::write(dir.join("edges.csv"), edges).unwrap();
}

fn gridnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridnet")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two rings joined to nothing: a 6-cycle with a chord and a triangle.
fn two_components(dir: &Path) {
    let nodes = "id,kind\n".to_string()
        + &["t1", "t2", "t3", "r1", "r2", "r3", "r4", "r5", "r6"]
            .iter()
            .map(|n| format!("{n},consumer\n"))
            .collect::<String>();
    let mut edges = String::from("from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\n");
    for (a, b) in [("t1", "t2"), ("t2", "t3"), ("t3", "t1")] {
        edges += &format!("{a},{b},0.5,1,0,50\n");
    }
    for i in 1..=6 {
        edges += &format!("r{i},r{},0.25,{i},0,{}\n", i % 6 + 1, 40 + 10 * i);
    }
    edges += "r1,r4,0.1,1,0,200\n";
    write_grid(dir, &nodes, &edges);
}

#[test]
fn minimal_grid_produces_bundle_and_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    let out = tmp.path().join("out");
    write_grid(&input, NODES, EDGES);
    let o = gridnet(&["analyze", path(&input), "-o", path(&out), "--table", "metrics"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("ID  Order"), "{stdout}");
    assert!(stdout.contains("1.33333"), "avg degree 4/3 rounded: {stdout}");
    let bundle = AnalysisBundle::from_json(&fs::read_to_string(out.join("bundle.json")).unwrap()).unwrap();
    assert_eq!((bundle.order, bundle.size, bundle.components.len()), (3, 2, 1));
    let m = bundle.components[0].metrics.value.as_ref().unwrap();
    assert!((m.apl - 4.0 / 3.0).abs() < 1e-12);
    for f in ["metrics.csv", "degree_ccdf_0.csv", "removal_random_0.csv", "removal_weighted_degree_0.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert!(!out.join("cost_surface.csv").exists());
    assert!(bundle.components[0].cost.skipped.is_some());
}

#[test]
fn components_are_reported_largest_first() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    two_components(&input);
    let b = analyze_path(&input, &AnalyzeOptions::default()).unwrap();
    let orders: Vec<usize> = b.components.iter().map(|c| c.order).collect();
    assert_eq!(orders, vec![6, 3]);
    for (i, c) in b.components.iter().enumerate() {
        assert_eq!(c.component_id, i);
        assert_eq!(c.metrics.component_id, Some(i));
        assert_eq!(c.metrics.digest, b.digest);
    }
}

#[test]
fn same_seed_gives_identical_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    two_components(&input);
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = gridnet(&["analyze", path(&input), "-o", path(&out), "--seed", seed, "--cost"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("bundle.json")).unwrap()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
}

#[test]
fn bundle_json_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    two_components(&input);
    let opts = AnalyzeOptions {
        cost: true,
        ..AnalyzeOptions::default()
    };
    let b = analyze_path(&input, &opts).unwrap();
    let text = b.to_json();
    assert!(!text.contains("NaN") && !text.contains("inf"));
    let back = AnalysisBundle::from_json(&text).unwrap();
    assert_eq!(back, b);
    assert_eq!(back.to_json(), text);
}

#[test]
fn malformed_input_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    let bad = "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\na,b,0.2,1,0,\nb,c,oops,1,0,\n";
    write_grid(&input, NODES, bad);
    let o = gridnet(&["analyze", path(&input), "-o", path(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("edges.csv line 3"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_endpoint_and_bad_options_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    write_grid(&input, NODES, &(EDGES.to_string() + "c,zz,1,1,0,\n"));
    assert_eq!(gridnet(&["analyze", path(&input)]).status.code(), Some(2));

    write_grid(&input, NODES, EDGES);
    let out = tmp.path().join("out");
    let o = gridnet(&["analyze", path(&input), "-o", path(&out), "--removal-step", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(gridnet(&["analyze"]).status.code(), Some(2));
    assert_eq!(gridnet(&["table", "x.json", "nonsense"]).status.code(), Some(2));
}

#[test]
fn missing_currents_skip_cost_but_not_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    two_components(&input);
    let edges = fs::read_to_string(input.join("edges.csv")).unwrap();
    let stripped: String = edges
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 2 { l.rsplit_once(',').unwrap().0.to_string() + ",\n" } else { format!("{l}\n") })
        .collect();
    fs::write(input.join("edges.csv"), stripped).unwrap();
    let opts = AnalyzeOptions {
        cost: true,
        ..AnalyzeOptions::default()
    };
    let b = analyze_path(&input, &opts).unwrap();
    // the triangle lost a current and is also below the cost model's minimum order
    let ring = &b.components[0];
    assert!(ring.cost.value.is_some(), "{:?}", ring.cost.skipped);
    let tri = &b.components[1];
    assert!(tri.cost.skipped.is_some());
    assert!(tri.metrics.value.is_some());
    let markers = &b.cost_surface.value.as_ref().unwrap().markers;
    assert_eq!(markers.len(), 1);
}

#[test]
fn missing_current_is_named_in_the_skip_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    let nodes = "id,kind\n".to_string() + &(0..6).map(|i| format!("n{i},consumer\n")).collect::<String>();
    let mut edges = String::from("from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\n");
    for i in 0..6 {
        let current = if i == 2 { String::new() } else { "100".into() };
        edges += &format!("n{i},n{},0.3,1,0,{current}\n", (i + 1) % 6);
    }
    write_grid(&input, &nodes, &edges);
    let out = tmp.path().join("out");
    let o = gridnet(&["analyze", path(&input), "-o", path(&out), "--cost"]);
    assert!(o.status.success());
    let b = AnalysisBundle::from_json(&fs::read_to_string(out.join("bundle.json")).unwrap()).unwrap();
    let reason = b.components[0].cost.skipped.as_deref().unwrap();
    assert!(reason.contains("n2") && reason.contains("n3"), "{reason}");
    assert!(b.cost_surface.skipped.is_some());
}

#[test]
fn table_subcommand_reads_saved_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    let out = tmp.path().join("out");
    two_components(&input);
    assert!(gridnet(&["analyze", path(&input), "-o", path(&out), "--no-resilience"]).status.success());
    let bundle = out.join("bundle.json");
    for name in ["metrics", "weighted", "critical", "centrality"] {
        let o = gridnet(&["table", path(&bundle), name]);
        assert!(o.status.success(), "{name}");
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("---"));
    }
    assert!(!out.join("removal_random_0.csv").exists());
}

#[test]
fn json_input_matches_csv_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    two_components(&input);
    let file = gridnet_core::ingest::load_grid(&input).unwrap();
    let json = tmp.path().join("grid.json");
    fs::write(&json, gridnet_core::ingest::write_grid_json(&file.nodes, &file.edges)).unwrap();
    let a = analyze_path(&input, &AnalyzeOptions::default()).unwrap();
    let b = analyze_path(&json, &AnalyzeOptions::default()).unwrap();
    assert_ne!(a.digest, b.digest);
    assert_eq!(a.components.len(), b.components.len());
    for (x, y) in a.components.iter().zip(&b.components) {
        assert_eq!(x.metrics.value, y.metrics.value);
        assert_eq!(x.baseline.value, y.baseline.value);
        assert_eq!(x.centrality.value, y.centrality.value);
        assert_eq!(x.critical_edges.value, y.critical_edges.value);
        assert_eq!(x.resilience.value, y.resilience.value);
    }
}

#[test]
fn thread_setting_must_be_numeric() {
    let o = Command::new(env!("CARGO_BIN_EXE_gridnet"))
        .args(["table", "missing.json", "metrics"])
        .env("GRIDNET_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("GRIDNET_THREADS"));
}

#[test]
fn thread_count_does_not_change_results() {
    use gridnet_core::ingest::{save_grid_dir, synthetic_records, SyntheticSpec, WeightDist};
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("grid");
    let spec = SyntheticSpec {
        order: 150,
        size: 170,
        weight_dist: WeightDist::Uniform(0.05, 2.0),
        current_dist: Some(WeightDist::Uniform(80.0, 400.0)),
        seed: 3,
    };
    let (nodes, edges) = synthetic_records(&spec).unwrap();
    save_grid_dir(&input, &nodes, &edges).unwrap();
    let run = |threads: &str| {
        let out = tmp.path().join(format!("out{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_gridnet"))
            .args(["analyze", path(&input), "-o", path(&out), "--cost", "--seed", "5"])
            .env("GRIDNET_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("bundle.json")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}
