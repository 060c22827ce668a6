//! Command-line behaviour, file formats and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linas_core::metrics::hv_trace;
use linas_core::moea::dominates;
use linas_core::objective::{accuracy_latency, to_minimization};
use linas_core::{EvaluationStore, Genotype, SearchSpace};
use linas_moo::formats::{read_space_file, read_store_jsonl, space_to_json, StoreLine};
use proptest::prelude::*;

const TOY_SPACE: &str = r#"{"name":"toy","variables":[
  {"name":"a","options":[1,2,3]},
  {"name":"b","options":[1,2,3]},
  {"name":"c","options":[1,2,3]}
]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linas-moo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn toy_config(dir: &Path, extra: &str) -> PathBuf {
    write(dir, "toy.json", TOY_SPACE);
    let text = format!(
        r#"{{"space":"toy.json","algorithms":[{{"kind":"random"}}],"budget":10,"seeds":[0],"output_dir":"out","trace_stride":5{extra}}}"#
    );
    write(dir, "config.json", &text)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spaces_prints_definition_and_cardinality() {
    let out = run(&["spaces", "ncf_like"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with(r#"{"name":"ncf_like""#));
    assert_eq!(lines[1], "cardinality 7489800");
    assert_eq!(lines[2], "order_of_magnitude 7");

    let out = run(&["spaces", "mobilenetv3_like"]);
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(json["variables"].as_array().unwrap().len(), 45);
    assert!(text.contains("order_of_magnitude 19"));
}

#[test]
fn spaces_rejects_unknown_kind_and_reads_files() {
    let out = run(&["spaces", "no_such_space"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no_such_space"));

    let dir = tempfile::tempdir().unwrap();
    let single = write(
        dir.path(),
        "single.json",
        r#"{"name":"one","variables":[{"name":"x","options":[7]},{"name":"y","options":[3]}]}"#,
    );
    let out = run(&["spaces", path_str(&single)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("cardinality 1\n"));
}

#[test]
fn space_json_round_trips() {
    for name in ["mobilenetv3_like", "transformer_like", "resnet50_like", "ncf_like"] {
        let space = SearchSpace::builtin(name.parse().unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "s.json", &space_to_json(&space));
        let back = read_space_file(&path).unwrap();
        assert_eq!(back, space);
        assert_eq!(back.cardinality(), space.cardinality());
    }
}

#[test]
fn search_writes_stores_traces_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), "");
    let out = run(&["search", "-c", path_str(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out_dir = dir.path().join("out");

    let lines = read_store_jsonl(&out_dir.join("random_seed0.jsonl")).unwrap();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().enumerate().all(|(i, l)| l.eval_index == i + 1));
    assert!(lines.iter().all(|l| l.latency_normalized.is_some_and(|v| (0.0..=1.0).contains(&v))));

    let trace = fs::read_to_string(out_dir.join("random_seed0_trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().collect();
    assert_eq!(rows[0], "eval_count,hypervolume");
    assert_eq!(rows.len() - 1, 10 / 5);

    let csv_mirror = fs::read_to_string(out_dir.join("random_seed0.csv")).unwrap();
    assert!(csv_mirror.starts_with("eval_index,genotype,accuracy,latency,source,iteration\n"));
    assert_eq!(csv_mirror.lines().count(), 11);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["runs"][0]["status"], "ok");
    assert_eq!(manifest["runs"][0]["store"], "random_seed0.jsonl");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["runs"][0]["wall_time_seconds"].as_f64().unwrap() >= 0.0);

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary
        .starts_with("algorithm,eval_count,runs,hv_mean,hv_stderr,normalized_hv_mean,normalized_hv_stderr\n"));
}

#[test]
fn summary_matches_recomputed_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "c.json",
        r#"{"space":"ncf_like","algorithms":[{"kind":"random"},{"kind":"nsga2","population_size":10}],
            "budget":40,"seeds":[0,1,2],"output_dir":"o","trace_stride":10}"#,
    );
    let out = run(&["search", "-c", path_str(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out_dir = dir.path().join("o");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let reference: Vec<f64> =
        manifest["reference"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let space = SearchSpace::builtin("ncf_like".parse().unwrap());
    let objectives = accuracy_latency();

    let mut reader = csv::Reader::from_path(out_dir.join("summary.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 4);
    for row in rows {
        let (algo, count): (&str, usize) = (&row[0], row[1].parse().unwrap());
        let mut values = Vec::new();
        for seed in 0..3 {
            let lines = read_store_jsonl(&out_dir.join(format!("{algo}_seed{seed}.jsonl"))).unwrap();
            let mut store = EvaluationStore::new(space.clone(), 2);
            for l in &lines {
                store.insert(l.genotype().unwrap(), l.values.clone(), &l.source, l.iteration).unwrap();
            }
            values.push(hv_trace(&store, &objectives, &reference, 10).unwrap().at(count).unwrap());
        }
        let mean = values.iter().sum::<f64>() / 3.0;
        let written: f64 = row[3].parse().unwrap();
        assert!((written - mean).abs() <= 1e-9 * mean.abs().max(1.0), "{algo} at {count}");
    }
}

#[test]
fn threads_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "c.json",
        r#"{"space":"ncf_like","algorithms":[{"kind":"random"},{"kind":"nsga2","population_size":10},
            {"kind":"linas","population_size":10,"iterations":2,"inner_evaluations":200,"inner_population_size":10}],
            "budget":20,"seeds":[3,4],"output_dir":"o","trace_stride":5}"#,
    );
    assert_eq!(code(&run(&["search", "-c", path_str(&config)])), 0);
    let single: Vec<(String, Vec<u8>)> = read_outputs(&dir.path().join("o"));
    fs::remove_dir_all(dir.path().join("o")).unwrap();
    assert_eq!(code(&run(&["search", "-c", path_str(&config), "--threads", "3"])), 0);
    let parallel = read_outputs(&dir.path().join("o"));
    assert_eq!(single.len(), parallel.len());
    for (a, b) in single.iter().zip(&parallel) {
        if a.0 != "manifest.json" {
            assert_eq!(a, b, "{}", a.0);
        }
    }
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"budget":"many"}"#);
    let out = run(&["search", "-c", path_str(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`budget`"));

    let nested = write(dir.path(), "nested.json", r#"{"algorithms":[{"kind":"nsga2","mutation":0.1}]}"#);
    let out = run(&["search", "-c", path_str(&nested)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("algorithms[0].mutation"), "{}", stderr(&out));

    let small = write(dir.path(), "small.json", r#"{"budget":20,"algorithms":[{"kind":"nsga2"}]}"#);
    assert_eq!(code(&run(&["search", "-c", path_str(&small)])), 2);

    let empty = write(dir.path(), "empty.json", r#"{"seeds":[]}"#);
    assert_eq!(code(&run(&["search", "-c", path_str(&empty)])), 2);

    let kinds = write(dir.path(), "kinds.json", r#"{"predictor_analysis":{"kinds":["lasso"]}}"#);
    assert_eq!(code(&run(&["predictor-analysis", "-c", path_str(&kinds)])), 2);
}

#[test]
fn evaluation_failure_exits_3_and_keeps_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("genotype,accuracy,latency\n");
    for (k, g) in ["0-0-0", "1-0-0", "2-0-0", "0-1-0"].iter().enumerate() {
        table.push_str(&format!("{g},{},{}\n", 70.0 + k as f64, 10.0 + 2.0 * k as f64));
    }
    write(dir.path(), "table.csv", &table);
    let config = toy_config(dir.path(), r#","evaluator":{"kind":"tabular","path":"table.csv"}"#);
    let out = run(&["search", "-c", path_str(&config)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"][0]["status"], "failed");
    assert!(manifest["runs"][0]["error"].as_str().unwrap().contains("no tabular entry"));
}

#[test]
fn nearest_reject_skips_missing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("genotype,accuracy,latency\n");
    let mut k = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            table.push_str(&format!("{a}-{b}-0,{},{}\n", 70.0 + k, 60.0 - k));
            k += 1.0;
        }
    }
    write(dir.path(), "table.csv", &table);
    let config = toy_config(
        dir.path(),
        r#","evaluator":{"kind":"tabular","path":"table.csv","missing_policy":"nearest_reject"}"#,
    );
    let text = fs::read_to_string(&config).unwrap().replace(r#""budget":10"#, r#""budget":9"#);
    fs::write(&config, text).unwrap();
    let out = run(&["search", "-c", path_str(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = read_store_jsonl(&dir.path().join("out/random_seed0.jsonl")).unwrap();
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.genotype.ends_with("-0")));
}

#[test]
fn predictor_analysis_writes_long_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "c.json",
        r#"{"space":"ncf_like","output_dir":"o",
            "predictor_analysis":{"train_sizes":[100,1000],"trials":2,"test_size":100,"kinds":["ridge","stacked"]}}"#,
    );
    let out = run(&["predictor-analysis", "-c", path_str(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("o/predictor_report.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["objective", "metric", "kind", "train_size", "value"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for objective in ["accuracy", "latency"] {
        for metric in ["mape", "kendall_tau"] {
            let n = rows.iter().filter(|r| &r[0] == objective && &r[1] == metric).count();
            assert_eq!(n, 4, "{objective} {metric}");
        }
    }
    let mape = |kind: &str, size: &str| -> f64 {
        let r = rows.iter().find(|r| &r[0] == "accuracy" && &r[1] == "mape" && &r[2] == kind && &r[3] == size);
        r.unwrap()[4].parse().unwrap()
    };
    assert!(mape("ridge", "1000") <= mape("ridge", "100"));
}

#[test]
fn predictor_analysis_on_small_space_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(dir.path(), "");
    let out = run(&["predictor-analysis", "-c", path_str(&config)]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

fn store_file(dir: &Path, points: &[(f64, f64)]) -> PathBuf {
    let mut text = String::new();
    for (i, (acc, lat)) in points.iter().enumerate() {
        let line = StoreLine {
            eval_index: i + 1,
            genotype: format!("{i}-0"),
            iteration: 0,
            latency_normalized: None,
            source: "fixture".into(),
            values: vec![*acc, *lat],
        };
        text.push_str(&serde_json::to_string(&line).unwrap());
        text.push('\n');
    }
    write(dir, "store.jsonl", &text)
}

fn front_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn pareto_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let front = dir.path().join("front.csv");

    let single = store_file(dir.path(), &[(75.0, 20.0)]);
    assert_eq!(code(&run(&["pareto", "-i", path_str(&single), "-o", path_str(&front)])), 0);
    let rows = front_rows(&front);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "0-0");

    let pair = store_file(dir.path(), &[(74.0, 30.0), (76.0, 20.0)]);
    assert_eq!(code(&run(&["pareto", "-i", path_str(&pair), "-o", path_str(&front)])), 0);
    let header = fs::read_to_string(&front).unwrap();
    assert!(header.starts_with("eval_index,genotype,obj_1,obj_2,source,iteration\n"));
    let rows = front_rows(&front);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "2");
}

#[test]
fn pareto_reports_parse_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"eval_index":1,"genotype":"0","iteration":0,"source":"x","values":[1.0,2.0]}"#;
    let path = write(dir.path(), "broken.jsonl", &format!("{good}\n{good}\nnot json\n"));
    let out = run(&["pareto", "-i", path_str(&path), "-o", path_str(&dir.path().join("f.csv"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("broken.jsonl:3:"), "{}", stderr(&out));
}

#[test]
fn hypervolume_command() {
    let dir = tempfile::tempdir().unwrap();
    let store = store_file(dir.path(), &[(74.0, 30.0), (76.0, 40.0), (72.0, 10.0)]);
    let out = run(&["hypervolume", "-i", path_str(&store), "--ref", "70,50", "--stride", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // Minimized points (-74, 30), (-76, 40), (-72, 10) against (-70, 50).
    assert_eq!(stdout(&out), "eval_count,hypervolume\n1,80\n2,100\n3,140\n");

    let out = run(&["hypervolume", "-i", path_str(&store), "--normalized"]);
    let text = stdout(&out);
    let last: f64 = text.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last > 0.0 && last <= 1.0);

    let out = run(&["hypervolume", "-i", path_str(&store), "--ref", "70"]);
    assert_eq!(code(&out), 2);
}

fn brute_front(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, &points[i]).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pareto_command_matches_oracle(points in prop::collection::vec((70.0..80.0f64, 5.0..60.0f64), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let store = store_file(dir.path(), &points);
        let front = dir.path().join("front.csv");
        prop_assert_eq!(code(&run(&["pareto", "-i", path_str(&store), "-o", path_str(&front)])), 0);
        let got: Vec<usize> = front_rows(&front).iter().map(|r| r[0].parse::<usize>().unwrap() - 1).collect();
        let min: Vec<Vec<f64>> =
            points.iter().map(|&(a, l)| to_minimization(&accuracy_latency(), &[a, l])).collect();
        prop_assert_eq!(got, brute_front(&min));
    }

    #[test]
    fn store_lines_round_trip(values in prop::collection::vec((-1e6..1e6f64, 0.0..1e3f64), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = store_file(dir.path(), &values);
        let lines = read_store_jsonl(&path).unwrap();
        for (l, (a, b)) in lines.iter().zip(&values) {
            prop_assert_eq!(&l.values, &vec![*a, *b]);
            prop_assert!(l.genotype().is_ok());
        }
    }
}

#[test]
fn genotype_strings_parse() {
    let g: Genotype = "3-0-12".parse().unwrap();
    assert_eq!(g.to_string(), "3-0-12");
}
