//! Drives the `reciprec` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn reciprec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reciprec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = reciprec(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Object keys of `v` as K values, ascending.
fn ks_of(v: &Value) -> Vec<u64> {
    let mut ks: Vec<u64> = v
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.parse().unwrap())
        .collect();
    ks.sort_unstable();
    ks
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small synthetic log on disk, shared by several tests.
fn synth(dir: &Path, users: &str, seed: &str) {
    ok(&["synth", "--users", users, "--seed", seed, "--out", p(dir)]);
}

#[test]
fn synth_writes_three_files_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, "500", "42");
    synth(&b, "500", "42");
    for f in ["users.csv", "contacts.csv", "stats.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let stats = json(&a.join("stats.json"));
    assert_eq!(stats["generator"]["seed"], 42);
    assert_eq!(stats["stats"]["num_users"], 500);
    assert!(stats["generator"]["rng"]
        .as_str()
        .unwrap()
        .contains("ChaCha8"));
}

#[test]
fn invalid_fraction_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = reciprec(&["synth", "--male-fraction", "1.5", "--out", p(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("male fraction"));
    assert!(!tmp.path().join("users.csv").exists());

    assert_eq!(code(&reciprec(&["synth", "--users", "many"])), 1);
    assert_eq!(code(&reciprec(&["frobnicate"])), 1);
    assert_eq!(code(&reciprec(&["--help"])), 0);
}

#[test]
fn default_eval_reports_every_model_and_k() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "800", "7");
    let out = tmp.path().join("eval");
    ok(&["eval", "--data", p(&data), "--out", p(&out)]);
    let m = json(&out.join("metrics.json"));
    let models: Vec<_> = m.as_object().unwrap().keys().cloned().collect();
    assert_eq!(models, ["baseline", "hybrid", "reciprocity_only"]);
    for model in &models {
        assert_eq!(ks_of(&m[model]), [1, 5, 10, 20, 50, 100]);
        let at10 = &m[model]["10"];
        assert!(at10["city"]["rc_recall"].is_f64());
        assert!(at10["individual"]["rc_recall"]["n"].as_u64().unwrap() > 0);
        assert!(at10["individual"]["ic_precision"]["ci_half_width"].is_f64());
    }
    // K keys are written in numeric order.
    let text = fs::read_to_string(out.join("metrics.json")).unwrap();
    assert!(text.find("\"5\": {").unwrap() < text.find("\"10\": {").unwrap());
    let per_user = fs::read_to_string(out.join("per_user_metrics.csv")).unwrap();
    let mut lines = per_user.lines();
    assert_eq!(
        lines.next(),
        Some("user_id,model,K,ic_hits,ic_set_size,rc_hits,rc_set_size")
    );
    let n = m["hybrid"]["1"]["city"]["users"].as_u64().unwrap() as usize;
    assert_eq!(lines.count(), n * 3 * 6);
    assert!(out.join("cohort.json").exists());
}

#[test]
fn hybrid_only_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    ok(&[
        "eval",
        "--users",
        "600",
        "--models",
        "hybrid",
        "--penalty",
        "0.6",
        "--out",
        p(out),
    ]);
    let m = json(&out.join("metrics.json"));
    assert_eq!(m.as_object().unwrap().len(), 1);
    assert!(m.get("hybrid").is_some());
}

#[test]
fn no_service_users_names_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path();
    fs::write(data.join("users.csv"), "user_id,gender\na,M\nb,F\n").unwrap();
    fs::write(
        data.join("contacts.csv"),
        "sender_id,receiver_id,day\na,b,1\nb,a,120\n",
    )
    .unwrap();
    let out = reciprec(&[
        "eval",
        "--data",
        p(data),
        "--threshold",
        "10",
        "--out",
        p(data),
    ]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("no service users") && err.contains("10"),
        "{err}"
    );
    assert!(!data.join("metrics.json").exists());
}

#[test]
fn bad_input_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path();
    fs::write(data.join("users.csv"), "user_id,gender\na,M\nb,M\n").unwrap();
    fs::write(data.join("contacts.csv"), "a,b,0\n").unwrap();
    let out = reciprec(&["eval", "--data", p(data), "--out", p(data)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("contacts.csv:1:"));
    let missing = reciprec(&["eval", "--data", p(&data.join("nope")), "--out", p(data)]);
    assert_eq!(code(&missing), 2);
}

fn sweep_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_grid_and_single_value_consistency() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "700", "11");
    let grid = tmp.path().join("grid");
    ok(&[
        "sweep",
        "--data",
        p(&data),
        "--penalties",
        "0.2,0.4,0.6,0.8",
        "--out",
        p(&grid),
    ]);
    let rows = sweep_rows(&grid.join("sweep.csv"));
    assert_eq!(rows.len(), 4 * 6);
    for k in ["1", "5", "10", "20", "50", "100"] {
        assert_eq!(rows.iter().filter(|r| r[1] == k).count(), 4);
    }
    assert!(rows.iter().all(|r| r.len() == 10));

    let single = tmp.path().join("single");
    ok(&[
        "sweep",
        "--data",
        p(&data),
        "--penalties",
        "0.6",
        "--out",
        p(&single),
    ]);
    let eval = tmp.path().join("eval");
    ok(&[
        "eval",
        "--data",
        p(&data),
        "--models",
        "hybrid",
        "--penalty",
        "0.6",
        "--out",
        p(&eval),
    ]);
    let m = json(&eval.join("metrics.json"));
    for row in sweep_rows(&single.join("sweep.csv")) {
        let at = &m["hybrid"][&row[1]];
        let pairs = [
            (&row[2], &at["city"]["ic_precision"]),
            (&row[5], &at["city"]["rc_recall"]),
            (&row[9], &at["individual"]["rc_recall"]["mean"]),
        ];
        for (text, value) in pairs {
            assert_eq!(text.parse::<f64>().unwrap(), value.as_f64().unwrap());
        }
    }

    let bad = reciprec(&[
        "sweep",
        "--data",
        p(&data),
        "--penalties",
        "0.5,1.2",
        "--out",
        p(&grid),
    ]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn cohort_reports_more_active_successful_users() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[
        "cohort",
        "--users",
        "1500",
        "--seed",
        "3",
        "--out",
        p(tmp.path()),
    ]);
    let c = json(&tmp.path().join("cohort.json"));
    assert_eq!(c["k_star"], 100);
    for g in c["by_gender"].as_array().unwrap() {
        let (sr, ur) = (
            g["sr_mean_messages"].as_f64().unwrap(),
            g["ur_mean_messages"].as_f64().unwrap(),
        );
        assert!(sr > ur, "{}: {sr} vs {ur}", g["gender"]);
        assert_eq!(g["attribute_distances"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn cohort_without_attributes_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    ok(&[
        "synth",
        "--users",
        "600",
        "--no-attributes",
        "--out",
        p(&data),
    ]);
    let out = ok(&[
        "cohort",
        "--data",
        p(&data),
        "--ks",
        "1,10",
        "--k-star",
        "1",
        "--out",
        p(tmp.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let c = json(&tmp.path().join("cohort.json"));
    assert_eq!(c["k_star"], 1);
    for g in c["by_gender"].as_array().unwrap() {
        assert!(g["attribute_distances"].as_array().unwrap().is_empty());
        assert!(!g["warnings"].as_array().unwrap().is_empty());
    }
    assert!(c["sr_size"].as_u64().unwrap() < c["ur_size"].as_u64().unwrap());
}

#[test]
fn metrics_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "1000", "5");
    let (a, b) = (tmp.path().join("w1"), tmp.path().join("w8"));
    ok(&["eval", "--data", p(&data), "--workers", "1", "--out", p(&a)]);
    ok(&["eval", "--data", p(&data), "--workers", "8", "--out", p(&b)]);
    for f in ["metrics.json", "per_user_metrics.csv", "cohort.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.conf");
    let out = tmp.path().join("from-conf");
    fs::write(
        &conf,
        format!("# small run\nusers = 500\nmodels = baseline, hybrid\nks = 5,10\npenalty = 0.4\nout = {}\n", p(&out)),
    )
    .unwrap();
    ok(&["eval", "--config", p(&conf), "--models", "hybrid"]);
    let m = json(&out.join("metrics.json"));
    assert_eq!(
        m.as_object().unwrap().keys().collect::<Vec<_>>(),
        ["hybrid"]
    );
    assert_eq!(ks_of(&m["hybrid"]), [5, 10]);

    fs::write(&conf, "users = 500\nspeed = fast\n").unwrap();
    let bad = reciprec(&["eval", "--config", p(&conf), "--out", p(tmp.path())]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown setting `speed`"));
}

#[test]
fn dense_oracle_and_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, "250", "9");
    let out = ok(&[
        "eval",
        "--data",
        p(&data),
        "--threshold",
        "2",
        "--dense-oracle",
        "--dumps",
        "--out",
        p(tmp.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout)
        .contains("dense oracle: sparse and dense results agree"));
    let heads = [
        ("matrix_hybrid.csv", "row_user,col_user,sent,received"),
        ("similarity_baseline.csv", "user_p,user_q,score"),
        (
            "recommendations_reciprocity_only.csv",
            "service_user,rank,candidate,score",
        ),
    ];
    for (f, head) in heads {
        let text = fs::read_to_string(tmp.path().join(f)).unwrap();
        assert_eq!(text.lines().next(), Some(head), "{f}");
    }
}
