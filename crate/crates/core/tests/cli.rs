use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ugalearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ugalearn")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schema_effect_of_parity() {
    let v = json(&ugalearn(&["schema-effect", "--n", "7", "--function", "parity", "--index-set", "1..7"]));
    assert_eq!(v["effect"], 0.25);
    assert_eq!(v["schema_means"].as_object().unwrap().len(), 128);

    let v = json(&ugalearn(&["schema-effect", "--n", "7", "--index-set", "1..7", "--eta", "1/5"]));
    assert!((v["effect"].as_f64().unwrap() - 0.09).abs() < 1e-12);
}

#[test]
fn schema_effect_from_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("f.txt");
    std::fs::write(&table, "# x1 x2\n0 0\n1 1\n").unwrap();
    let v = json(&ugalearn(&[
        "schema-effect", "--n", "2", "--function", "table-file", "--table-file", path(&table), "--index-set", "1",
    ]));
    assert_eq!(v["effect"], 0.25);
    assert_eq!(v["schema_means"]["1"], 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(ugalearn(&["schema-effect", "--n", "30", "--index-set", "1..3"]).status.code(), Some(3));
    assert_eq!(ugalearn(&["schema-effect", "--n", "7", "--index-set", "9"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["schema-effect", "--n", "7", "--function", "xor", "--index-set", "1"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["simulate", "--n", "4"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["learn", "--epsilon", "1/2"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["learn", "--preset", "slow"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["simulate", "--eta", "zero"]).status.code(), Some(2));
    assert_eq!(ugalearn(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn simulate_single_run_single_generation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let v = json(&ugalearn(&["simulate", "--runs", "1", "--generations", "1", "--seed", "9", "--out", path(&out)]));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "run_id,generation,locus,ones_count,m");
    assert!(lines[1].starts_with("0,1,1,") && lines[2].starts_with("0,1,8,"));
    assert_eq!(v["master_seed"], 9);
    assert_eq!(v["trace_rows"], 2);
    assert_eq!(v["total_queries"], 1500);
    assert_eq!(v["config"]["pop_size"], 1500);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "n = 6\nK = \"2..4\"\neta = \"1/10\"\npop_size = 50\ngenerations = 5\nruns = 3\nseed = 4\ntrack_loci = [2, 6]\n",
    )
    .unwrap();
    let out = dir.path().join("t.csv");
    let v = json(&ugalearn(&["simulate", "--config", path(&cfg), "--runs", "2", "--out", path(&out)]));
    assert_eq!(v["config"]["runs"], 2);
    assert_eq!(v["config"]["k"], 3);
    assert_eq!(v["config"]["eta_den"], 10);
    assert_eq!(v["config"]["pop_size"], 50);
    assert_eq!(v["config_file"], path(&cfg));
    assert_eq!(v["trace_rows"], 2 * 5 * 2);
    assert!(!v["validated_regime"].as_bool().unwrap());
}

#[test]
fn stats_rejects_on_conforming_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conforming.csv");
    let mut text = String::from("run_id,generation,locus,ones_count,m\n");
    for r in 0..3000 {
        text += &format!("{r},800,1,{},1500\n{r},800,8,{},1500\n", if r % 2 == 0 { 1495 } else { 3 }, 700 + r % 100);
    }
    std::fs::write(&csv, text).unwrap();
    let v = json(&ugalearn(&["stats", path(&csv), "--alpha", "1e-100"]));
    assert_eq!(v["generation"], 800);
    assert_eq!(v["global_null"]["essential"]["rejected"], true);
    assert_eq!(v["global_null"]["nonessential"]["rejected"], true);
    assert_eq!(v["global_null"]["rejected"], true);
    assert!((v["global_null"]["essential"]["log10_p_value"].as_f64().unwrap() + 173.9758).abs() < 1e-3);
    assert_eq!(v["band_counts"]["1"]["outside"], 3000);
    assert_eq!(v["series"][0]["below"], 1500);

    let v = json(&ugalearn(&["stats", path(&csv), "--alpha", "1e-100", "--essential-loci", "8", "--nonessential-loci", "1"]));
    assert_eq!(v["global_null"]["rejected"], false);
}

#[test]
fn learn_fast_preset_json() {
    let v = json(&ugalearn(&["learn", "--n", "6", "--K", "1..3", "--preset", "fast", "--seed", "5"]));
    assert_eq!(v["runs"], 81);
    assert_eq!(v["ell"], 4);
    assert_eq!(v["total_queries"], 81 * 200 * 200);
    assert_eq!(v["target_concept"], "111000");
    assert_eq!(v["preset"], "fast");
    assert_eq!(v["validated_regime"], false);
    for key in ["hypothesis", "match", "wall_time_secs", "seed", "epsilon"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn learn_paper_preset_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("learn.json");
    let status = ugalearn(&["learn", "--preset", "paper", "--n", "8", "--epsilon", "1/8", "--out", path(&out)]);
    assert!(status.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["runs"], 81);
    assert_eq!(v["total_queries"], 97_200_000u64);
    assert_eq!(v["validated_regime"], true);
    assert_eq!(v["target_concept"], "11111110");
}
