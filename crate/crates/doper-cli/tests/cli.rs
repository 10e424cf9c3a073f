//! End-to-end tests of the `doper` binary: golden outputs, the exit-code
//! contract, cache round-trips, and thread-count independence.

use std::path::Path;
use std::process::Command;

fn doper(args: &[&str]) -> (Option<i32>, String, String) {
    doper_in(args, None)
}

fn doper_in(args: &[&str], cwd: Option<&Path>) -> (Option<i32>, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_doper"));
    cmd.args(args);
    // Keep the default cache location out of the repository tree.
    cmd.env_remove("DOPER_CACHE_DIR");
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code(),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

#[test]
fn radii_commands_match_the_calculus() {
    let (code, stdout, _) = doper(&["radii", "enumerate", "--p", "5", "--n", "2", "--distinct"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "[0,1]\n[0,2]\n");

    let (code, stdout, _) = doper(&["radii", "star", "--p", "5", "--rho", "[0,1]"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "[0,1,2]\n");

    // The star involution squares to the identity.
    let (code, stdout, _) = doper(&["radii", "star", "--p", "5", "--rho", "[0,1,2]"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "[0,1]\n");

    let (code, stdout, _) = doper(&["radii", "lift", "--p", "5", "--rho", "[0,1]", "--sum", "0"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "[2,3]\n");

    let (code, stdout, _) = doper(&[
        "radii",
        "enumerate",
        "--p",
        "5",
        "--n",
        "2",
        "--distinct",
        "--json",
    ]);
    assert_eq!(code, Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("valid json");
    assert_eq!(doc["p"], 5);
    assert_eq!(doc["classes"].as_array().expect("array").len(), 2);
}

#[test]
fn exit_codes_distinguish_usage_and_domain_failures() {
    // Missing required flag: usage error.
    let (code, _, _) = doper(&["radii", "star", "--p", "5"]);
    assert_eq!(code, Some(2));

    // Unknown flag: usage error.
    let (code, _, _) = doper(&["verlinde", "--p", "5", "--n", "2", "--genus", "2", "--bogus"]);
    assert_eq!(code, Some(2));

    // Composite characteristic: domain error with a message.
    let (code, _, stderr) = doper(&["radii", "star", "--p", "4", "--rho", "[0,1]"]);
    assert_eq!(code, Some(1));
    assert!(stderr.starts_with("error:"), "stderr was {stderr:?}");

    // A repeated entry has no starred class.
    let (code, _, _) = doper(&["radii", "star", "--p", "5", "--rho", "[0,0]"]);
    assert_eq!(code, Some(1));

    // Verlinde outside its precondition range.
    let (code, _, _) = doper(&["verlinde", "--p", "5", "--n", "3", "--genus", "3"]);
    assert_eq!(code, Some(1));
}

#[test]
fn fusion_table_cache_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cache = dir.path().join("cache");
    let cache_s = cache.to_str().expect("utf-8 path");

    let (code, text_run, _) = doper(&["fusion", "table", "--p", "5", "--n", "2", "--cache-dir", cache_s]);
    assert_eq!(code, Some(0));
    assert_eq!(
        text_run,
        "p 5 n 2\nbasis [0,1] [0,2]\n0 0 0 1\n0 1 1 1\n1 1 1 1\n"
    );

    let files: Vec<_> = std::fs::read_dir(&cache)
        .expect("cache dir exists")
        .map(|e| e.expect("entry").path())
        .collect();
    assert_eq!(files.len(), 1, "one cache file per (p, n)");
    let bytes1 = std::fs::read(&files[0]).expect("cache file");

    // The cached bytes re-serialize to themselves through the library.
    let text = String::from_utf8(bytes1.clone()).expect("utf-8 cache");
    let parsed = doper::fusion::table_from_json(&text).expect("valid cache");
    assert_eq!(doper::fusion::table_to_json(&parsed), text);

    // A cache hit leaves the file untouched and prints the same table.
    let (code, again, _) = doper(&["fusion", "table", "--p", "5", "--n", "2", "--cache-dir", cache_s]);
    assert_eq!(code, Some(0));
    assert_eq!(again, text_run);
    assert_eq!(std::fs::read(&files[0]).expect("cache file"), bytes1);

    // JSON output equals the cache contents.
    let (code, json_run, _) = doper(&[
        "fusion", "table", "--p", "5", "--n", "2", "--cache-dir", cache_s, "--json",
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(json_run.trim_end(), text);

    // The environment variable picks the cache directory when no flag is set.
    let env_cache = dir.path().join("env-cache");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_doper"));
    cmd.args(["fusion", "table", "--p", "5", "--n", "2"]);
    cmd.env("DOPER_CACHE_DIR", &env_cache);
    let out = cmd.output().expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert!(env_cache.is_dir(), "env-selected cache dir is created");
}

#[test]
fn fusion_degree_examples_and_methods_agree() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cache = dir.path().join("cache");
    let cache_s = cache.to_str().expect("utf-8 path");

    let (code, stdout, _) = doper(&[
        "fusion", "degree", "--p", "5", "--genus", "2", "--cache-dir", cache_s,
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "5\n");

    let triple = "[0,1];[0,1];[0,1]";
    for method in ["character", "factorization"] {
        let (code, stdout, _) = doper(&[
            "fusion", "degree", "--p", "5", "--genus", "0", "--radii", triple, "--method",
            method, "--cache-dir", cache_s,
        ]);
        assert_eq!(code, Some(0), "method {method}");
        assert_eq!(stdout, "1\n", "method {method}");
    }

    // Transporting the triple through the star involution preserves degree.
    let starred = "[0,1,2];[0,1,2];[0,1,2]";
    let (code, stdout, _) = doper(&[
        "fusion", "degree", "--p", "5", "--n", "3", "--genus", "0", "--radii", starred,
        "--method", "factorization", "--cache-dir", cache_s,
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "1\n");

    // The factorization method only reduces genus-0 surfaces.
    let (code, _, stderr) = doper(&[
        "fusion", "degree", "--p", "5", "--genus", "1", "--radii", "[0,1]", "--method",
        "factorization", "--cache-dir", cache_s,
    ]);
    assert_eq!(code, Some(1));
    assert!(stderr.contains("genus 0"), "stderr was {stderr:?}");

    // CSV emission for sweep post-processing.
    let (code, stdout, _) = doper(&[
        "fusion", "degree", "--p", "5", "--genus", "0", "--radii", triple, "--csv",
        "--cache-dir", cache_s,
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout,
        "p,n,genus,radii,method,value\n5,2,0,\"[0,1];[0,1];[0,1]\",character,1\n"
    );
}

#[test]
fn fusion_verify_factorization_prints_both_sides() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cache_s = dir.path().to_str().expect("utf-8 path").to_owned();
    let (code, stdout, _) = doper(&[
        "fusion",
        "verify-factorization",
        "--p",
        "5",
        "--g1",
        "1",
        "--g2",
        "1",
        "--cache-dir",
        &cache_s,
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "5 == 5 OK\n");
}

#[test]
fn verlinde_examples_and_duality_check() {
    let (code, stdout, _) = doper(&["verlinde", "--p", "5", "--n", "2", "--genus", "2"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "5\n");

    let (code, stdout, _) = doper(&["verlinde", "--p", "3", "--n", "2", "--genus", "2"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "1\n");

    let (code, stdout, _) = doper(&[
        "verlinde", "--p", "7", "--n", "2", "--genus", "2", "--check-duality",
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "14 == 14 OK\n");

    let (code, stdout, _) = doper(&["verlinde", "--p", "11", "--n", "3", "--genus", "2", "--csv"]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "p,n,genus,radii,method,value\n11,3,2,\"\",cyclotomic,1573\n");
}

#[test]
fn oper_dpsi_reports_full_residue_spectra() {
    let (code, stdout, _) = doper(&["oper", "dpsi", "--p", "3"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("rank 3, dormant, degree 6"), "stdout was {stdout:?}");
    assert!(
        stdout.contains("exponents [0,1,2] at all marked points"),
        "stdout was {stdout:?}"
    );
}

#[test]
fn oper_duals_round_trip_through_files() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.oper");
    let b = dir.path().join("b.oper");
    let c = dir.path().join("c.oper");
    let a_s = a.to_str().expect("utf-8 path");
    let b_s = b.to_str().expect("utf-8 path");
    let c_s = c.to_str().expect("utf-8 path");

    let (code, stdout, _) = doper(&[
        "oper", "brute-sl2", "--p", "5", "--radii", "[0,1];[0,1];[0,1]", "--out", a_s,
    ]);
    assert_eq!(code, Some(0));
    assert_eq!(stdout, "1\n");

    let (code, stdout, _) = doper(&["oper", "dualize", "--in", a_s, "--out", b_s]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("rank 3"), "stdout was {stdout:?}");

    let (code, _, _) = doper(&["oper", "check", "--in", b_s]);
    assert_eq!(code, Some(0));

    let (code, stdout, _) = doper(&[
        "oper", "dualize", "--in", b_s, "--out", c_s, "--compare", a_s,
    ]);
    assert_eq!(code, Some(0));
    assert!(
        stdout.contains("isomorphic to original: yes"),
        "stdout was {stdout:?}"
    );
}

#[test]
fn brute_counts_match_the_membership_table() {
    let cases = [
        ("[0,1];[0,1];[0,1]", "1\n"),
        ("[0,1];[0,1];[0,2]", "0\n"),
        ("[0,1];[0,2];[0,2]", "1\n"),
        ("[0,2];[0,2];[0,2]", "1\n"),
    ];
    for (radii, expect) in cases {
        let (code, stdout, _) = doper(&["oper", "brute-sl2", "--p", "5", "--radii", radii]);
        assert_eq!(code, Some(0), "radii {radii}");
        assert_eq!(stdout, expect, "radii {radii}");
    }
}

#[test]
fn unique_complement_oper_stars_the_seed_exponents() {
    let (code, stdout, _) = doper(&["oper", "unique-glp1", "--p", "3"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("rank 2"), "stdout was {stdout:?}");
    assert!(
        stdout.contains("exponents [1,2] at all marked points"),
        "stdout was {stdout:?}"
    );
}

#[test]
fn worker_count_never_changes_printed_numbers() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cache_s = dir.path().to_str().expect("utf-8 path").to_owned();
    let jobs: Vec<Vec<&str>> = vec![
        vec!["verlinde", "--p", "11", "--n", "3", "--genus", "2"],
        vec!["fusion", "degree", "--p", "7", "--genus", "2", "--cache-dir", &cache_s],
    ];
    for args in jobs {
        let mut one = args.clone();
        one.extend(["--threads", "1"]);
        let mut four = args.clone();
        four.extend(["--threads", "4"]);
        let (c1, s1, _) = doper(&one);
        let (c4, s4, _) = doper(&four);
        assert_eq!(c1, Some(0));
        assert_eq!(c4, Some(0));
        assert_eq!(s1, s4, "thread-count-dependent output for {args:?}");
    }
}
