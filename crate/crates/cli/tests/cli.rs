use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn relkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relkit"))
        .args(args)
        .env_remove("RELKIT_CAPS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = relkit(&all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(&o)));
    (code(&o), v)
}

fn first(v: &Value) -> &Value {
    &v["outcomes"][0]
}

fn pairs(v: &Value) -> usize {
    v.as_array().expect("pair list").len()
}

#[test]
fn check_holds_on_two_element_lattice() {
    let o = relkit(&["check", "lattice2", "cdist2", "--h", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("status    holds"));
}

#[test]
fn check_refutes_cdist3_on_z2cube() {
    let o = relkit(&["check", "z2cube", "cdist3", "--k", "4"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    // α, and σ = β ∪ γ with both congruences shown
    assert!(text.contains("alpha [cong] = {"));
    assert!(text.contains("sigma [ucong2] = {"));
    assert!(text.contains("component 1 = {"));
    assert!(text.contains("component 2 = {"));
}

#[test]
fn square_of_lattice_refutes_idempotence_with_eta_union() {
    let spec = "uadm:s ; uadm:s == uadm:s";
    assert_eq!(code(&relkit(&["check", "lattice_2x2sq", spec])), 1);

    let (c, v) = json(&["check", "lattice_2x2sq", spec, "--classes", "s=ucong2"]);
    assert_eq!(c, 1);
    let cex = &first(&v)["verdict"]["counterexample"];
    let s = &cex["assignment"][0];
    // η1 ∪ η2: two kernels of 8 pairs sharing Δ
    assert_eq!(pairs(&s["relation"]), 12);
    assert_eq!(s["components"].as_array().unwrap().len(), 2);
    for comp in s["components"].as_array().unwrap() {
        assert_eq!(pairs(comp), 8);
    }
    // σ ∘ σ is the full relation, σ is not
    assert_eq!(pairs(&cex["lhs"]), 16);
    assert_eq!(pairs(&cex["rhs"]), 12);
}

#[test]
fn find_terms_examples() {
    let (c, v) = json(&["find-terms", "lattice2", "jonsson", "--max", "4"]);
    assert_eq!(c, 0);
    assert_eq!(first(&v)["system"]["schema"]["k"], 2);

    let (c, v) = json(&["find-terms", "lattice2", "mal", "--h", "2"]);
    assert_eq!(c, 0);
    assert_eq!(first(&v)["system"]["schema"]["f"], serde_json::json!([1, 2]));

    let (c, v) = json(&["find-terms", "z2", "majority"]);
    assert_eq!(c, 1);
    assert_eq!(first(&v)["status"], "absent");
}

#[test]
fn free_algebra_counts_and_caps() {
    // free distributive lattice on 3 generators has 18 elements
    let (c, v) = json(&["free-algebra", "lattice2", "--arity", "3"]);
    assert_eq!(c, 0);
    assert_eq!(first(&v)["count"], 18);
    assert_eq!(first(&v)["complete"], true);

    let (c, v) = json(&["free-algebra", "lattice2", "--arity", "3", "--cap", "5"]);
    assert_eq!(c, 2);
    assert_eq!(first(&v)["complete"], false);
    assert_eq!(code(&relkit(&["--allow-truncated", "free-algebra", "lattice2", "--cap", "5"])), 0);
}

#[test]
fn z2cube_congruences_form_the_subspace_lattice() {
    let (c, v) = json(&["congruences", "z2cube"]);
    assert_eq!(c, 0);
    let cons = first(&v)["congruences"].as_array().unwrap();
    assert_eq!(cons.len(), 16);
    // subspaces of GF(2)^3 by dimension: 1, 7, 7, 1
    let mut levels = [0usize; 4];
    for con in cons {
        levels[con["level"].as_u64().unwrap() as usize] += 1;
        let blocks = con["blocks"].as_array().unwrap();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.as_array().unwrap().len()).collect();
        // cosets of one subgroup: equal blocks of power-of-two size
        assert!(sizes.iter().all(|&s| s == sizes[0] && s.is_power_of_two()));
        assert_eq!(con["pairs"].as_u64().unwrap() as usize, 8 * sizes[0]);
    }
    assert_eq!(levels, [1, 7, 7, 1]);
    let text = stdout(&relkit(&["congruences", "z2cube"]));
    assert!(text.contains("hasse (top to bottom)"));
}

#[test]
fn expansions_of_the_u_inclusion() {
    let spec = "uadm:a & (uadm:s ; uadm:s) <= (uadm:a & uadm:s) ; (uadm:a & uadm:s)";
    let (c, v) = json(&["expansions", spec]);
    assert_eq!(c, 0);
    assert_eq!(first(&v)["expansions"].as_array().unwrap().len(), 4);

    let forbidden = relkit(&["expansions", "uadm:s^* <= uadm:s"]);
    assert_eq!(code(&forbidden), 3);
}

#[test]
fn expansion_check_on_an_algebra_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp.json");
    let o = relkit(&[
        "--out",
        out.to_str().unwrap(),
        "expansions",
        "malIncl",
        "--algebra",
        "z2cube",
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let o = relkit(&["verify", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

fn save(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut all = vec!["--out", path.to_str().unwrap()];
    all.extend_from_slice(args);
    relkit(&all);
    path
}

fn edit(path: &Path, f: impl FnOnce(&mut Value)) -> std::path::PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    f(&mut v);
    let out = path.with_extension("edited.json");
    std::fs::write(&out, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    out
}

#[test]
fn verify_replays_refutations_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let report = save(dir.path(), "cex.json", &["check", "z2cube", "cdist3", "--k", "4"]);
    let o = relkit(&["verify", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("1 replayed, 0 failed"));

    let tampered = edit(&report, |v| {
        let rel = v["outcomes"][0]["verdict"]["counterexample"]["assignment"][0]["relation"]
            .as_array_mut()
            .unwrap();
        rel.pop();
    });
    assert_eq!(code(&relkit(&["verify", tampered.to_str().unwrap()])), 1);

    let sides = edit(&report, |v| {
        let lhs = v["outcomes"][0]["verdict"]["counterexample"]["lhs"].as_array_mut().unwrap();
        lhs.pop();
    });
    assert_eq!(code(&relkit(&["verify", sides.to_str().unwrap()])), 1);

    let stale = edit(&report, |v| {
        v["algebras"][0]["fingerprint"] = Value::from("0".repeat(64));
    });
    let o = relkit(&["verify", stale.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stale algebra fingerprint"));
}

#[test]
fn verify_replays_term_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let report = save(dir.path(), "terms.json", &["find-terms", "baker4", "jonsson"]);
    assert_eq!(code(&relkit(&["verify", report.to_str().unwrap()])), 0);

    // x = z fails in every nontrivial algebra
    let broken = edit(&report, |v| {
        let cert = v["outcomes"][0]["system"]["certificate"].as_array_mut().unwrap();
        cert.push(Value::from("x = z"));
    });
    let o = relkit(&["verify", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("equation fails: x = z"));
}

#[test]
fn reports_are_deterministic_across_worker_counts() {
    let run = |jobs: &str| {
        relkit(&["--json", "--jobs", jobs, "check", "lattice_n5", "cdist2", "--theta", "tolerance"]).stdout
    };
    let a = run("1");
    assert_eq!(a, run("3"));
    let sampled = |jobs: &str| {
        relkit(&[
            "--jobs", jobs, "--json", "check", "z2cube", "maj3", "--strategy", "sampled", "--samples", "200", "--seed", "7",
        ])
        .stdout
    };
    assert_eq!(sampled("1"), sampled("4"));
}

#[test]
fn sampled_runs_never_exit_zero_without_opt_in() {
    let args = ["check", "lattice2", "cdist2", "--strategy", "sampled", "--samples", "50"];
    let (c, v) = json(&args);
    assert_eq!(c, 2);
    assert_eq!(first(&v)["verdict"]["status"], "no_counterexample");
    assert_eq!(first(&v)["verdict"]["coverage"]["kind"], "sampled");
    let mut opt = vec!["--allow-truncated"];
    opt.extend_from_slice(&args);
    assert_eq!(code(&relkit(&opt)), 0);
}

#[test]
fn caps_from_environment_and_flag() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_relkit"));
        cmd.env_remove("RELKIT_CAPS");
        if let Some(e) = env {
            cmd.env("RELKIT_CAPS", e);
        }
        cmd.args(extra).args(["--json", "check", "z2cube", "cdist3", "--k", "4"]);
        let o = cmd.output().unwrap();
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        (code(&o), v)
    };
    let (c, v) = run(Some("enum=3"), &[]);
    assert_eq!(c, 2);
    assert_eq!(first(&v)["verdict"]["coverage"]["kind"], "truncated");
    let (c, _) = run(Some("enum=3"), &["--caps", "enum=100000"]);
    assert_eq!(c, 1);

    let bad = relkit(&["--caps", "nonsense=1", "check", "lattice2", "cdist2"]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn errors_are_reported_with_positions() {
    let o = relkit(&["check", "lattice2", "adm:R ; <= adm:R"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error at 1:"), "{err}");

    let o = relkit(&["check", "lattice2", "cdist2", "--classes", "sigma=nope"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown class `nope`"));

    let o = relkit(&["check", "lattice2", "cdist2", "--classes", "rho=adm"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbound variable `rho`"));

    let o = relkit(&["check", "no_such_algebra", "cdist2"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&relkit(&["check"])), 3);
    assert_eq!(code(&relkit(&["--help"])), 0);
}

#[test]
fn algebra_files_load_by_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain3.json");
    // 3-element chain as a lattice
    let meet: Vec<usize> = (0..9).map(|i| (i / 3).min(i % 3)).collect();
    let join: Vec<usize> = (0..9).map(|i| (i / 3).max(i % 3)).collect();
    let doc = serde_json::json!({
        "size": 3,
        "ops": [
            {"name": "join", "arity": 2, "table": join},
            {"name": "meet", "arity": 2, "table": meet},
        ]
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let (c, v) = json(&["congruences", path.to_str().unwrap()]);
    assert_eq!(c, 0);
    // a chain's congruences are its partitions into intervals: 2^(n-1)
    assert_eq!(first(&v)["congruences"].as_array().unwrap().len(), 4);

    let report = save(dir.path(), "r.json", &["check", path.to_str().unwrap(), "arith3"]);
    assert_eq!(code(&relkit(&["verify", report.to_str().unwrap()])), 0);
}

#[test]
fn timing_is_opt_in() {
    let (_, v) = json(&["congruences", "lattice2"]);
    assert!(v.get("wall_time_ms").is_none());
    let (_, v) = json(&["--timing", "congruences", "lattice2"]);
    assert!(v["wall_time_ms"].is_u64());
    // flags that cannot change results are not echoed
    assert_eq!(v["command"], serde_json::json!(["congruences", "lattice2"]));
}

#[test]
fn mainp_preset_reports_observations() {
    let dir = tempfile::tempdir().unwrap();
    let report = save(
        dir.path(),
        "mainp.json",
        &["search-mainp", "--random", "2", "--max-size", "2", "--clone-cap", "100"],
    );
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["exit_code"], 0);
    let observations = v["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["kind"] == "observation")
        .count();
    // bundled algebras of size ≤ 2 plus the random ones
    let small = v["algebras"].as_array().unwrap().len();
    assert_eq!(observations, small);
    assert!(v["algebras"][small - 1]["inline"].is_object());
    assert_eq!(code(&relkit(&["verify", report.to_str().unwrap()])), 0);
}
