use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coulombflow"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn coulombflow")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn read_report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn simulate_demo_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("nested/demo");
    let o = run(&["simulate", "--config", &cfg("cosine_m1_demo.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let obs = std::fs::read_to_string(out.join("observables.csv")).unwrap();
    let mut lines = obs.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,min,max,l1,l2,linf,energy,dissipation,grad_sup");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0.0000000000000000e0");
    assert!(first[1].starts_with("1.0000000000000"), "{}", first[1]);
    for t in ["0.000000", "0.100000", "0.200000", "0.300000", "0.400000", "0.500000"] {
        assert!(out.join(format!("u_{t}.csv")).exists(), "u_{t}.csv");
        let k = std::fs::read_to_string(out.join(format!("k_{t}.csv"))).unwrap();
        assert_eq!(k.lines().next().unwrap(), "s,u_star,k");
        assert_eq!(k.lines().count(), 129);
    }
    let support = std::fs::read_to_string(out.join("support.csv")).unwrap();
    assert_eq!(support.lines().count(), 7);
    for svg in ["observables.svg", "k.svg", "u.svg"] {
        assert!(std::fs::read_to_string(out.join(svg)).unwrap().starts_with("<svg"));
    }
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(threads);
        let o = bin()
            .args(["simulate", "--config", &cfg("block_m2_2d.toml"), "--out", out.to_str().unwrap()])
            .env("COULOMBFLOW_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let mut names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        let files: Vec<(std::ffi::OsString, Vec<u8>)> =
            names.into_iter().map(|n| (n.clone(), std::fs::read(out.join(&n)).unwrap())).collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let u = String::from_utf8(outputs[0].iter().find(|f| f.0 == "u_0.000000.csv").unwrap().1.clone()).unwrap();
    assert_eq!(u.lines().next().unwrap(), "x,y,value");
    assert_eq!(u.lines().count(), 64 * 64 + 1);
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["simulate", "--config", &cfg("cosine_m1_demo.toml"), "--out", tmp.path().to_str().unwrap()])
        .env("COULOMBFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("COULOMBFLOW_THREADS"));
}

#[test]
fn unknown_key_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("cosine_m1_demo.toml")).unwrap().replace("cfl = 0.45", "cfl = 0.45\ncourant = 1");
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["simulate", "--config", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("courant"), "{}", stderr(&o));
}

#[test]
fn invalid_value_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("cosine_m1_demo.toml")).unwrap().replace("amplitude = 0.5", "amplitude = 1.5");
    let path = tmp.path().join("neg.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["simulate", "--config", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("initial_condition.profile"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = run(&["simulate", "--config", &cfg("cosine_m1_demo.toml"), "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not a directory"));
}

#[test]
fn missing_subcommand_arguments_exit_2() {
    assert_eq!(code(&run(&["simulate"])), 2);
    assert_eq!(code(&run(&["fronts", "--mode", "triple", "--config", "x"])), 2);
}

#[test]
fn fronts_all_modes() {
    let tmp = tempfile::tempdir().unwrap();
    for (mode, header) in [
        ("single", "t,S1,S2,T_star_flag"),
        ("double", "t,S1,S2,S3,S4,T_star_flag"),
        ("super", "t,S1,S2,S3,T_star_flag"),
    ] {
        let out = tmp.path().join(mode);
        let o = run(&["fronts", "--mode", mode, "--config", &cfg("fronts.toml"), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        let csv = std::fs::read_to_string(out.join("fronts.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), header);
        assert_eq!(csv.lines().count(), 202);
        assert!(out.join("fronts.svg").exists());
    }
    // The supersolution front reaches S1 before t_end; later rows carry the flag.
    let csv = std::fs::read_to_string(tmp.path().join("super/fronts.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with(",1.0000000000000000e0"), "{last}");
    let s1: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(s1.iter().all(|v| *v == s1[0]));
}

#[test]
fn fronts_hypothesis_violation_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("fronts.toml")).unwrap().replace("c = 0.5", "c = 1.5");
    let path = tmp.path().join("f.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["fronts", "--mode", "super", "--config", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fronts.super"), "{}", stderr(&o));
}

#[test]
fn verify_small_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--config", &cfg("suite_small.toml"), "--out", tmp.path().to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(tmp.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["summary"]["fail"], 0);
    assert!(r["summary"]["total"].as_u64().unwrap() > 40);
    assert!(r["input_hash"].as_str().unwrap().starts_with("sha256:"));
    let ids: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["check_id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"m2/subsolution"));
    assert!(ids.contains(&"m2-jump/no_waiting_time"));
    assert!(ids.contains(&"m0.5/fast_diffusion_lower"));
}

#[test]
fn verify_report_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    for jobs in ["1", "4"] {
        let out = tmp.path().join(jobs);
        let o = run(&["verify", "--config", &cfg("suite_small.toml"), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(code(&o), 0);
        let r = read_report(&out);
        checks.push((r["checks"].clone(), r["input_hash"].clone()));
    }
    assert_eq!(checks[0], checks[1]);
}

#[test]
fn corrupted_fixture_fails_mass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--config", &cfg("suite_corrupted.toml"), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r = read_report(tmp.path());
    let failed: Vec<&serde_json::Value> = r["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["check_id"], "m2-leak/mass");
    assert_eq!(failed[0]["anchor"], "existence.mass_conservation");
}

#[test]
fn empty_suite_warns_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--config", &cfg("suite_empty.toml"), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = read_report(tmp.path());
    assert_eq!(r["summary"]["total"], 0);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn waiting_time_on_linear_mobility_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("suite_small.toml"))
        .unwrap()
        .replace("solver = { m = 2.0, epsilon = 0.0", "solver = { m = 1.0, epsilon = 0.0");
    let path = tmp.path().join("s.toml");
    std::fs::write(&path, text).unwrap();
    let o = run(&["verify", "--config", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("waiting_time"), "{}", stderr(&o));
}

#[test]
fn plot_columns_and_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("d.csv");
    std::fs::write(&csv, "t,a,b\n0,1,2\n1,2,3\n").unwrap();
    let svg = tmp.path().join("d.svg");
    let o = run(&["plot", "--in", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--x", "t", "--y", "a,b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = std::fs::read(&svg).unwrap();
    run(&["plot", "--in", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--x", "t", "--y", "a,b"]);
    assert_eq!(first, std::fs::read(&svg).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().matches("<polyline").count(), 2);

    let o = run(&["plot", "--in", csv.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--x", "t", "--y", "zz"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("zz"));

    let empty = tmp.path().join("e.csv");
    std::fs::write(&empty, "t,a\n").unwrap();
    let o = run(&["plot", "--in", empty.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--x", "t", "--y", "a"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no data rows"));
}
