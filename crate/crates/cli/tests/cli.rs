use std::process::{Command, Output};

fn lp_ldp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lp-ldp")).args(args).env_remove("LP_LDP_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("lp-ldp-cli-{}-{name}", std::process::id()))
}

#[test]
fn rate_csv_has_schema_line_and_full_precision() {
    let o = lp_ldp(&["rate", "--p", "2", "--kind", "j2", "--w", "0:0.9:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# schema: lp-ldp/rate-csv/1");
    assert_eq!(lines.next().unwrap(), "w,value,kind,p,speed");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    // 17 significant digits: one before the point, sixteen after
    let mantissa = rows[5][1].split('e').next().unwrap();
    assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16, "{}", rows[5][1]);
    let w: f64 = rows[5][0].parse().unwrap();
    let j2 = -0.5 * (1.0 - w * w).ln();
    assert!((rows[5][1].parse::<f64>().unwrap() - j2).abs() < 1e-12);
}

#[test]
fn rate_json_reports_infinite_values_as_text() {
    let o = lp_ldp(&["rate", "--p", "inf", "--kind", "quenched", "--w", "0.5,0.85", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "lp-ldp/rate-json/1");
    let curve = &v["curves"][0];
    let text = curve.to_string();
    assert!(text.contains("\"inf\""), "{text}");
}

#[test]
fn mixed_speeds_are_refused_unless_allowed() {
    let args = ["rate", "--p", "1.5", "--kind", "annealed", "--kind", "quenched", "--w", "0.1"];
    let o = lp_ldp(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
    let mut allowed = args.to_vec();
    allowed.push("--allow-mixed-speed");
    assert_eq!(lp_ldp(&allowed).status.code(), Some(0));
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        vec!["rate", "--p", "2", "--kind", "nonsense"],
        vec!["rate", "--p", "0.5", "--kind", "annealed"],
        vec!["rate", "--p", "2", "--kind", "j2", "--w", "1:0:0.1"],
        vec!["mc", "--n", "0"],
        vec!["mc", "--n", "100", "--gc", "--dir", "random"],
        vec!["--threads", "0", "selftest", "--list"],
        vec!["frobnicate"],
    ] {
        let o = lp_ldp(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("lp-ldp: invalid input"), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let o = lp_ldp(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selftest"));
}

#[test]
fn mc_is_reproducible_across_thread_counts() {
    let base = ["mc", "--p", "2", "--dir", "e1", "--n", "50,100", "--w", "0.3", "--reps", "2e4", "--seed", "7"];
    let run = |threads: &str| {
        let mut a = base.to_vec();
        a.extend(["--threads", threads]);
        let o = lp_ldp(&a);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let lines: Vec<serde_json::Value> = one.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l["schema"], "lp-ldp/mc-jsonl/1");
        assert_eq!(l["reps"], 20000);
    }
    let mut other = base.to_vec();
    let last = other.len() - 1;
    other[last] = "8";
    assert_ne!(stdout(&lp_ldp(&other)), one);
}

#[test]
fn threads_fall_back_to_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_lp-ldp")).args(["selftest", "--list"]).env("LP_LDP_THREADS", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_lp-ldp")).args(["selftest", "--list"]).env("LP_LDP_THREADS", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_entries_yield_to_flags() {
    let path = tmp("config");
    std::fs::write(&path, "# rate defaults\np = 4\nkind = quenched, cramer\nw = 0.1,0.2\n").unwrap();
    let p = path.to_str().unwrap();
    let from_config = stdout(&lp_ldp(&["rate", "--config", p]));
    let overridden = lp_ldp(&["rate", "--config", p, "--p", "2", "--kind", "j2"]);
    std::fs::remove_file(&path).unwrap();
    let rows: Vec<&str> = from_config.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",4,n")), "{rows:?}");
    assert!(rows.iter().any(|r| r.contains(",cramer,")));
    let text = stdout(&overridden);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",j2,2,")), "{rows:?}");
}

#[test]
fn output_flag_writes_a_file() {
    let path = tmp("rate.csv");
    let o = lp_ldp(&["rate", "--p", "2", "--kind", "cramer", "--w", "0.2", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.starts_with("# schema: lp-ldp/rate-csv/1"));
}

#[test]
fn selftest_subset_and_fault_injection() {
    let o = lp_ldp(&["selftest", "--only", "p2-equalities,quadrature-preflight"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS] p2-equalities") && text.contains("[PASS] quadrature-preflight"), "{text}");
    assert!(text.contains("2/2 checks passed"));

    let o = lp_ldp(&["selftest", "--only", "quadrature-preflight", "--corrupt-quadrature", "1.001"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("[FAIL] quadrature-preflight"));

    assert_eq!(lp_ldp(&["selftest", "--only", "bogus"]).status.code(), Some(1));
}

#[test]
fn selftest_json_lines_parse() {
    let o = lp_ldp(&["selftest", "--only", "p2-equalities", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let first: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["passed"], true);
}

#[test]
fn variational_p2_matches_j2() {
    let o = lp_ldp(&["variational", "--p", "2", "--w", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "lp-ldp/variational-json/1");
    let value = v["solution"]["value"].as_f64().unwrap();
    assert!((value - (-0.5 * 0.75f64.ln())).abs() < 2e-3, "{value}");
}
