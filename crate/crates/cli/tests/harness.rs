use std::f64::consts::PI;
use std::path::Path;
use std::process::Command as Proc;

use magcount::counting::CountReport;
use magcount::potential::TheoremId;
use magcount::PotentialProfile;
use magcount_cli::{compare, csv_tables, parse_config, run, scaled_bound, write_outputs, Command, HarnessError, RunConfig, RunResult};

const BIN: &str = env!("CARGO_BIN_EXE_magcount");

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfg(text: &str) -> RunConfig {
    parse_config(text, &[]).unwrap()
}

const DISK_HALF_FLUX: &str = r#"
[field]
kind = "step"
b0 = 1.0
radius = 1.0

[potential]
radial = { kind = "indicator-disk", radius = 1.0 }
"#;

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let c = parse_config(&text, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(path.file_stem().unwrap().to_str().unwrap(), c.command.name());
    }
}

#[test]
fn count_at_zero_coupling() {
    let c = cfg(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"count\"\nlambda = 0.0\n"));
    let r = run(&c).unwrap();
    assert!(r.converged);
    match r.result {
        RunResult::Count { report, .. } => assert_eq!(report.total, 0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let err = parse_config(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"count\"\nlambda = 1.0\n[solver.grid]\nbase_cels = 3\n"), &[]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("solver.grid") && msg.contains("base_cels"), "{msg}");
    let err = parse_config(&format!("{DISK_HALF_FLUX}\nextra = 1\n[command]\nname = \"count\"\nlambda = 1.0\n"), &[]).unwrap_err();
    assert!(err.to_string().contains("extra"));
}

#[test]
fn overrides_reach_nested_keys() {
    let c = parse_config(
        &format!("{DISK_HALF_FLUX}\n[command]\nname = \"count\"\nlambda = 1.0\n"),
        &["command.lambda=7.5".into(), "solver.domain.variable=log".into(), "solver.grid.base_cells=64".into()],
    )
    .unwrap();
    assert!(matches!(c.command, Command::Count { lambda, .. } if lambda == 7.5));
    assert_eq!(c.solver.grid.base_cells, 64);
    assert!(parse_config(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"count\"\nlambda = 1.0\n"), &["solver.domain.r_min=2.0".into()]).is_err());
}

#[test]
fn bounds_on_indicator_report_both_norms() {
    let c = cfg(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"bounds\"\ntheorems = [{{ theorem = \"clr-radial\" }}]\n"));
    let r = run(&c).unwrap();
    let json: serde_json::Value = serde_json::to_value(&r).unwrap();
    let comps = &json["result"]["reports"][0]["components"];
    assert!((comps[0][1].as_f64().unwrap() - PI / 2.0).abs() < 1e-6);
    assert!((comps[1][1].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn scan_csv_carries_n_over_lambda() {
    let c = cfg(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"scan\"\nlambdas = [10.0, 20.0]\n"));
    let r = run(&c).unwrap();
    let tables = csv_tables(&r);
    let (_, scan) = tables.iter().find(|(n, _)| n == "scan").unwrap();
    let mut rd = csv::Reader::from_reader(scan.as_bytes());
    let header = rd.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "n_over_lambda").unwrap();
    for rec in rd.records() {
        let rec = rec.unwrap();
        let lambda: f64 = rec[0].parse().unwrap();
        let total: f64 = rec[3].parse().unwrap();
        let ratio: f64 = rec[col].parse().unwrap();
        assert!((ratio - total / lambda).abs() < 1e-12);
    }
}

#[test]
fn embedded_config_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let c = parse_config(&std::fs::read_to_string(configs().join("count.toml")).unwrap(), &[format!("output.dir={:?}", dir.path().display().to_string())]).unwrap();
    let first = run(&c).unwrap();
    write_outputs(&first).unwrap();
    let json = std::fs::read_to_string(dir.path().join("run.json")).unwrap();
    let tree: serde_json::Value = serde_json::from_str(&json).unwrap();
    let back: RunConfig = serde_json::from_value(tree["config"].clone()).unwrap();
    assert_eq!(back, c);
    let second = run(&back).unwrap();
    assert_eq!(csv_tables(&first), csv_tables(&second));
}

fn report(lambda: f64, total: u64) -> CountReport {
    let c = cfg(&format!("{DISK_HALF_FLUX}\n[command]\nname = \"count\"\nlambda = 0.0\n[solver]\nfixed_domain = 0\n"));
    let RunResult::Count { mut report, .. } = run(&c).unwrap().result else { unreachable!() };
    report.lambda = lambda;
    report.total = total;
    report
}

#[test]
fn compare_ratios_and_provenance() {
    let v = PotentialProfile::indicator_disk(1.0).unwrap();
    let b = vec![scaled_bound(TheoremId::Weyl, &v, 8.0).unwrap(), scaled_bound(TheoremId::Weyl, &v, 16.0).unwrap()];
    let rows = compare(&[report(8.0, 0), report(16.0, 4)], &b).unwrap();
    assert_eq!(rows[0].ratio, Some(0.0));
    assert!((rows[1].ratio.unwrap() - 1.0).abs() < 1e-9);
    assert!(matches!(compare(&[report(8.0, 0), report(17.0, 4)], &b), Err(HarnessError::Provenance(_))));
}

fn exe(args: &[&str]) -> (i32, String) {
    let out = Proc::new(BIN).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let count = configs().join("count.toml");
    let count = count.to_str().unwrap();
    let (code, text) = exe(&["count", "--config", count, "--out", out, "--seed", "3"]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("run_channels.csv").exists());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 3);
    assert_eq!(json["result"]["oracle"]["seed"], 3);

    let (code, text) = exe(&["count", "--config", count, "--out", out, "--budget", "0"]);
    assert_eq!(code, 2, "{text}");
    let (code, _) = exe(&["scan", "--config", count, "--out", out]);
    assert_eq!(code, 1);
    let (code, text) = exe(&["count", "--config", count, "--out", out, "--override", "command.lambda=-1"]);
    assert_eq!(code, 1, "{text}");
}
