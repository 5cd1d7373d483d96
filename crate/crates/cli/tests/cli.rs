use std::path::Path;
use std::process::{Command, Output};

fn alphamu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphamu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Values of one named CSV column, header excluded.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(at).unwrap().to_string()).collect()
}

fn floats(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn pdf_point_matches_the_reference_value() {
    let csv = stdout(&alphamu(&["pdf", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3", "--r", "2", "--tol", "1e-10"]));
    assert!(csv.starts_with("r,value,n_terms,bound\n"));
    assert!((floats(&csv, "value")[0] - 0.0621864).abs() < 1e-6);
    assert!(floats(&csv, "bound")[0] <= 1e-10);
}

#[test]
fn cdf_point_matches_the_tabulated_value() {
    let csv = stdout(&alphamu(&["cdf", "--alpha", "1.7", "--mu", "1", "--rhat", "3", "--L", "5", "--r", "3", "--tol", "1e-10"]));
    assert!((floats(&csv, "value")[0] - 0.00005).abs() < 5e-6);
}

#[test]
fn rayleigh_pair_reproduces_the_closed_form() {
    let csv = stdout(&alphamu(&["pdf", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "1", "--r", "1", "--tol", "1e-12"]));
    let exact = 2.0 * (-1.0f64).exp();
    assert!((floats(&csv, "value")[0] - exact).abs() < 1e-10);
    assert!((exact - 0.7357588823).abs() < 1e-10);
}

#[test]
fn accuracy_table_lists_six_rows_with_bounds_under_target() {
    let csv = stdout(&alphamu(&["accuracy-table", "--kind", "pdf"]));
    assert_eq!(
        csv.lines().next().unwrap(),
        "alpha,mu,rhat,L,r,value,n_terms,truncation_error,bound"
    );
    assert_eq!(csv.lines().count(), 7);
    assert!(floats(&csv, "bound").iter().all(|b| *b <= 1e-10));
    let err = floats(&csv, "truncation_error");
    let bound = floats(&csv, "bound");
    assert!(err.iter().zip(&bound).all(|(e, b)| e <= b));
    assert!((floats(&csv, "value")[3] - 0.02492).abs() < 5e-6);
}

#[test]
fn sweep_output_is_bit_stable() {
    let args = ["cdf", "--alpha", "1.2", "--mu", "0.5", "--rhat", "1", "--L", "3", "--r-min", "0.5", "--r-max", "3", "--points", "40"];
    let a = stdout(&alphamu(&args));
    let b = stdout(&alphamu(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 41);
    assert!(!a.contains('\r'));
    let rs = floats(&a, "r");
    assert_eq!(rs[0], 0.5);
    assert_eq!(rs[39], 3.0);
}

#[test]
fn json_output_carries_the_same_values() {
    let base = ["pdf", "--alpha", "1.5", "--mu", "0.7", "--rhat", "2", "--L", "4", "--r", "2"];
    let csv = stdout(&alphamu(&base));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&alphamu(&with_json))).unwrap();
    assert_eq!(json[0]["value"].as_f64().unwrap(), floats(&csv, "value")[0]);
    assert_eq!(json[0]["n_terms"].as_u64().unwrap(), column(&csv, "n_terms")[0].parse::<u64>().unwrap());
}

#[test]
fn egc_asymptote_has_diversity_two_and_tracks_the_exact_rate() {
    let csv = stdout(&alphamu(&[
        "aser", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "2", "--combiner", "egc",
        "--snr-db-min", "40", "--snr-db-max", "40", "--asymptotic",
    ]));
    assert!((floats(&csv, "diversity_gain")[0] - 2.0).abs() < 1e-12);
    let (exact, asym) = (floats(&csv, "exact")[0], floats(&csv, "asymptotic")[0]);
    assert!((asym / exact - 1.0).abs() < 0.02);
}

#[test]
fn asymptotic_column_is_empty_unless_requested() {
    let csv = stdout(&alphamu(&[
        "aser", "--alpha", "1.2", "--mu", "1", "--rhat", "2", "--L", "3", "--combiner", "mrc", "--snr-db-max", "4",
    ]));
    assert!(column(&csv, "asymptotic").iter().all(String::is_empty));
    assert_eq!(floats(&csv, "snr_db"), vec![0.0, 2.0, 4.0]);
}

#[test]
fn modulation_constant_accepts_numbers_and_names() {
    let run = |g: &str| {
        stdout(&alphamu(&[
            "aser", "--alpha", "1.2", "--mu", "1", "--rhat", "2", "--L", "3", "--combiner", "egc",
            "--snr-db-min", "10", "--snr-db-max", "10", "--G", g,
        ]))
    };
    assert_eq!(run("0.715"), run("min-correlation-bpsk"));
    assert_ne!(run("0.715"), run("bpsk"));
    assert_eq!(code(&alphamu(&["aser", "--alpha", "1", "--mu", "1", "--rhat", "1", "--L", "2", "--combiner", "egc", "--G", "qpsk"])), 2);
}

#[test]
fn outage_preset_meets_its_asymptote_at_high_snr() {
    let csv = stdout(&alphamu(&["op", "--preset", "fig10", "--snr-db-min", "45", "--snr-db-max", "45", "--asymptotic"]));
    assert!(csv.starts_with("alpha,mu,rhat,L,combiner,snr_db,exact,asymptotic,diversity_gain,coding_gain\n"));
    assert_eq!(csv.lines().count(), 9);
    for (e, a) in floats(&csv, "exact").iter().zip(floats(&csv, "asymptotic")) {
        assert!((a / e - 1.0).abs() < 0.02, "exact {e} asymptote {a}");
    }
}

#[test]
fn density_preset_prefixes_curve_parameters() {
    let csv = stdout(&alphamu(&["pdf", "--preset", "fig3", "--points", "5"]));
    assert!(csv.starts_with("alpha,mu,rhat,L,r,value,n_terms,bound\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 5);
    assert_eq!(code(&alphamu(&["pdf", "--preset", "fig4"])), 2);
}

#[test]
fn domain_and_usage_errors_exit_with_two() {
    let bad_alpha = alphamu(&["pdf", "--alpha", "-1", "--mu", "1", "--rhat", "1", "--L", "2", "--r", "1"]);
    assert_eq!(code(&bad_alpha), 2);
    assert!(bad_alpha.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad_alpha.stderr).contains("alpha"));
    assert_eq!(code(&alphamu(&["pdf", "--alpha", "1", "--mu", "1", "--rhat", "1", "--L", "0", "--r", "1"])), 2);
    assert_eq!(code(&alphamu(&["pdf", "--alpha", "1", "--mu", "1", "--rhat", "1", "--r", "1"])), 2);
    assert_eq!(code(&alphamu(&["op", "--alpha", "1", "--mu", "1", "--rhat", "1", "--L", "2", "--combiner", "egc"])), 2);
    assert_eq!(code(&alphamu(&["cdf", "--bogus"])), 2);
}

#[test]
fn unreachable_accuracy_exits_with_three() {
    let out = alphamu(&["pdf", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3", "--r", "2", "--tol", "1e-14", "--nt-max", "3"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("sweep.csv");
    let out = alphamu(&[
        "pdf", "--alpha", "1", "--mu", "1", "--rhat", "1", "--L", "2", "--r-min", "-1", "--r-max", "2",
        "--output", target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    // Fails inside the sweep, after evaluation has started.
    let out = alphamu(&[
        "pdf", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3", "--r-min", "0.5", "--r-max", "3",
        "--tol", "1e-14", "--nt-max", "3", "--output", target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn output_file_holds_exactly_the_stdout_text() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("point.csv");
    let args = ["pdf", "--alpha", "1", "--mu", "1", "--rhat", "1", "--L", "2", "--r", "1"];
    let printed = stdout(&alphamu(&args));
    let mut to_file = args.to_vec();
    to_file.extend(["--output", target.to_str().unwrap()]);
    let out = alphamu(&to_file);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&target).unwrap(), printed);
}

fn write_config(dir: &Path, text: &str) -> String {
    let file = dir.join("run.cfg");
    std::fs::write(&file, text).unwrap();
    file.to_str().unwrap().to_string()
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# accuracy row 1\nalpha=0.8\nmu=0.2\nrhat=5\nL=3\nr=2\ntol=1e-10\n");
    let from_file = stdout(&alphamu(&["pdf", "--config", &cfg]));
    let direct = stdout(&alphamu(&["pdf", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3", "--r", "2", "--tol", "1e-10"]));
    assert_eq!(from_file, direct);

    let overridden = stdout(&alphamu(&["pdf", "--config", &cfg, "--r", "3"]));
    assert_eq!(floats(&overridden, "r"), vec![3.0]);

    let broken = write_config(dir.path(), "alpha 0.8\n");
    assert_eq!(code(&alphamu(&["pdf", "--config", &broken])), 2);
    assert_eq!(code(&alphamu(&["pdf", "--config", "/nonexistent/run.cfg"])), 1);
}

#[test]
fn validate_reports_are_deterministic_and_pass_on_a_resolved_grid() {
    let args = ["validate", "--alpha", "1.5", "--mu", "1", "--rhat", "1", "--L", "2", "--samples", "100000", "--grid", "4096", "--seed", "7"];
    let a = stdout(&alphamu(&args));
    assert_eq!(a, stdout(&alphamu(&args)));
    assert!(a.starts_with("check,points,max_diff,tolerance,pass\n"));
    assert!(column(&a, "pass").iter().all(|p| p == "pass"));
}

#[test]
fn validate_failure_exits_with_four_after_writing_the_report() {
    // At 4096 cells the lattice cannot resolve the α = 0.5 density to 1e-6.
    let out = alphamu(&["validate", "--samples", "20000", "--grid", "4096"]);
    assert_eq!(code(&out), 4);
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&report, "pass")[0], "fail");
}

#[test]
fn coarse_validation_grid_exits_with_three() {
    assert_eq!(code(&alphamu(&["validate", "--grid", "16"])), 3);
}

#[test]
fn bench_times_both_kinds_per_branch_count() {
    let csv = stdout(&alphamu(&["bench", "--L-list", "2,10", "--points", "10", "--reps", "2"]));
    assert!(csv.starts_with("L,kind,points,mean_terms,min_seconds,max_seconds,per_point_us\n"));
    assert_eq!(column(&csv, "L"), vec!["2", "2", "10", "10"]);
    assert_eq!(column(&csv, "kind"), vec!["pdf", "cdf", "pdf", "cdf"]);
    let (min, max) = (floats(&csv, "min_seconds"), floats(&csv, "max_seconds"));
    assert!(min.iter().zip(&max).all(|(a, b)| 0.0 < *a && a <= b));
}
