use mixmorrey::certify::{build_corpus, certify_inequality, CertifyParams, CorpusConfig, InequalityReport, Verdict};
use mixmorrey::cli::emit::REPORT_COLUMNS;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixmorrey"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MIXMORREY_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn norm_job_reports_the_indicator_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("def22_norm.toml");
    let o = run(&["norm", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let csv = std::fs::read_to_string(dir.path().join("def22_norm.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    let value: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    let exact = 2.0 * 2f64.sqrt();
    assert!((value - exact).abs() / exact < 0.01, "{value}");
}

#[test]
fn certify_lemma_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("lem81_certify.toml");
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("lem81_certify_lem81.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), REPORT_COLUMNS.join(","));
    assert!(lines.all(|l| l.ends_with(",pass")));
}

#[test]
fn missing_theta_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = std::fs::read_to_string(config("def22_norm.toml")).unwrap().replace("theta = 2.0\n", "");
    let cfg = write_config(dir.path(), "no_theta.toml", &body);
    let o = run(&["norm", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("norm.theta"), "{}", stderr(&o));
    assert!(!dir.path().join("no_theta.csv").exists());
}

#[test]
fn unreadable_and_malformed_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let o = run(&["norm", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let cfg = write_config(dir.path(), "typo.toml", "[grid]\ndim = 1\nhalf_widht = 3.0\n");
    let o = run(&["norm", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&["norm", "--config", cfg.to_str().unwrap(), "--format", "xml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unmet_hypotheses_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let body = "kind = \"certify\"\n[grid]\ndim = 1\n[certify]\ninequalities = [\"eq5\"]\n[certify.params]\nlambda = 0.75\n";
    let cfg = write_config(dir.path(), "critical.toml", body);
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("certify.params"), "{}", stderr(&o));
}

#[test]
fn failing_verdict_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = "kind = \"certify\"\nresolutions = [129, 257]\n[grid]\ndim = 1\n[certify]\ninequalities = [\"thm41i\"]\n";
    let cfg = write_config(dir.path(), "pairing.toml", body);
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("thm41i: fail"));
}

#[test]
fn reruns_are_byte_identical_and_rows_cover_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("lem81_certify.toml");
    let args = ["certify", "--config", cfg.to_str().unwrap(), "--resolutions", "129,257", "--seed", "7"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&args, &a).status.code(), Some(0));
    assert_eq!(run(&args, &b).status.code(), Some(0));
    for name in ["lem81_certify_lem81.csv", "lem81_certify_thm81.csv"] {
        let first = std::fs::read(a.join(name)).unwrap();
        assert_eq!(first, std::fs::read(b.join(name)).unwrap(), "{name}");
        let p = CertifyParams::default().p_for(1).unwrap();
        let mut corpus_cfg = CorpusConfig::standard(1, &p);
        corpus_cfg.seed = 7;
        let size = build_corpus(&corpus_cfg).unwrap().len();
        assert_eq!(String::from_utf8(first).unwrap().lines().count(), 1 + size * 2);
    }
}

#[test]
fn json_report_round_trips_to_the_library_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("lem81_certify.toml");
    let o = run(&["certify", "--config", cfg.to_str().unwrap(), "--format", "json", "--resolutions", "129,257"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("lem81_certify_lem81.json")).unwrap();
    let parsed: InequalityReport = serde_json::from_str(&text).unwrap();
    let params = CertifyParams::default();
    let corpus = build_corpus(&CorpusConfig::standard(1, &params.p_for(1).unwrap())).unwrap();
    let direct = certify_inequality("lem81", &params, &corpus, &[129, 257]).unwrap();
    assert_eq!(parsed, direct);
    assert_eq!(parsed.verdict, Verdict::Pass);
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("indicator_sweep.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_mixmorrey"))
        .args(["sweep", "--config", cfg.to_str().unwrap()])
        .env("MIXMORREY_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("indicator_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn other_subcommands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file, stem) in [("op", "maximal_op.toml", "maximal_op"), ("decompose", "gaussian_atoms.toml", "gaussian_atoms")] {
        let cfg = config(file);
        let o = run(&[cmd, "--config", cfg.to_str().unwrap(), "--format", "json"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = std::fs::read_to_string(dir.path().join(format!("{stem}.json"))).unwrap();
        let _: serde_json::Value = serde_json::from_str(&text).unwrap();
    }
    let cfg = config("maximal_op.toml");
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kind"));
}
