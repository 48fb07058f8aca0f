use std::fs;
use std::process::{Command, Output};

fn softgrand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softgrand")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn calibrate_writes_csv_to_stdout() {
    let out = softgrand(&[
        "calibrate",
        "-n",
        "24",
        "-k",
        "18",
        "--ebn0",
        "3",
        "-t",
        "500",
        "--bins",
        "5",
        "--min-bin-count",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ebn0_db,estimator,L,bin_lo,bin_hi,mean_predicted,empirical_error,count"));
    let total: u64 = lines.map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 500);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let csv = dir.path().join("out.csv");
    fs::write(
        &cfg,
        "[code]\nfamily = \"crc\"\nn = 32\nk = 24\npoly = 0x107\n\n[channel]\nebn0_db = [3.0]\n\n\
         [experiment]\nkind = \"erasure\"\ntrials = 100\nepsilons = [0.1]\n",
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let out = softgrand(&["erasure", "-c", cfg_s, "-t", "300", "--detection-baseline", "-o", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.ends_with(",300") || l.starts_with("ebn0_db")));
    assert!(text.contains(",detect,"));

    let shown = softgrand(&["show-config", "erasure", "-c", cfg_s, "--ebn0", "-1,2.5", "-L", "3"]);
    let shown = stdout(&shown);
    assert!(shown.contains("ebn0_db = [-1.0, 2.5]"), "{shown}");
    assert!(shown.contains("list_size = 3"));
    assert!(shown.contains("family = \"crc\""));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!softgrand(&["erasure", "--epsilons", "1.5", "-t", "10"]).status.success());
    assert!(!softgrand(&["calibrate", "-c", "/nonexistent/exp.toml"]).status.success());
    assert!(!softgrand(&["calibrate", "--estimators", "psychic"]).status.success());
    assert!(!softgrand(&["calibrate", "--family", "ebch", "-k", "56", "-t", "10"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing-dir").join("x.csv");
    assert!(!softgrand(&["erasure", "-t", "10", "-o", out.to_str().unwrap()]).status.success());
}
