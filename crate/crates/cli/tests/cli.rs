//! End-to-end runs of the `tbs` binary.

use std::process::{Command, Output};

fn tbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_downsample_emits_jsonl() {
    let o = tbs(&["verify", "--suite", "downsample", "--seed", "1", "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0].get("config").is_some());
    assert!(lines[1..].iter().all(|v| v["pass"] == true));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[PASS] downsample/oracle"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tbs(&["--bogus"]).status.code(), Some(2));
    assert_eq!(tbs(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(tbs(&["simulate", "--lambda=-1"]).status.code(), Some(2));
    assert_eq!(tbs(&["simulate", "--batch", "poisson:3"]).status.code(), Some(2));
    assert_eq!(tbs(&["downsample-check", "--from", "2", "--to", "3"]).status.code(), Some(2));
}

#[test]
fn simulate_growth_is_reproducible_and_overflows_ttbs() {
    let args = ["simulate", "--algo", "ttbs,rtbs", "--batch", "grow:1.002", "--steps", "400", "--reps", "4", "--seed", "9"];
    let (a, b) = (tbs(&args), tbs(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "step,algo,sample_size,total_weight,seed");
    let last = |algo: &str| -> f64 {
        let row = text.lines().find(|l| l.starts_with(&format!("400,{algo},"))).unwrap();
        row.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!(last("ttbs") > 2000.0);
    assert_eq!(last("rtbs"), 1000.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli_out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cost.csv");
    let o = tbs(&["distsim", "--partitions", "4", "--steps", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("step,strategy,batch_size"));
    assert_eq!(text.lines().count(), 2 + 4 * 5);
    assert!(stdout(&o).contains("cent-kv-rj:"));
}

#[test]
fn ml_trace_columns() {
    let o = tbs(&["ml", "--task", "regression", "--n", "200", "--reps", "2", "--steps", "25", "--warmup", "10", "--policy", "rtbs,sw"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap(), "rep,step,policy,metric,value");
    assert_eq!(text.lines().count(), 2 + 2 * 2 * 25);
}

#[test]
fn downsample_check_and_bench_run() {
    let o = tbs(&["downsample-check", "--from", "2.4", "--to", "2.1", "--reps", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2,partial,0.35,"));
    let o = tbs(&["bench", "--steps", "50", "--algo", "rtbs,btbs"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
}
