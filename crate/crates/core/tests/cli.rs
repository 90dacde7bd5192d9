use std::path::Path;
use std::process::{Command, Output};

use cmcp_core::cli::{config, files::read_front, CompareReport};
use cmcp_core::{total_objectives, validate_solution, Allocation, CompositeSolution};

fn cmcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcp")).args(args).output().expect("binary runs")
}

fn write_clothing(dir: &Path) -> String {
    let path = dir.join("clothing.json");
    std::fs::write(&path, config::write_config(&config::clothing())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_reproducible_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_clothing(tmp.path());
    let out = tmp.path().join("out");
    let res = cmcp(&["run", "--config", &cfg, "--iterations", "30", "--seed", "2", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let front = read_front(&out.join("pdga_limit0_seed2.front.json")).unwrap();
    assert!(!front.solutions.is_empty());
    let c = config::clothing();
    for row in &front.solutions {
        let s = CompositeSolution::new(row.allocations.iter().cloned().map(Allocation::new).collect());
        validate_solution(&s, &c.task, &c.order).unwrap();
        let o = total_objectives(&s, &c.task).unwrap();
        assert_eq!((o.time_total, o.cost_total, o.num_total), (row.time_total, row.cost_total, row.num_total));
    }
    let csv = std::fs::read_to_string(out.join("pdga_limit0_seed2.front.csv")).unwrap();
    assert!(csv.starts_with("time_total,cost_total,num_total,allocations\n"));
    assert_eq!(csv.lines().count(), front.solutions.len() + 1);
    assert!(out.join("pdga_limit0_seed2.summary.json").exists());
}

#[test]
fn compare_against_itself_and_a_weaker_front() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_clothing(tmp.path());
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    assert!(cmcp(&["run", "--config", &cfg, "--iterations", "40", "--seed", "1", "--out", o]).status.success());
    assert!(cmcp(&["run", "--config", &cfg, "--algorithm", "nsga2", "--iterations", "1", "--pop-size", "4", "--seed", "1", "--out", o])
        .status
        .success());
    let a = out.join("pdga_limit0_seed1.front.json");
    let b = out.join("nsga2_seed1.front.json");

    let res = cmcp(&["compare", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(res.status.success());
    let same: CompareReport = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!((same.a_dominated_by_b, same.b_dominated_by_a), (0, 0));
    assert_eq!(same.a, same.b);

    let report = tmp.path().join("report.json");
    let res = cmcp(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(res.status.success());
    let r: CompareReport = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r.a.size, read_front(&a).unwrap().solutions.len());
    assert_eq!(r.b.size, read_front(&b).unwrap().solutions.len());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    assert_eq!(cmcp(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(4));

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(cmcp(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let mut c = config::clothing();
    c.task.subtasks[0].services.iter_mut().for_each(|s| s.max_uses = Some(10));
    let capped = tmp.path().join("capped.json");
    std::fs::write(&capped, config::write_config(&c)).unwrap();
    let res = cmcp(&["run", "--config", capped.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("ST1"));

    let cfg = write_clothing(tmp.path());
    assert_eq!(cmcp(&["run", "--config", &cfg, "--pop-size", "1"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_fourteen_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_clothing(tmp.path());
    let out = tmp.path().join("sweep");
    let res = cmcp(&["sweep", "--config", &cfg, "--pop-size", "8", "--seed", "0", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = std::fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 15);
    let runs = std::fs::read_to_string(out.join("sweep_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 14 * 2);
    assert!(out.join("exec01/nsga2_seed0.front.json").exists());
    assert!(out.join("exec14/pdga_limit46000_seed1.front.json").exists());
}
