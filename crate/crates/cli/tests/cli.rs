use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hidden-agenda"))
}

fn json_lines(out: &[u8]) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

#[test]
fn run_analyze_timeline_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--roster", "mixed", "--episodes", "4", "--first-seed", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out.stdout);
    assert_eq!(lines.len(), 5);
    assert!(lines[..4].iter().all(|l| l["record"] == "episode"));
    assert_eq!(lines[4]["record"], "summary");
    assert_eq!(lines[4]["episodes"], 4);

    let pattern = dir.path().join("*.json").display().to_string();
    let out = bin().args(["replay-verify", &pattern]).output().unwrap();
    assert!(out.status.success());
    let lines = json_lines(&out.stdout);
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l["ok"] == true));

    let table = dir.path().join("table.jsonl");
    let out = bin().args(["analyze", &pattern, "--table"]).arg(&table).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("4 episodes") && report.contains("vote similarity"));
    let lines = json_lines(&std::fs::read(&table).unwrap());
    assert_eq!(lines[0]["record"], "histogram");
    assert_eq!(lines[1]["record"], "pair_matrices");

    let replay = dir.path().join("episode-10.json");
    let png = dir.path().join("round.png");
    let out = bin().arg("timeline").arg(&replay).arg("--png").arg(&png).output().unwrap();
    if out.status.success() {
        let table = String::from_utf8_lossy(&out.stdout);
        assert!(table.starts_with("step p0 p1 p2 p3 p4"));
        assert!(std::fs::metadata(&png).unwrap().len() > 0);
    } else {
        assert!(String::from_utf8_lossy(&out.stderr).contains("voting round"));
    }
}

#[test]
fn tampered_replay_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["run", "--roster", "random", "--episodes", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
    let path = dir.path().join("episode-0.json");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    let out = bin().arg("replay-verify").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(json_lines(&out.stdout)[0]["ok"], false);
}

#[test]
fn throughput_and_bad_inputs() {
    let out = bin()
        .args(["throughput", "--roster", "random", "--steps", "2000", "--mode", "rgb"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let l = &json_lines(&out.stdout)[0];
    assert_eq!(l["record"], "throughput");
    assert!(l["report"]["env_steps"].as_u64().unwrap() >= 2000);

    let bad = bin().args(["run", "--roster", "nobody"]).output().unwrap();
    assert!(!bad.status.success());
    let bad = bin().args(["run", "--set", "fuel_goal=0", "--episodes", "1"]).output().unwrap();
    assert!(!bad.status.success());
    let bad = bin().args(["serve", "--addr", "not-an-address"]).output().unwrap();
    assert!(!bad.status.success());
}
