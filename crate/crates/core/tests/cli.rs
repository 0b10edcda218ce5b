use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Stdio};

fn pprs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pprs"))
}

fn run(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .map(str::trim)
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("pprs-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn gen_screen_and_oracle_agree() {
    let dir = scratch("screen");
    let gen = run(pprs().args(["gen", "--n", "120", "--overlap", "0.25", "--seed", "5", "--out-dir"]).arg(&dir));
    assert_eq!(value(&gen, "links"), "30");
    let port = free_port();
    let req = write(&dir, "req.conf", &format!("role = requester\ncandidates = 127.0.0.1:{port}\nthreshold = 10\not_mode = dealer\n"));
    let cand = write(&dir, "cand.conf", &format!("role = candidate\nlisten = 127.0.0.1:{port}\not_mode = dealer\n"));
    let report = dir.join("cand-report.txt");
    let mut server = pprs()
        .args(["screen", "--config"])
        .arg(&cand)
        .arg("--data")
        .arg(dir.join("right.csv"))
        .arg("--report")
        .arg(&report)
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let text = run(pprs().args(["screen", "--config"]).arg(&req).arg("--data").arg(dir.join("left.csv")));
    assert!(server.wait().unwrap().success());
    assert_eq!(value(&text, "c"), "30");
    assert_eq!(value(&text, "status"), "passed");
    let served = std::fs::read_to_string(&report).unwrap();
    assert_eq!(value(&served, "c"), "30");
    let salt = value(&text, "salt").to_string();
    let oracle = run(pprs()
        .args(["oracle", "--config"])
        .arg(&req)
        .arg("--left")
        .arg(dir.join("left.csv"))
        .arg("--right")
        .arg(dir.join("right.csv"))
        .args(["--salt", &salt]));
    assert_eq!(value(&oracle, "c"), "30");
}

#[test]
fn bench_emits_csv() {
    let out = run(pprs().args(["bench-ofa", "--n", "64,200", "--variants", "oep,ofa", "--ot-mode", "dealer"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,eps,variant,bytes,setup_bytes,ots,seconds,correct");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn bad_config_is_reported() {
    let dir = scratch("bad");
    let cfg = write(&dir, "bad.conf", "nonsense = 1\n");
    let out = pprs().args(["oracle", "--config"]).arg(&cfg).args(["--left", "x", "--right", "y"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));
}
