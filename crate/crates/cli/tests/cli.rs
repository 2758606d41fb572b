use std::process::{Command, Output};

fn ffgalois(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffgalois"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn check_reports_witness() {
    let o = ffgalois(&["check", "--p", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5,0,15,fail,11"));
    let o = ffgalois(&["check", "--p", "11", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], "Pass");
}

#[test]
fn census_csv_has_config_header() {
    let o = ffgalois(&["--q", "5", "census", "--n", "2", "--level", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("# ffgalois census\n# q=5"));
    assert!(s.contains("class_id,trace,det,count,density,target,deviation,envelope"));
    let total: u64 = body(&s)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 625 - 25);
}

#[test]
fn budget_refusal_exits_2() {
    let o = ffgalois(&["--q", "11", "census", "--n", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ffgalois(&["--q", "5", "--budget", "100", "census", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_input_exits_1() {
    let o = ffgalois(&["--q", "6", "classes"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ffgalois(&["--q", "6", "census"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ffgalois(&["census", "--level", "x"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn density_is_thread_independent() {
    let args = |t: &'static str| ["--q", "5", "--threads", t, "density", "--x-max", "1", "--ells", "2,3", "--depth", "2"];
    let a = ffgalois(&args("1"));
    let b = ffgalois(&args("3"));
    assert_eq!(a.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&a.stderr).contains("hypothesis fails"));
    assert_eq!(body(&stdout(&a)), body(&stdout(&b)));
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn sieve_bound_json_and_output_file() {
    let dir = std::env::temp_dir().join(format!("ffgalois-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sieve.json");
    let o = ffgalois(&[
        "--q",
        "5",
        "--output",
        path.to_str().unwrap(),
        "sieve-bound",
        "--class",
        "1",
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["actual"], 112);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scan_and_torsion() {
    let o = ffgalois(&["--q", "5", "scan", "--a", "0,1", "--b", "0", "--depth", "1", "--ells", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
    let o = ffgalois(&["--q", "5", "torsion", "--x-max", "1", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\n1,620,"));
}
