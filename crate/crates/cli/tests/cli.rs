use std::fs;
use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
[kernel]
family = "gaussian"
sigma = 1.0
[nonlinearity]
name = "fisher_kpp"
[speed]
mode = "factor"
value = 1.25
[profile]
half_width = 50.0
intervals = 2000
[grid]
half_width = 30.0
points = 301
[time]
dt = 0.05
t_end = 8.0
output_every = 0.5
"#;

fn nlf(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nlf")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn speed_writes_curves_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("speed");
    let (code, text) = nlf(&["speed", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("PASS tangency residual"));
    assert_eq!(header(&out.join("curves.csv")), "lambda,g,h");
    assert_eq!(header(&out.join("verdicts.csv")), "name,measured,target,pass");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["command"], "speed");
    assert_eq!(summary["all_pass"], true);
    assert!((summary["report"]["wave"]["c_star"].as_f64().unwrap() - 0.5f64.exp()).abs() < 1e-9);
}

#[test]
fn evolve_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let (code, text) = nlf(&["evolve", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{text}");
        (fs::read(out.join("series.csv")).unwrap(), fs::read(out.join("final.csv")).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(header(&tmp.path().join("a/series.csv")), "t,error,min,max,front_xi");
}

#[test]
fn evolve_reads_custom_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rows = String::from("x,u\n");
    for i in 0..=60 {
        let x = -30.0 + i as f64;
        rows += &format!("{x},{}\n", 0.5 * (1.0 + (x / 3.0).tanh()));
    }
    fs::write(tmp.path().join("init.csv"), rows).unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}\n[initial]\nkind = \"custom_csv\"\npath = \"init.csv\"\n"));
    let out = tmp.path().join("custom");
    let (code, text) = nlf(&["evolve", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
}

#[test]
fn failing_verdict_sets_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("ss");
    let (code, text) = nlf(&["supersolution", &cfg, "--mu", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL sup-solution inequality"));
    assert_eq!(header(&out.join("worst.csv")), "t,xi,value");
}

#[test]
fn bad_input_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, text) = nlf(&["stability", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(text.contains("missing.toml"));
    let cfg = write_config(tmp.path(), &format!("{SMALL}\n[delay]\ntau = 0.07\n"));
    let (code, text) = nlf(&["speed", &cfg]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("multiple of dt"), "{text}");
}
