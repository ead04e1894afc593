use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indicvex")).args(args).output().expect("spawn cli")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn envelope_of_free_pair() {
    let o = run(&["envelope", "--a", "1,-2", "--x", "0.5,0.3", "--z", "0.5,0.6"]);
    assert!(o.status.success());
    // (x1 - 2 x2)^2 / min(1, z1 + z2) with the sum above one
    let v: f64 = stdout(&o).parse().unwrap();
    assert!((v - 0.01).abs() < 1e-9, "{v}");
}

#[test]
fn metrics_line() {
    let o = run(&["metrics", "--best", "1.47", "--cont", "1.09"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("IGap=25.85 "), "{}", stdout(&o));
}

#[test]
fn knapsack_verification_succeeds() {
    let o = run(&["verify", "knapsack", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("holds"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["envelope", "--a", "1,2", "--x", "0.5", "--z", "0.5,0.5"]).status.code(), Some(1));
    assert_eq!(run(&["metrics", "--best", "nope", "--cont", "1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn build_then_solve_from_file() {
    let dir = std::env::temp_dir().join(format!("indicvex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let form = dir.join("f.json");
    let form = form.to_str().unwrap();
    let o = run(&["build", "--n", "20", "--spikes", "1", "--k1", "2", "--k2", "1", "--seed", "3", "--formulation", "rankone", "--out", form]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["solve", "--form", form]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("status="), "{}", stdout(&o));
    let lp = run(&["export", form, "--format", "lp"]);
    assert!(lp.status.success());
    assert!(stdout(&lp).ends_with("End"));
    std::fs::remove_dir_all(&dir).ok();
}
