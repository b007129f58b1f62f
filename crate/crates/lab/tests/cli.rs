use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kfp_core::mesh::read_snapshot;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kfp-lab")
}

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{command}.cfg"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out-{command}"));
    let o =
        Command::new(bin()).arg(command).arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra).output().unwrap();
    (o, out)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let k = r.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    r.records().map(|rec| rec.unwrap()[k].to_string()).collect()
}

fn floats(path: &Path, name: &str) -> Vec<f64> {
    column(path, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn constant_data_gives_constant_solution() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), "solve", "[data]\ng = constant:3\ngstar = zero\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let u = read_snapshot(&mut fs::File::open(out.join("solution.kfp")).unwrap()).unwrap();
    assert!(u.values.iter().all(|&v| (v - 3.0).abs() < 1e-10));
    assert_eq!(column(&out.join("solve.csv"), "converged"), ["true"]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.ends_with("solve.csv")));
}

#[test]
fn variational_solve_satisfies_the_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[data]\ng = sines:1,1,1,1\n[solver]\nmethod = variational\n[output]\nplots = false\n";
    let (o, out) = run(dir.path(), "solve", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = out.join("solve.csv");
    assert_eq!(column(&csv, "method"), ["variational"]);
    assert!(floats(&csv, "residual_sup")[0] < 1e-8);
    assert!(!out.join("objective.svg").exists());
}

#[test]
fn comparison_suite_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) =
        run(dir.path(), "verify", "[data]\ng = sines:1,1,1,1\n[verify]\nsuite = comparison\ncases = 5\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = floats(&out.join("comparison.csv"), "max_violation");
    assert_eq!(v.len(), 5);
    assert!(v.iter().all(|&x| x <= 1e-6), "{v:?}");
}

#[test]
fn study_error_decreases_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nnx = 9, 17, 33\nny = 9, 17, 33\nnt = 5, 9, 17\n[data]\ng = mms\ngstar = mms\n";
    let (o, out) = run(dir.path(), "study", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = out.join("study.csv");
    let e = floats(&csv, "l2_error");
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    let order: f64 = column(&csv, "order").last().unwrap().parse().unwrap();
    assert!(order > 1.5, "order {order}");
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[data]\ng = sines:1,1,1,1\n[verify]\nsuite = comparison, energy, holder\ncases = 3\n";
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let (oa, outa) = run(&a, "verify", cfg, &["--seed", "11"]);
    let (ob, outb) = run(&b, "verify", cfg, &["--seed", "11"]);
    assert_eq!(code(&oa), 0);
    assert_eq!(code(&ob), 0);
    for f in ["comparison.csv", "estimates.csv", "holder.csv", "solution.kfp"] {
        assert_eq!(fs::read(outa.join(f)).unwrap(), fs::read(outb.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn classify_writes_one_row_per_symbol_check() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run(dir.path(), "classify", "[symbol]\nname = checkerboard\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("classify.csv")).unwrap();
    assert!(text.lines().count() >= 2);
}

#[test]
fn kernel_residual_decays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nx = -2, 2\ny = -1, 1\nt = 0.5, 1\n[grid]\nnx = 17, 33\nny = 17, 33\nnt = 9, 17\n";
    let (o, out) = run(dir.path(), "kernel", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("kernel.csv").exists());
}

#[test]
fn non_convergence_exits_one_and_keeps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[symbol]\nname = modulated\n[data]\ng = sines:1,1,1,1\n[solver]\nmax_iter = 1\ntol = 1e-14\n";
    let (o, out) = run(dir.path(), "solve", cfg, &[]);
    assert_eq!(code(&o), 1);
    assert_eq!(column(&out.join("solve.csv"), "converged"), ["false"]);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (i, cfg) in ["[grid]\nnx = 2\n", "[data]\ng = teapot\n", "[solver]\nmethod = magic\n", "command = study\n"]
        .iter()
        .enumerate()
    {
        let d = dir.path().join(i.to_string());
        fs::create_dir_all(&d).unwrap();
        let (o, _) = run(&d, "solve", cfg, &[]);
        assert_eq!(code(&o), 2, "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let (o, _) = run(dir.path(), "solve", "", &["--bogus"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unreadable_config_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(bin()).args(["solve", "--config"]).arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "[data]\ng = constant:1\n").unwrap();
    let o = Command::new(bin())
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}
