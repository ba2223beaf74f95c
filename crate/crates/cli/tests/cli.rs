use std::path::Path;
use std::process::{Command, Output};

use hankel_kdv::io::CsvTable;
use hankel_kdv::oracles::soliton_exact;

const SECH: &str = "workers = 1\n[potential]\nfamily = \"sech_well\"\ndepth = -2.0\nwidth = 1.0\ncenter = 0.0\n";
const ZERO: &str = "workers = 1\n[potential]\nfamily = \"zero\"\n";

fn hkdv(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hkdv"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn table(dir: &Path, name: &str) -> CsvTable {
    CsvTable::parse(&std::fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

#[test]
fn scatter_sech_well_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = hkdv(dir.path(), SECH, &["scatter"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("bound states: 1"), "{report}");
    assert!(report.contains("kappa = 1.000000"), "{report}");
    let r_max: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("max |R|: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(r_max <= 1e-6, "{r_max}");
    assert!(dir.path().join("out/scatter_report.txt").exists());
    let cached = std::fs::read_dir(dir.path().join("out/cache")).unwrap().count();
    assert_eq!(cached, 1);
}

#[test]
fn scatter_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let o = hkdv(dir.path(), ZERO, &["scatter"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("bound states: 0"), "{report}");
    assert!(report.contains("max |R|: 0.000e0"), "{report}");
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = hkdv(dir.path(), &format!("{SECH}[discretization]\nn_quad = -4\n"), &["scatter"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_quad"), "{}", stderr(&o));

    let o = hkdv(dir.path(), &format!("{SECH}[scattering]\node_tol = -1.0\n"), &["scatter"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ode_tol"), "{}", stderr(&o));

    let o = hkdv(dir.path(), &format!("experiment = \"solve\"\n{SECH}"), &["scatter"]);
    assert_eq!(o.status.code(), Some(2));

    let o = hkdv(dir.path(), SECH, &["solve"]);
    assert_eq!(o.status.code(), Some(2), "missing [solve]");
}

#[test]
fn solve_soliton_matches_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SECH}[solve]\nx = {{ start = -10.0, stop = 10.0, n = 41 }}\nt = [0.0, 0.05, 0.1]\nresidual_bound = 2.0\n");
    let o = hkdv(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = table(dir.path(), "solution.csv");
    assert_eq!(t.columns, ["x", "t", "u", "logdet", "residual"]);
    let (xs, ts, us) = (t.column("x").unwrap(), t.column("t").unwrap(), t.column("u").unwrap());
    assert_eq!(us.len(), 41 * 3);
    let worst = (0..us.len())
        .map(|i| (us[i] - soliton_exact(1.0, 0.0, xs[i], ts[i])).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/solution.json")).unwrap()).unwrap();
    assert_eq!(sidecar["meta"]["route"], "full");
    assert_eq!(sidecar["meta"]["discretization"]["n_quad"], 96);

    // cached and recomputed runs give byte-identical output
    let first = std::fs::read(dir.path().join("out/solution.csv")).unwrap();
    let o = hkdv(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("out/solution.csv")).unwrap(), first);
    let o = hkdv(dir.path(), &cfg, &["solve", "--no-cache"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("out/solution.csv")).unwrap(), first);
}

#[test]
fn solve_zero_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{ZERO}[solve]\nroute = \"split\"\nx = {{ start = -2.0, stop = 2.0, n = 9 }}\nt = {{ start = 0.1, stop = 0.3, n = 3 }}\nresidual_bound = 1e-12\n");
    let o = hkdv(dir.path(), &cfg, &["solve", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let u = table(dir.path(), "solution.csv").column("u").unwrap();
    assert!(u.iter().all(|&v| v == 0.0));
}

#[test]
fn solve_square_well_exit_follows_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "workers = 1\n[potential]\nfamily = \"square_well\"\ndepth = -1.0\nleft = -1.0\nright = 1.0\n\
               [solve]\nx = { start = -1.0, stop = 1.0, n = 9 }\nt = { start = 0.05, stop = 0.15, n = 3 }\nresidual_bound = 0.5\n";
    let o = hkdv(dir.path(), cfg, &["solve"]);
    let line = stdout(&o);
    let norm: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(norm.is_finite() && norm > 0.0, "{line}");
    assert_eq!(o.status.code(), Some(if norm < 0.5 { 0 } else { 1 }), "{line}");
}

#[test]
fn converge_right_supported_and_sech() {
    let dir = tempfile::tempdir().unwrap();
    let right = "workers = 1\n[potential]\nfamily = \"square_well\"\ndepth = -1.0\nleft = 0.5\nright = 2.0\n\
                 [converge]\nb_list = [-1.0, -2.0, -4.0]\nprobes = [[1.0, 0.1]]\n";
    let o = hkdv(dir.path(), right, &["converge"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = table(dir.path(), "convergence.csv").column("delta").unwrap();
    assert!(d.iter().filter(|v| !v.is_nan()).all(|&v| v == 0.0), "{d:?}");

    let sech = format!("{SECH}[converge]\nb_list = [-3.0, -6.0, -9.0, -12.0]\nprobes = [[2.0, 0.1]]\n");
    let o = hkdv(dir.path(), &sech, &["converge"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = table(dir.path(), "convergence.csv");
    let d = t.column("delta").unwrap();
    assert!(d[d.len() - 2].abs() < 1e-4, "{d:?}");
    assert!(t.meta.iter().any(|(k, v)| k == "monotone_tail_0" && v == "true"));
}

#[test]
fn compare_bump_and_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let section = "[compare]\nt = 0.1\nx = { start = -10.0, stop = 10.0, n = 41 }\ndomain = [-32.0, 32.0]\nn_modes = 2048\ndt = 1e-4\n";
    let bump = format!("workers = 1\n[potential]\nfamily = \"gaussian\"\ndepth = -1.0\nwidth = 1.0\ncenter = 0.0\n{section}tolerance = 1e-3\n");
    let o = hkdv(dir.path(), &bump, &["compare"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let diff = table(dir.path(), "compare.csv").column("diff").unwrap();
    assert!(diff.iter().all(|d| d.abs() < 1e-3));

    let sol = format!("{SECH}{section}tolerance = 1e-5\n");
    let o = hkdv(dir.path(), &sol, &["compare"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn compare_mismatched_grid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{SECH}[compare]\nt = 0.1\nx = {{ start = -10.0, stop = 10.0, n = 40 }}\ndomain = [-32.0, 32.0]\nn_modes = 2048\ndt = 1e-4\ntolerance = 1e-3\n"
    );
    let o = hkdv(dir.path(), &cfg, &["compare"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("split-step grid"), "{}", stderr(&o));
}

#[test]
fn sampled_profile_from_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.txt"), "# x q\n-1 0\n0 -1\n1 0\n").unwrap();
    let o = hkdv(dir.path(), "workers = 1\n[potential]\nfile = \"q.txt\"\n[scatter]\nsplit = false\n", &["scatter"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("bound states: 1"), "{}", stdout(&o));
}
