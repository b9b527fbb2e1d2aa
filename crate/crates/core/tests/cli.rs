mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{rel, tan_root};
use fbg_stiffness::config::KeyValues;
use fbg_stiffness::io::read_curve;
use fbg_stiffness::BeamSpec;

const BASE: &str = "\
beam.r_fbg_m = 0.115e-3
beam.r_wire_m = 0.1e-3
beam.e_fbg_pa = 67e9
beam.e_wire_pa = 55e9
beam.lengths_mm = 42
solver.kappa_points = 48
";

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbg-stiffness"))
}

fn config(dir: &Path, extra: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, format!("{BASE}{extra}")).unwrap();
    p
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    exe().args(args).arg("-c").arg(cfg).arg("-o").arg(out).output().unwrap()
}

fn tissues(grid: &[f64]) -> String {
    grid.iter().map(|e| format!("tissue.t{e}k.e_pa = {e}e3\ntissue.t{e}k.nu = 0.49\n")).collect()
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exe().output().unwrap().status.code(), Some(1));
    assert_eq!(exe().arg("curve").output().unwrap().status.code(), Some(1));
    assert_eq!(exe().arg("frobnicate").output().unwrap().status.code(), Some(1));
    let empty = dir.path().join("empty.cfg");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["curve"], &empty, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beam.r_fbg_m"));
    assert_eq!(exe().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn curve_starts_at_critical_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = run(&["curve"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let beam = BeamSpec::reference(0.042).unwrap();
    let curve = read_curve(&dir.path().join("curve_42mm.csv"), beam.ei, beam.length).unwrap();
    let p_min = curve.points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min);
    let p_cr = tan_root().powi(2) * beam.ei / beam.length.powi(2);
    assert!(rel(p_min, p_cr) < 5e-3);
    let strain = std::fs::read_to_string(dir.path().join("strain_42mm.csv")).unwrap();
    assert!(strain.starts_with("kappa,end_shortening_m,P_N,eps1,eps2,eps3,dl1_pm,dl2_pm,dl3_pm\n"));
}

#[test]
fn unsolvable_points_are_reported_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // a bracket ceiling too low for the softest part of the branch
    let cfg = config(dir.path(), "solver.slope0_high = 0.5\nsolver.slope0_max = 1.0\n");
    let out = run(&["curve"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed: L = 42mm, kappa"));
    assert!(dir.path().join("curve_42mm.csv").exists());
}

#[test]
fn zero_tissues_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out_dir = dir.path().join("out");
    let out = run(&["simulate"], &cfg, &out_dir);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: no tissues"));
    assert!(!out_dir.exists());
}

#[test]
fn softer_tissue_sinks_deeper_in_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &tissues(&[100.0, 300.0, 500.0, 1000.0]));
    assert!(run(&["simulate"], &cfg, dir.path()).status.success());
    let deltas: Vec<f64> = [100, 300, 500, 1000]
        .iter()
        .map(|e| {
            let meta = KeyValues::load(&dir.path().join(format!("trial_t{e}k_42mm.meta"))).unwrap();
            meta.get_f64("truth.delta_i_m").unwrap()
        })
        .collect();
    assert!(deltas.windows(2).all(|w| w[1] < w[0]), "{deltas:?}");
}

#[test]
fn same_seed_same_trace_other_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{}protocol.noise_pm = 2\n", tissues(&[300.0])));
    let read = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = exe().args(["simulate", "--seed", seed, "-c"]).arg(&cfg).arg("-o").arg(&out).output().unwrap();
        assert!(o.status.success());
        std::fs::read(out.join("trial_t300k_42mm.csv")).unwrap()
    };
    assert_eq!(read("a", "5"), read("b", "5"));
    assert_ne!(read("a", "5"), read("c", "6"));
}

#[test]
fn noiseless_batch_estimates_within_five_percent() {
    let dir = tempfile::tempdir().unwrap();
    let grid = [100.0, 300.0, 500.0, 1000.0];
    let cfg = config(dir.path(), &tissues(&grid));
    assert!(run(&["simulate"], &cfg, dir.path()).status.success());
    let traces: Vec<PathBuf> = grid.iter().map(|e| dir.path().join(format!("trial_t{e}k_42mm.csv"))).collect();
    let out = exe().args(["estimate", "-c"]).arg(&cfg).arg("-o").arg(dir.path()).args(&traces).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(dir.path().join("estimates.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["trace_id", "E_t_Pa", "delta_i_m", "P_N", "contact_idx", "buckling_idx", "outlier"]
    );
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (row, e) in rows.iter().zip(grid) {
        assert_eq!(&row[0], format!("trial_t{e}k_42mm"));
        assert!(rel(row[1].parse().unwrap(), e * 1e3) < 0.05);
        assert_eq!(&row[6], "false");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("RMSE (KPa)") && summary.contains("IQR (KPa)"));
}

#[test]
fn hard_tissue_is_flagged_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &tissues(&[4000.0]));
    assert!(run(&["simulate"], &cfg, dir.path()).status.success());
    let trace = dir.path().join("trial_t4000k_42mm.csv");
    let out = exe().args(["estimate", "-c"]).arg(&cfg).arg("-o").arg(dir.path()).arg(&trace).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outlier"));
    let csv = std::fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",true"));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.lines().nth(1).unwrap().trim_end().ends_with("0        1"));
}

#[test]
fn bad_trace_reports_line_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "estimator.nu = 0.49\n");
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = exe().args(["estimate", "-c"]).arg(&cfg).arg("-o").arg(dir.path()).arg(&empty).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "index,encoder_m,dl1_pm,dl2_pm,dl3_pm,force_N\n0,0,0,0,0,0\n1,x,0,0,0,0\n").unwrap();
    let out = exe().args(["estimate", "-c"]).arg(&cfg).arg("-o").arg(dir.path()).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn trace_without_contact_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "estimator.nu = 0.49\n");
    let flat = dir.path().join("flat.csv");
    let mut text = String::from("index,encoder_m,dl1_pm,dl2_pm,dl3_pm,force_N\n");
    for i in 0..100 {
        text.push_str(&format!("{i},{},0,0,0,0\n", i as f64 * 1e-5));
    }
    std::fs::write(&flat, text).unwrap();
    let out = exe().args(["estimate", "-c"]).arg(&cfg).arg("-o").arg(dir.path()).arg(&flat).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contact force threshold"));
}
