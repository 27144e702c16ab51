use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use rug::Float;

use hexsurf::surface::SurfacePoint;
use hexsurf_cli::artifacts::PipelineManifest;
use hexsurf_cli::grid::parse_point;
use hexsurf_cli::pipeline::load_periods;

const BITS: &str = "128";

fn data(kind: &str, name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(kind).join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexsurf")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A Bolza `periods.json` at low degree shared by the tests.
fn periods() -> &'static (tempfile::TempDir, PathBuf) {
    static P: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    P.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let (surface, curves) = (data("surfaces", "bolza"), data("curves", "bolza"));
        run_ok(&[
            "periods", "--surface", s(&surface), "--curves", s(&curves), "--degree", "10", "--bits", BITS, "--out-dir",
            s(dir.path()),
        ]);
        let path = dir.path().join("periods.json");
        (dir, path)
    })
}

#[test]
fn surface_reports_the_symplectic_form() {
    let dir = tempfile::tempdir().unwrap();
    let (surface, curves) = (data("surfaces", "gutzwiller"), data("curves", "gutzwiller"));
    run_ok(&["surface", "--config", s(&surface), "--curves", s(&curves), "--bits", BITS, "--out-dir", s(dir.path())]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("surface.json")).unwrap()).unwrap();
    let j: Vec<Vec<i64>> = serde_json::from_value(v["intersection_matrix"].clone()).unwrap();
    assert_eq!(j, vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 0, 0], vec![0, -1, 0, 0]]);
    assert_eq!(v["polygons"].as_array().unwrap().len(), 4);
    assert_eq!(v["provenance"]["bits"], 128);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (surface, curves) = (data("surfaces", "d6z2"), data("curves", "d6z2"));
    let args = [
        "periods", "--surface", s(&surface), "--curves", s(&curves), "--degree", "8", "--bits", BITS, "--out-dir", s(dir.path()),
    ];
    run_ok(&args);
    let first = std::fs::read(dir.path().join("periods.json")).unwrap();
    run_ok(&args);
    assert_eq!(first, std::fs::read(dir.path().join("periods.json")).unwrap());
    let (_, p) = periods();
    let grid = |name: &str| {
        let out = dir.path().join(name);
        run_ok(&["basis", "--periods", s(p), "--kind", "phat", "--pole", "1,0.05,0.02", "--order", "2", "--grid", "3x3", "--out", s(&out)]);
        std::fs::read(out).unwrap()
    };
    assert_eq!(grid("a.csv"), grid("b.csv"));
}

#[test]
fn usage_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = run(&["surface", "--config", s(&missing), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let (_, p) = periods();
    // Order 3 belongs to the p_check family at a generic pole.
    let out = run(&["basis", "--periods", s(p), "--kind", "phat", "--pole", "0,0.1,0.1", "--order", "3", "--grid", "2x2", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["basis", "--periods", s(p), "--kind", "logsigma", "--pole", "0,0.1,0.1", "--grid", "2x2", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["basis", "--periods", s(p), "--kind", "phat", "--pole", "0,0.1,0.1", "--grid", "0x2", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["basis", "--periods", s(p), "--kind", "phat", "--pole", "0,5,0", "--grid", "2x2", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["reproduce", "period", "--data-dir", s(dir.path()), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let (_, p) = periods();
    let out = dir.path().join("g.csv");
    run_ok(&["grid", "--periods", s(p), "--kind", "abel-jacobi", "--component", "1", "--grid", "2x2", "--polygon", "3", "--out", s(&out)]);
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re,im,value_re,value_im");
    assert_eq!(lines.len(), 5);
}

/// The CSV values of a `log|σ̂|` grid match direct library evaluation with
/// the same seed.
#[test]
fn logsigma_grid_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (_, p) = periods();
    let out = dir.path().join("ls.csv");
    let (pole, pole2) = ("0,0.05,-0.1", "2,-0.1,0.05");
    run_ok(&[
        "basis", "--periods", s(p), "--kind", "logsigma", "--pole", pole, "--pole2", pole2, "--grid", "4x4", "--polygon", "1",
        "--seed", "5", "--out", s(&out),
    ]);
    let mut m = PipelineManifest::new("test", 128, 5, dir.path());
    let loaded = load_periods(&mut m, p).unwrap();
    let bc = loaded.basis_context().unwrap();
    let poles = [parse_point(pole, &loaded.atlas).unwrap(), parse_point(pole2, &loaded.atlas).unwrap()];
    let shift = bc.choose_generic_shift(&poles, 5).unwrap();
    let text = std::fs::read_to_string(out).unwrap();
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        if f[2].is_nan() {
            continue;
        }
        let z = SurfacePoint::new(1, hexsurf::numerics::Cplx::from_f64(loaded.atlas.prec(), f[0], f[1]));
        let want: Float = bc.log_sigma_hat(&shift, &poles[0], &poles[1], &z).unwrap();
        assert!((want.to_f64() - f[2]).abs() <= 1e-12 * (1.0 + f[2].abs()), "{line}");
        checked += 1;
    }
    assert!(checked >= 4);
}

#[test]
fn theta_and_solve_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (_, p) = periods();
    run_ok(&["theta", "--periods", s(p), "--z", "0.1,-0.2,0.3,0.05", "--gradient", "--out-dir", s(dir.path())]);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("theta.json")).unwrap()).unwrap();
    assert!(v["theta"][0].as_str().unwrap().parse::<f64>().unwrap().is_finite());
    let problem = dir.path().join("problem.json");
    std::fs::write(
        &problem,
        r#"{"holes": [{"polygon": 0, "radius": 0.1, "radius_kind": "euclidean_centered", "constant": 1},
                      {"polygon": 2, "radius": 0.3, "radius_kind": "hyperbolic", "harmonics": [{"k": 1, "sin": 0.5}]}]}"#,
    )
    .unwrap();
    run_ok(&["solve", "--periods", s(p), "--problem", s(&problem), "--orders", "0,1", "--out-dir", s(dir.path())]);
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "M,boundary_error");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("2,") && rows[2].starts_with("6,"), "{csv}");
    assert!(dir.path().join("solution.json").is_file());
}
