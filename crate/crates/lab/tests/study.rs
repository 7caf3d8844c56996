use stadium_core::eigensolve::{count_below, SpectralWindow};
use stadium_core::operators::OperatorPair;
use stadium_core::{Domain, TriMesh};
use stadium_lab::config::{BouncingBallRange, StudyConfig};
use stadium_lab::study::{compute_study, csv, eigenpair_row, ScalingRow, STUDY_COLUMNS};

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("stadium-study-{name}-{}", std::process::id()))
}

#[test]
fn empty_window_list_gives_header_only() {
    let cfg = StudyConfig { h: 0.1, refinements: 0, bouncing_ball: None, ..Default::default() };
    let data = compute_study(&cfg).unwrap();
    assert_eq!(data.csv, format!("{}\n", STUDY_COLUMNS.join(",")));
    assert!(data.rows.is_empty());
    assert!(data.fits.wing_mass.is_none());
}

#[test]
fn rectangle_window_rows_match_direct_calls() {
    let domain = Domain::Rectangle { alpha: 2.0, beta: 1.0 };
    let window = SpectralWindow::new(8.0, 4.0).unwrap();
    let cfg = StudyConfig {
        domain,
        h: 0.1,
        refinements: 0,
        windows: vec![window],
        bouncing_ball: None,
        gamma1: -1.0,
        gamma2: 1.0,
        ..Default::default()
    };
    let data = compute_study(&cfg).unwrap();
    let mesh = TriMesh::build(domain, 0.1).unwrap();
    let op = OperatorPair::assemble(&mesh).unwrap();
    let pairs = stadium_core::eigensolve::solve_window(&op, window, cfg.max_per_window).unwrap();
    let params = cfg.observe_params();
    let direct: Vec<ScalingRow> =
        pairs.iter().map(|p| eigenpair_row(&mesh, &op, &cfg, &params, 0, None, p).unwrap()).collect();
    // (2,1), (3,1) and (1,2) lie in [4, 12)
    assert_eq!(direct.len(), 3);
    assert_eq!(data.rows.len(), direct.len());
    for (a, b) in data.rows.iter().zip(&direct) {
        assert_eq!(a.report, b.report);
        assert_eq!(a.lambdasq.to_bits(), b.lambdasq.to_bits());
        assert_eq!(a.rellich.map(f64::to_bits), b.rellich.map(f64::to_bits));
    }
    // the rectangle has no wings
    assert!(data.rows.iter().all(|r| r.report.wing_mass == 0.0));
}

#[test]
fn bouncing_ball_row_count_matches_inertia() {
    let cfg = StudyConfig {
        h: 0.05,
        refinements: 0,
        bouncing_ball: Some(BouncingBallRange { n_min: 5, n_max: 25, halfwidth: 5.0 }),
        max_per_window: 1000,
        ..Default::default()
    };
    let data = compute_study(&cfg).unwrap();
    let mesh = TriMesh::build(cfg.domain, cfg.h).unwrap();
    let op = OperatorPair::assemble(&mesh).unwrap();
    let mut expected = 0;
    for (_, w) in cfg.all_windows().unwrap() {
        expected += count_below(&op, w.hi()).unwrap() - count_below(&op, w.lo()).unwrap();
    }
    assert!(expected > 0);
    assert_eq!(data.rows.len(), expected);
    assert_eq!(data.windows, 21);
}

#[test]
fn csv_shape_and_fit_columns() {
    let cfg = StudyConfig {
        h: 0.1,
        refinements: 0,
        bouncing_ball: Some(BouncingBallRange { n_min: 1, n_max: 3, halfwidth: 6.0 }),
        ..Default::default()
    };
    let data = compute_study(&cfg).unwrap();
    assert!(data.rows.len() >= 3);
    let lines: Vec<&str> = data.csv.lines().collect();
    assert_eq!(lines[0], ScalingRow::csv_header());
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), STUDY_COLUMNS.len());
    }
    let slope = data.fits.wing_mass.as_ref().unwrap().slope;
    assert!(data.rows.iter().all(|r| r.fit_wing_mass_slope == Some(slope)));
    assert_eq!(csv(&data.rows), data.csv);
    for r in &data.rows {
        assert!((r.lambda4_wing_mass() - r.lambdasq.powi(2) * r.report.wing_mass).abs() <= 1e-12 * r.lambda4_wing_mass());
        assert!(r.report.lhs.normderiv > 0.0 && r.report.lhs.l2 > 0.0 && r.report.lhs.l2bis > 0.0);
    }
}

#[test]
fn run_study_writes_artifacts() {
    let dir = tmp("artifacts");
    let cfg = StudyConfig {
        h: 0.1,
        refinements: 0,
        bouncing_ball: Some(BouncingBallRange { n_min: 1, n_max: 2, halfwidth: 6.0 }),
        output_dir: dir.clone(),
        ..Default::default()
    };
    if std::env::var_os(stadium_lab::config::OUT_ENV).is_some() {
        return;
    }
    let out = stadium_lab::run_study(&cfg).unwrap();
    for f in ["study.csv", "fit.json", "wing_mass.svg", "flux_weighted.svg", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(dir.join("study.csv")).unwrap(), out.csv);
    assert_eq!(out.manifest.status, "complete");
    std::fs::remove_dir_all(&dir).unwrap();
}
