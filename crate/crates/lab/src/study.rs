//! The study pipeline: for every window solve, observe and verify, then write
//! one CSV row per eigenpair, the log-log plots and the exponent fits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use stadium_core::eigensolve::{ordering, solve_window_with, Eigenpair, SolverOptions, SpectralWindow};
use stadium_core::fields::{FieldKind, VectorFieldSpec};
use stadium_core::observables::{normal_trace, observe, ObservableReport, ObserveParams, TraceMethod};
use stadium_core::operators::OperatorPair;
use stadium_core::quasimode::ModeField;
use stadium_core::verify::rellich_with_trace;
use stadium_core::{par, TriMesh};

use crate::config::StudyConfig;
use crate::fit::{fit_loglog, ScalingFit};
use crate::svg::LogLogPlot;

/// Frozen column order of the study CSV. New columns go at the end.
pub const STUDY_COLUMNS: [&str; 31] = [
    "window",
    "n",
    "window_center",
    "window_halfwidth",
    "lambdasq",
    "lambda",
    "residual_bound",
    "wing_mass",
    "lambda4_wing_mass",
    "lambda2_wing_norm",
    "wing_mass_plus",
    "wing_mass_minus",
    "flux_weighted",
    "flux_unweighted",
    "lhs_normderiv",
    "lhs_L2",
    "lhs_L2bis",
    "strip_mass",
    "zoneI",
    "zoneII",
    "zoneIII",
    "f_norm",
    "total_mass",
    "gradient_relative",
    "rellich_xdx",
    "rellich_radial",
    "rellich_cutoffx",
    "rellich_wingy",
    "parity",
    "fit_wing_mass_slope",
    "fit_flux_slope",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub window: usize,
    pub n: Option<u32>,
    pub window_center: f64,
    pub window_halfwidth: f64,
    pub lambdasq: f64,
    pub residual_bound: f64,
    pub report: ObservableReport,
    /// Relative Rellich residual for each field kind, in `FieldKind::ALL` order.
    pub rellich: [f64; 4],
    pub parity: Option<(i8, i8)>,
    pub fit_wing_mass_slope: Option<f64>,
    pub fit_flux_slope: Option<f64>,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ScalingRow {
    pub fn lambda(&self) -> f64 {
        self.report.lambda
    }

    pub fn lambda4_wing_mass(&self) -> f64 {
        self.lambdasq * self.lambdasq * self.report.wing_mass
    }

    /// `λ²‖u‖_W`
    pub fn lambda2_wing_norm(&self) -> f64 {
        self.lambdasq * self.report.wing_mass.max(0.0).sqrt()
    }

    pub fn csv_header() -> String {
        STUDY_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let r = &self.report;
        let parity = self.parity.map(|(px, py)| format!("{px}{py}")).unwrap_or_default();
        let cols = [
            self.window.to_string(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            num(self.window_center),
            num(self.window_halfwidth),
            num(self.lambdasq),
            num(r.lambda),
            num(self.residual_bound),
            num(r.wing_mass),
            num(self.lambda4_wing_mass()),
            num(self.lambda2_wing_norm()),
            num(r.wing_mass_plus),
            num(r.wing_mass_minus),
            num(r.flux_weighted),
            num(r.flux_unweighted),
            num(r.lhs.normderiv),
            num(r.lhs.l2),
            num(r.lhs.l2bis),
            num(r.strip_mass),
            num(r.zone_i),
            num(r.zone_ii),
            num(r.zone_iii),
            num(r.f_norm),
            num(r.total_mass),
            num(r.gradient.discrepancy.abs() / r.gradient.grad_norm_sq.max(f64::MIN_POSITIVE)),
            num(self.rellich[0]),
            num(self.rellich[1]),
            num(self.rellich[2]),
            num(self.rellich[3]),
            parity,
            opt(self.fit_wing_mass_slope),
            opt(self.fit_flux_slope),
        ];
        cols.join(",")
    }
}

pub fn csv(rows: &[ScalingRow]) -> String {
    let mut s = ScalingRow::csv_header();
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Observe and verify one eigenpair.
pub fn eigenpair_row(
    mesh: &TriMesh,
    op: &OperatorPair,
    cfg: &StudyConfig,
    params: &ObserveParams,
    window_index: usize,
    n: Option<u32>,
    pair: &Eigenpair,
) -> stadium_core::Result<ScalingRow> {
    let mode = ModeField::from_eigenpair(op, pair)?;
    let report = observe(mesh, op, &mode, params)?;
    let trace = normal_trace(mesh, op, &mode.vector, mode.lambdasq(), &mode.residual, TraceMethod::Variational)?;
    let (alpha, beta) = (mesh.domain.alpha(), mesh.domain.beta());
    let rellich = FieldKind::ALL.map(|kind| {
        let field = VectorFieldSpec::new(kind, alpha, beta, mode.lambda).with_cutoffs(cfg.cutoffs);
        rellich_with_trace(mesh, op, &mode.vector, &mode.residual, &field, &trace).relative
    });
    Ok(ScalingRow {
        window: window_index,
        n,
        window_center: pair.window.center,
        window_halfwidth: pair.window.halfwidth,
        lambdasq: pair.lambdasq,
        residual_bound: pair.residual_bound,
        report,
        rellich,
        parity: pair.parity,
        fit_wing_mass_slope: None,
        fit_flux_slope: None,
    })
}

/// Rows of one window, in eigenvalue order.
pub fn window_rows(
    mesh: &TriMesh,
    op: &OperatorPair,
    perm: &[usize],
    cfg: &StudyConfig,
    index: usize,
    n: Option<u32>,
    window: SpectralWindow,
) -> stadium_core::Result<Vec<ScalingRow>> {
    let params = cfg.observe_params();
    let pairs = solve_window_with(op, window, cfg.max_per_window, &SolverOptions::default(), perm)?;
    pairs.iter().map(|p| eigenpair_row(mesh, op, cfg, &params, index, n, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub wing_mass: Option<ScalingFit>,
    pub flux_weighted: Option<ScalingFit>,
}

pub fn fit_rows(rows: &[ScalingRow]) -> Fits {
    let pts = |f: fn(&ScalingRow) -> f64| rows.iter().map(|r| (r.lambda(), f(r))).collect::<Vec<_>>();
    Fits {
        wing_mass: fit_loglog("wing_mass", &pts(|r| r.report.wing_mass)),
        flux_weighted: fit_loglog("flux_weighted", &pts(|r| r.report.flux_weighted)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyManifest {
    pub status: String,
    pub error: Option<String>,
    pub dofs: usize,
    pub h_final: f64,
    pub windows: usize,
    pub completed_windows: usize,
    pub rows: usize,
    pub files: Vec<String>,
}

pub struct StudyOutput {
    pub rows: Vec<ScalingRow>,
    pub csv: String,
    pub fits: Fits,
    pub manifest: StudyManifest,
    pub output_dir: PathBuf,
}

fn write(dir: &Path, name: &str, contents: &str, files: &mut Vec<String>) -> anyhow::Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    files.push(name.to_string());
    Ok(())
}

/// Rows for every window without touching the file system. On the first
/// failing window, returns the rows of the windows before it with the error.
pub fn compute_rows(
    cfg: &StudyConfig,
    mesh: &TriMesh,
    op: &OperatorPair,
) -> anyhow::Result<(Vec<ScalingRow>, usize, Option<anyhow::Error>)> {
    let windows = cfg.all_windows()?;
    let perm = ordering(op);
    let indexed: Vec<(usize, Option<u32>, SpectralWindow)> =
        windows.iter().enumerate().map(|(i, &(n, w))| (i, n, w)).collect();
    let per_window = par::map(&indexed, |&(i, n, w)| window_rows(mesh, op, &perm, cfg, i, n, w));
    let mut rows = Vec::new();
    for (done, res) in per_window.into_iter().enumerate() {
        match res {
            Ok(r) => rows.extend(r),
            Err(e) => {
                let err = anyhow::Error::new(e).context(format!("window {done}"));
                return Ok((rows, done, Some(err)));
            }
        }
    }
    Ok((rows, windows.len(), None))
}

/// Everything a study produces, before anything is written to disk.
pub struct StudyData {
    pub rows: Vec<ScalingRow>,
    pub csv: String,
    pub fits: Fits,
    pub dofs: usize,
    pub h_final: f64,
    pub windows: usize,
    pub completed_windows: usize,
    pub error: Option<anyhow::Error>,
}

/// Builds the mesh, runs every window and fills in the fit columns.
pub fn compute_study(cfg: &StudyConfig) -> anyhow::Result<StudyData> {
    cfg.validate()?;
    let mesh = TriMesh::build_refined(cfg.domain, cfg.h, cfg.refinements)?;
    let op = OperatorPair::assemble(&mesh)?;
    let windows = cfg.all_windows()?.len();
    let (mut rows, completed_windows, error) = compute_rows(cfg, &mesh, &op)?;
    let fits = fit_rows(&rows);
    for r in &mut rows {
        r.fit_wing_mass_slope = fits.wing_mass.as_ref().map(|f| f.slope);
        r.fit_flux_slope = fits.flux_weighted.as_ref().map(|f| f.slope);
    }
    let csv = csv(&rows);
    Ok(StudyData { rows, csv, fits, dofs: op.num_dofs(), h_final: mesh.h, windows, completed_windows, error })
}

/// Runs the study and writes `study.csv`, `fit.json`, two SVG plots and
/// `manifest.json` into the resolved output directory. A failing window
/// still leaves the rows before it and a manifest marked `partial`.
pub fn run_study(cfg: &StudyConfig) -> anyhow::Result<StudyOutput> {
    cfg.validate()?;
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let data = compute_study(cfg)?;
    let rows = data.rows;

    let mut files = Vec::new();
    write(&dir, "study.csv", &data.csv, &mut files)?;
    write(&dir, "fit.json", &(serde_json::to_string_pretty(&data.fits)? + "\n"), &mut files)?;
    let mass_pts: Vec<_> = rows.iter().map(|r| (r.lambda(), r.report.wing_mass)).collect();
    let flux_pts: Vec<_> = rows.iter().map(|r| (r.lambda(), r.report.flux_weighted)).collect();
    let mass_svg = LogLogPlot {
        title: "wing mass against frequency",
        x_label: "lambda",
        y_label: "wing_mass",
        points: &mass_pts,
        reference_slope: -4.0,
    };
    let flux_svg = LogLogPlot {
        title: "weighted boundary flux against frequency",
        x_label: "lambda",
        y_label: "flux_weighted",
        points: &flux_pts,
        reference_slope: 0.0,
    };
    write(&dir, "wing_mass.svg", &mass_svg.render(), &mut files)?;
    write(&dir, "flux_weighted.svg", &flux_svg.render(), &mut files)?;

    let manifest = StudyManifest {
        status: if data.error.is_some() { "partial".into() } else { "complete".into() },
        error: data.error.as_ref().map(|e| format!("{e:#}")),
        dofs: data.dofs,
        h_final: data.h_final,
        windows: data.windows,
        completed_windows: data.completed_windows,
        rows: rows.len(),
        files: files.clone(),
    };
    let mut all_files = files;
    write(&dir, "manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"), &mut all_files)?;
    if let Some(e) = data.error {
        return Err(e.context(format!("study aborted; partial results in {}", dir.display())));
    }
    Ok(StudyOutput { rows, csv: data.csv, fits: data.fits, manifest, output_dir: dir })
}

/// Human-readable summary of a study run.
pub fn summary(out: &StudyOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} rows over {} windows ({} dofs)", out.rows.len(), out.manifest.windows, out.manifest.dofs);
    for f in [&out.fits.wing_mass, &out.fits.flux_weighted].into_iter().flatten() {
        let _ = writeln!(s, "{}: slope {:.4} (rms {:.3e}, {} rows)", f.quantity, f.slope, f.rms_residual, f.used);
    }
    let _ = write!(s, "output in {}", out.output_dir.display());
    s
}
