//! The acceptance driver: every criterion runs independently, records its
//! measurements, and never throws. Failures are data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use stadium_core::eigensolve::{count_below_with, lowest, ordering, solve_window_with, Eigenpair, SolverOptions, SpectralWindow};
use stadium_core::fields::{FieldKind, VectorFieldSpec};
use stadium_core::observables::{region_mass, Region};
use stadium_core::operators::{gradient_identity, OperatorPair};
use stadium_core::quasimode::{explicit_quasimode, ModeField, Profile, QuasimodeSpec};
use stadium_core::verify::{rellich_residual, rellich_terms};
use stadium_core::{Domain, StadiumGeometry, TriMesh};

use crate::config::{output_override, BouncingBallRange, StudyConfig};
use crate::study::{compute_study, eigenpair_row, fit_rows, ScalingRow};

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "rectangle spectrum oracle"),
    (2, "eigenvalue convergence order"),
    (3, "discrete gradient identity"),
    (4, "rellich identity"),
    (5, "explicit quasimode family"),
    (6, "wing lower-bound consistency sweep"),
    (7, "parity balance of wing masses"),
    (8, "weyl count"),
    (9, "q bounded by w on the arcs"),
    (10, "study determinism"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub summary: String,
    pub measured: BTreeMap<String, Value>,
    pub reason: Option<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "NOT-RUN",
        };
        let mut s = format!("criterion {:>2} [{tag}] {}: {}", self.id, self.name, self.summary);
        if let Some(r) = &self.reason {
            s.push_str(&format!(" ({r})"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptConfig {
    /// Mesh file for the α = β = 1 stadium sweep; built in memory when absent.
    pub stadium_mesh: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Criterion ids to run; empty means all.
    pub criteria: Vec<u32>,
    /// Pool sizes compared by the determinism criterion.
    pub determinism_threads: Vec<usize>,
}

impl Default for AcceptConfig {
    fn default() -> Self {
        AcceptConfig {
            stadium_mesh: None,
            output_dir: PathBuf::from("out/accept"),
            criteria: vec![],
            determinism_threads: vec![1, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub passed: usize,
    pub failed: usize,
    pub not_run: usize,
    pub criteria: Vec<CriterionResult>,
}

/// Measurements being collected for one criterion.
struct Record {
    measured: BTreeMap<String, Value>,
}

impl Record {
    fn new() -> Self {
        Record { measured: BTreeMap::new() }
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        self.measured.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn done(self, id: u32, pass: bool, summary: String, reason: Option<String>) -> CriterionResult {
        CriterionResult {
            id,
            name: name_of(id).to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            summary,
            measured: self.measured,
            reason,
        }
    }
}

fn name_of(id: u32) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

fn errored(id: u32, e: anyhow::Error) -> CriterionResult {
    CriterionResult {
        id,
        name: name_of(id).to_string(),
        status: Status::Fail,
        summary: "stage error".into(),
        measured: BTreeMap::new(),
        reason: Some(format!("{e:#}")),
    }
}

fn not_run(id: u32, reason: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name_of(id).to_string(),
        status: Status::NotRun,
        summary: "skipped".into(),
        measured: BTreeMap::new(),
        reason: Some(reason),
    }
}

/// `(kπ/(2α))² + (mπ/(2β))²`, lowest `count`.
pub fn rectangle_oracle(alpha: f64, beta: f64, count: usize) -> Vec<f64> {
    let mut v = Vec::new();
    for k in 1..=40 {
        for m in 1..=40 {
            v.push((k as f64 * PI / (2.0 * alpha)).powi(2) + (m as f64 * PI / (2.0 * beta)).powi(2));
        }
    }
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

fn build(domain: Domain, h: f64) -> anyhow::Result<(TriMesh, OperatorPair)> {
    let mesh = TriMesh::build(domain, h)?;
    let op = OperatorPair::assemble(&mesh)?;
    Ok((mesh, op))
}

pub const SWEEP_LAMBDASQ: f64 = 400.0;
pub const SWEEP_H: f64 = 0.02;

/// Every eigenpair of the unit stadium below `SWEEP_LAMBDASQ`.
pub struct Sweep {
    pub mesh: TriMesh,
    pub op: OperatorPair,
    pub pairs: Vec<Eigenpair>,
    pub rows: Vec<ScalingRow>,
    pub count_below: usize,
}

impl Sweep {
    pub fn compute(mesh_file: Option<&PathBuf>) -> anyhow::Result<Sweep> {
        let domain = Domain::Stadium { alpha: 1.0, beta: 1.0 };
        let mesh = match mesh_file {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                TriMesh::from_text(domain, &text)?
            }
            None => TriMesh::build(domain, SWEEP_H)?,
        };
        let op = OperatorPair::assemble(&mesh)?;
        let perm = ordering(&op);
        let window = SpectralWindow::from_range(0.0, SWEEP_LAMBDASQ)?;
        let pairs = solve_window_with(&op, window, usize::MAX, &SolverOptions::default(), &perm)?;
        let count_below = count_below_with(&op, SWEEP_LAMBDASQ, &perm)?;
        let cfg = StudyConfig { domain, ..Default::default() };
        let params = cfg.observe_params();
        let rows = pairs
            .iter()
            .map(|p| eigenpair_row(&mesh, &op, &cfg, &params, 0, None, p))
            .collect::<stadium_core::Result<Vec<_>>>()?;
        Ok(Sweep { mesh, op, pairs, rows, count_below })
    }
}

/// Shared state so the expensive sweep runs once.
pub struct Acceptance {
    pub config: AcceptConfig,
    sweep: OnceLock<Result<Sweep, String>>,
}

impl Acceptance {
    pub fn new(config: AcceptConfig) -> Self {
        Acceptance { config, sweep: OnceLock::new() }
    }

    fn sweep(&self) -> Result<&Sweep, String> {
        self.sweep
            .get_or_init(|| Sweep::compute(self.config.stadium_mesh.as_ref()).map_err(|e| format!("{e:#}")))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn missing_mesh(&self) -> Option<String> {
        match &self.config.stadium_mesh {
            Some(p) if !p.exists() => Some(format!("mesh file {} not found", p.display())),
            _ => None,
        }
    }

    pub fn run(&self, id: u32) -> CriterionResult {
        let needs_sweep = matches!(id, 3 | 6 | 7 | 8);
        if needs_sweep {
            if let Some(reason) = self.missing_mesh() {
                return not_run(id, reason);
            }
        }
        let res = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => self.criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => self.criterion_6(),
            7 => self.criterion_7(),
            8 => self.criterion_8(),
            9 => criterion_9(),
            10 => self.criterion_10(),
            _ => return not_run(id, format!("no criterion {id}")),
        };
        res.unwrap_or_else(|e| errored(id, e))
    }

    pub fn run_all(&self) -> Manifest {
        let ids: Vec<u32> = if self.config.criteria.is_empty() {
            CRITERIA.iter().map(|c| c.0).collect()
        } else {
            self.config.criteria.clone()
        };
        let criteria: Vec<CriterionResult> = ids.into_iter().map(|id| self.run(id)).collect();
        let count = |s: Status| criteria.iter().filter(|c| c.status == s).count();
        Manifest { passed: count(Status::Pass), failed: count(Status::Fail), not_run: count(Status::NotRun), criteria }
    }

    fn sweep_or_err(&self) -> anyhow::Result<&Sweep> {
        self.sweep().map_err(|e| anyhow::anyhow!("stadium sweep failed: {e}"))
    }

    fn criterion_3(&self) -> anyhow::Result<CriterionResult> {
        let mut rec = Record::new();
        let sweep = self.sweep_or_err()?;
        let (_, rop) = build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.02)?;
        let rect = lowest(&rop, 10)?;
        let worst = |op: &OperatorPair, pairs: &[Eigenpair]| -> anyhow::Result<f64> {
            let mut w = 0.0f64;
            for p in pairs {
                let mode = ModeField::from_eigenpair(op, p)?;
                let g = gradient_identity(op, &mode.vector, mode.lambdasq(), &mode.residual);
                w = w.max(g.discrepancy.abs() / g.grad_norm_sq);
            }
            Ok(w)
        };
        let ws = worst(&sweep.op, &sweep.pairs)?;
        let wr = worst(&rop, &rect)?;
        let total = sweep.pairs.len() + rect.len();
        rec.set("eigenpairs", total);
        rec.set("worst_relative_stadium", ws);
        rec.set("worst_relative_rectangle", wr);
        let w = ws.max(wr);
        Ok(rec.done(3, w <= 1e-12, format!("worst relative discrepancy {w:.2e} over {total} eigenpairs (<= 1e-12)"), None))
    }

    fn criterion_6(&self) -> anyhow::Result<CriterionResult> {
        let mut rec = Record::new();
        let sweep = self.sweep_or_err()?;
        let rows = &sweep.rows;
        let min = |f: &dyn Fn(&ScalingRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
        let min_wing = min(&|r| r.report.wing_mass);
        let min_flux = min(&|r| r.report.flux_weighted);
        let min_nd = min(&|r| r.report.lhs.normderiv);
        let min_l2 = min(&|r| r.report.lhs.l2);
        let min_l2bis = min(&|r| r.report.lhs.l2bis);
        let fits = fit_rows(rows);
        let slope = fits.wing_mass.as_ref().map(|f| f.slope);
        rec.set("modes", rows.len());
        rec.set("min_wing_mass", min_wing);
        rec.set("min_flux_weighted", min_flux);
        rec.set("c_star_lhs_normderiv", min_nd);
        rec.set("c_star_lhs_L2", min_l2);
        rec.set("c_star_lhs_L2bis", min_l2bis);
        rec.set("c_star_lambda4_wing_mass", min(&|r| r.lambda4_wing_mass()));
        rec.set("c_star_lambda2_wing_norm", min(&|r| r.lambda2_wing_norm()));
        rec.set("wing_mass_fit", &fits.wing_mass);
        rec.set("flux_weighted_fit", &fits.flux_weighted);
        let positive = !rows.is_empty() && min_wing > 0.0 && min_flux > 0.0 && min_nd > 0.0 && min_l2 > 0.0 && min_l2bis > 0.0;
        let slope_ok = slope.is_some_and(|s| s >= -4.5);
        Ok(rec.done(
            6,
            positive && slope_ok,
            format!(
                "{} modes, min wing_mass {min_wing:.3e}, min flux {min_flux:.3e}, wing_mass slope {} (>= -4.5)",
                rows.len(),
                slope.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into())
            ),
            None,
        ))
    }

    fn criterion_7(&self) -> anyhow::Result<CriterionResult> {
        let mut rec = Record::new();
        let sweep = self.sweep_or_err()?;
        let rows = &sweep.rows;
        // clusters of numerically coincident eigenvalues
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if (r.lambdasq - rows[*c.last().unwrap()].lambdasq).abs() <= 1e-6 * r.lambdasq => c.push(i),
                _ => clusters.push(vec![i]),
            }
        }
        let mut worst_single = 0.0f64;
        let mut worst_cluster = 0.0f64;
        let mut degenerate = 0;
        for c in &clusters {
            let d: f64 = c.iter().map(|&i| rows[i].report.wing_mass_plus - rows[i].report.wing_mass_minus).sum::<f64>().abs();
            if c.len() == 1 {
                worst_single = worst_single.max(d);
            } else {
                degenerate += 1;
                worst_cluster = worst_cluster.max(d);
            }
        }
        rec.set("modes", rows.len());
        rec.set("degenerate_clusters", degenerate);
        rec.set("worst_nondegenerate", worst_single);
        rec.set("worst_cluster", worst_cluster);
        let worst = worst_single.max(worst_cluster);
        Ok(rec.done(
            7,
            worst <= 1e-8,
            format!("max |mass(W+) - mass(W-)| = {worst:.2e} over {} clusters (<= 1e-8)", clusters.len()),
            None,
        ))
    }

    fn criterion_8(&self) -> anyhow::Result<CriterionResult> {
        let mut rec = Record::new();
        let sweep = self.sweep_or_err()?;
        let g = StadiumGeometry::new(1.0, 1.0)?;
        let e = SWEEP_LAMBDASQ;
        let weyl = g.area() * e / (4.0 * PI) - g.perimeter() * e.sqrt() / (4.0 * PI);
        let n = sweep.count_below;
        let rel = (n as f64 - weyl).abs() / weyl;
        rec.set("count_below", n);
        rec.set("eigenpairs_found", sweep.pairs.len());
        rec.set("weyl_with_boundary", weyl);
        rec.set("weyl_leading", g.area() * e / (4.0 * PI));
        rec.set("relative_deviation", rel);
        Ok(rec.done(
            8,
            rel <= 0.1 && sweep.pairs.len() == n,
            format!("N(400) = {n} (found {}), Weyl {weyl:.2}, deviation {:.2}% (<= 10%)", sweep.pairs.len(), 100.0 * rel),
            None,
        ))
    }

    fn criterion_10(&self) -> anyhow::Result<CriterionResult> {
        let mut rec = Record::new();
        let cfg = determinism_config();
        let mut outputs: Vec<(String, String)> = Vec::new();
        outputs.push(("default".into(), compute_study(&cfg)?.csv));
        for &t in &self.config.determinism_threads {
            outputs.push((format!("threads={t}"), with_threads(t, || compute_study(&cfg))??.csv));
        }
        outputs.push(("rerun".into(), compute_study(&cfg)?.csv));
        let reference = &outputs[0].1;
        let mismatched: Vec<&str> = outputs.iter().filter(|o| &o.1 != reference).map(|o| o.0.as_str()).collect();
        let rows = reference.lines().count().saturating_sub(1);
        rec.set("runs", outputs.iter().map(|o| o.0.clone()).collect::<Vec<_>>());
        rec.set("rows", rows);
        rec.set("csv_bytes", reference.len());
        rec.set("mismatched", &mismatched);
        rec.set("parallel_backend", stadium_core::par::is_parallel());
        Ok(rec.done(
            10,
            mismatched.is_empty() && rows > 0,
            format!("{} runs, {rows} rows, byte-identical: {}", outputs.len(), mismatched.is_empty()),
            None,
        ))
    }
}

/// Small bouncing-ball study used for the determinism check.
pub fn determinism_config() -> StudyConfig {
    StudyConfig {
        h: 0.1,
        refinements: 0,
        bouncing_ball: Some(BouncingBallRange { n_min: 1, n_max: 4, halfwidth: 6.0 }),
        ..Default::default()
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    Ok(f())
}

pub fn criterion_1() -> anyhow::Result<CriterionResult> {
    let mut rec = Record::new();
    let t0 = Instant::now();
    let (_, op) = build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.02)?;
    let pairs = lowest(&op, 10)?;
    let within_budget = t0.elapsed().as_secs_f64() <= 60.0;
    let exact = rectangle_oracle(2.0, 1.0, 10);
    let computed: Vec<f64> = pairs.iter().map(|p| p.lambdasq).collect();
    let rel: Vec<f64> = computed.iter().zip(&exact).map(|(c, e)| (c - e).abs() / e).collect();
    let worst = rel.iter().copied().fold(0.0, f64::max);
    rec.set("computed", &computed);
    rec.set("exact", &exact);
    rec.set("relative_errors", &rel);
    rec.set("within_60s", within_budget);
    let pass = computed.len() == 10 && worst <= 0.005 && within_budget;
    Ok(rec.done(1, pass, format!("worst relative error {:.3}% (<= 0.5%), within 60 s: {within_budget}", 100.0 * worst), None))
}

pub fn criterion_2() -> anyhow::Result<CriterionResult> {
    let mut rec = Record::new();
    let exact = rectangle_oracle(2.0, 1.0, 1)[0];
    let mut errs = Vec::new();
    for h in [0.04, 0.02] {
        let (_, op) = build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, h)?;
        errs.push((lowest(&op, 1)?[0].lambdasq - exact).abs());
    }
    let ratio = errs[0] / errs[1];
    rec.set("error_h0.04", errs[0]);
    rec.set("error_h0.02", errs[1]);
    rec.set("ratio", ratio);
    Ok(rec.done(2, ratio >= 3.5, format!("error ratio {ratio:.3} (>= 3.5)"), None))
}

/// Lowest stadium modes checked for Rellich convergence.
pub const RELLICH_MODES: usize = 8;
/// Refinements of the h = 0.04 stadium mesh.
pub const RELLICH_REFINEMENTS: usize = 2;

pub fn criterion_4() -> anyhow::Result<CriterionResult> {
    let mut rec = Record::new();
    // rectangle closed form, unnormalised k = m = 1 mode
    let exact = PI * PI / 4.0;
    let mut rect = Vec::new();
    for h in [0.02, 0.01] {
        let (mesh, op) = build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, h)?;
        let u = op.interpolate(&mesh, |p| (PI * (p[0] + 2.0) / 4.0).sin() * (PI * (p[1] + 1.0) / 2.0).sin());
        let lsq = (PI / 4.0).powi(2) + (PI / 2.0).powi(2);
        let zero = stadium_core::operators::FieldVector::zeros(op.num_dofs());
        let field = VectorFieldSpec::new(FieldKind::XdX, 2.0, 1.0, lsq.sqrt());
        let r = rellich_terms(&mesh, &op, &u, lsq, &zero, &field)?;
        rect.push((r.residual / exact, (r.lhs - exact).abs() / exact));
    }
    rec.set("rectangle_relative_h0.02", rect[0].0);
    rec.set("rectangle_relative_h0.01", rect[1].0);
    rec.set("rectangle_lhs_error_h0.02", rect[0].1);
    rec.set("rectangle_lhs_error_h0.01", rect[1].1);
    let rect_ok = rect[0].0 <= 1e-3 && rect[1].0 <= 2.5e-4;

    // Stadium eigenpairs on a mesh and two refinements. Per-mode residuals
    // are signed errors that can cross zero between levels, so the measure
    // is the mean relative residual over the modes at each level.
    let mut meshes = vec![TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.04)?];
    for _ in 0..RELLICH_REFINEMENTS {
        let next = meshes.last().unwrap().refine();
        meshes.push(next);
    }
    let mut relative: Vec<Vec<[f64; 4]>> = Vec::new();
    let mut lambdas = Vec::new();
    for mesh in &meshes {
        let op = OperatorPair::assemble(mesh)?;
        let pairs = lowest(&op, RELLICH_MODES)?;
        let mut level = Vec::new();
        for p in &pairs {
            let mode = ModeField::from_eigenpair(&op, p)?;
            let mut res = [0.0; 4];
            for (k, kind) in FieldKind::ALL.iter().enumerate() {
                let field = VectorFieldSpec::new(*kind, 1.0, 1.0, mode.lambda);
                res[k] = rellich_residual(mesh, &op, &mode, &field)?.relative;
            }
            level.push(res);
        }
        relative.push(level);
        lambdas.push(pairs.iter().map(|p| p.lambdasq).collect::<Vec<_>>());
    }
    let mut worst = f64::INFINITY;
    let mut mean_ratios = BTreeMap::new();
    let mut means = BTreeMap::new();
    let mut per_mode = BTreeMap::new();
    for (k, kind) in FieldKind::ALL.iter().enumerate() {
        let mean: Vec<f64> =
            relative.iter().map(|lvl| lvl.iter().map(|r| r[k]).sum::<f64>() / lvl.len() as f64).collect();
        let ratios: Vec<f64> = mean.windows(2).map(|w| w[0] / w[1]).collect();
        worst = ratios.iter().copied().fold(worst, f64::min);
        let modes: Vec<Vec<f64>> = relative
            .windows(2)
            .map(|w| (0..RELLICH_MODES).map(|i| w[0][i][k] / w[1][i][k]).collect())
            .collect();
        means.insert(kind.name().to_string(), mean);
        mean_ratios.insert(kind.name().to_string(), ratios);
        per_mode.insert(kind.name().to_string(), modes);
    }
    rec.set("stadium_h", meshes.iter().map(|m| m.h).collect::<Vec<_>>());
    rec.set("stadium_lambdasq", &lambdas);
    rec.set("stadium_mean_relative_residual", &means);
    rec.set("stadium_mean_ratio_per_refinement", &mean_ratios);
    rec.set("stadium_per_mode_ratios", &per_mode);
    rec.set("stadium_worst_ratio", worst);
    Ok(rec.done(
        4,
        rect_ok && worst >= 1.4,
        format!(
            "rectangle {:.2e} / {:.2e} (<= 1e-3 / 2.5e-4), stadium worst per-refinement decrease {worst:.2} of the mean over {RELLICH_MODES} modes x 4 fields (>= 1.4)",
            rect[0].0, rect[1].0
        ),
        None,
    ))
}

pub const QUASIMODE_N: [u32; 3] = [5, 10, 20];
pub const QUASIMODE_FINE_H: f64 = 0.005;

pub fn criterion_5() -> anyhow::Result<CriterionResult> {
    let mut rec = Record::new();
    let domain = Domain::Stadium { alpha: 1.0, beta: 1.0 };
    let mut measured = Vec::new();
    let mut analytic = Vec::new();
    let mut wing = Vec::new();
    let mut hs = Vec::new();
    for n in QUASIMODE_N {
        let spec = QuasimodeSpec::new(n, -0.5, 0.5, Profile::Sin4);
        let h = spec.max_h(1.0);
        let (mesh, op) = build(domain, h)?;
        let mode = explicit_quasimode(&spec, &mesh, &op)?;
        measured.push(mode.f_norm);
        analytic.push(spec.analytic_ratio());
        wing.push(region_mass(&mesh, &op, &mode.vector, &Region::Wings)?);
        hs.push(mesh.h);
    }
    // the same family on a mesh well below the floor, for the record
    let (fine_mesh, fine_op) = build(domain, QUASIMODE_FINE_H)?;
    let mut fine = Vec::new();
    for n in QUASIMODE_N {
        let spec = QuasimodeSpec::new(n, -0.5, 0.5, Profile::Sin4);
        fine.push(explicit_quasimode(&spec, &fine_mesh, &fine_op)?.f_norm);
    }
    rec.set("measured_ratio_fine_h", &fine);
    rec.set("fine_h", fine_mesh.h);
    let rel: Vec<f64> = measured.iter().zip(&analytic).map(|(m, a)| (m - a).abs() / a).collect();
    let lo = measured.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = measured.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let worst = rel.iter().copied().fold(0.0, f64::max);
    rec.set("n", QUASIMODE_N);
    rec.set("h", &hs);
    rec.set("measured_ratio", &measured);
    rec.set("analytic_ratio", &analytic);
    rec.set("relative_error", &rel);
    rec.set("n_spread", spread);
    rec.set("wing_mass", &wing);
    let wing_zero = wing.iter().all(|&w| w == 0.0);
    let pass = worst <= 0.1 && spread <= 0.02 && wing_zero;
    let reason = (!pass).then(|| {
        "the discrete residual of the nodal interpolant carries the P1 dispersion error, which at a fixed \
         number of elements per wavelength grows like λ²(λh)²; it only drops below 10% for h far under the floor"
            .to_string()
    });
    Ok(rec.done(
        5,
        pass,
        format!(
            "worst ratio error {:.1}% (<= 10%), n-spread {:.1}% (<= 2%), wing mass exactly 0: {wing_zero}",
            100.0 * worst,
            100.0 * spread
        ),
        reason,
    ))
}

pub const ARC_SAMPLES: usize = 10_000;

pub fn criterion_9() -> anyhow::Result<CriterionResult> {
    let mut rec = Record::new();
    let g = StadiumGeometry::new(1.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..ARC_SAMPLES {
        let plus = rng.random_bool(0.5);
        let t: f64 = rng.random_range(-PI / 2.0..=PI / 2.0);
        let theta = if plus { t } else { t + PI };
        let p = g.arc_point(plus, theta);
        let n = g.boundary_normal(p)?;
        let q = p[0] * n[0];
        let w = g.weight_w(p)?;
        if q.abs() > 4.0 * w {
            violations += 1;
        }
        if w > 0.0 {
            worst = worst.max(q.abs() / w);
        }
    }
    rec.set("samples", ARC_SAMPLES);
    rec.set("violations", violations);
    rec.set("max_q_over_w", worst);
    Ok(rec.done(9, violations == 0, format!("max |q|/w = {worst:.4} over {ARC_SAMPLES} arc points (<= 4)"), None))
}

/// Runs the selected criteria and writes `acceptance.json`; returns the
/// manifest and the path written.
pub fn acceptance(config: &AcceptConfig) -> anyhow::Result<(Manifest, PathBuf)> {
    let acc = Acceptance::new(config.clone());
    let manifest = acc.run_all();
    let dir = output_override().unwrap_or_else(|| config.output_dir.clone());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("acceptance.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok((manifest, path))
}
