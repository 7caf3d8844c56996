//! Mode records `(u, λ, f)` with `(Δ - λ²)u = f`: eigenpairs, the explicit
//! separable family `φ(x) cos((n + ½)πy/β)` supported in the rectangle, and
//! combinations of eigenpairs from one spectral window.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigensolve::{Eigenpair, SpectralWindow};
use crate::error::{LabError, Result};
use crate::mesh::TriMesh;
use crate::observables::{region_mass, Region};
use crate::operators::{FieldVector, OperatorPair};
use crate::quadrature::integrate_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Eigenpair,
    ExplicitQuasimode,
    SpectralWindowCombination,
}

/// Bump profiles on `[γ, δ]`, written in `s = sin(π(x - γ)/(δ - γ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `s⁴`, C³ at the endpoints.
    #[default]
    Sin4,
    /// `s⁶`, C⁵ at the endpoints.
    Sin6,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Sin4 => "sin4",
            Profile::Sin6 => "sin6",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sin4" => Some(Profile::Sin4),
            "sin6" => Some(Profile::Sin6),
            _ => None,
        }
    }

    fn power(self) -> i32 {
        match self {
            Profile::Sin4 => 4,
            Profile::Sin6 => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeSpec {
    pub n: u32,
    pub gamma: f64,
    pub delta: f64,
    #[serde(default)]
    pub profile: Profile,
}

impl QuasimodeSpec {
    pub fn new(n: u32, gamma: f64, delta: f64, profile: Profile) -> Self {
        QuasimodeSpec { n, gamma, delta, profile }
    }

    pub fn validate(&self, alpha: f64) -> Result<()> {
        let tol = 1e-12 * alpha.max(1.0);
        if !(self.gamma < self.delta && self.gamma >= -alpha - tol && self.delta <= alpha + tol) {
            return Err(LabError::Invalid(format!(
                "quasimode support [{}, {}] must satisfy -α <= γ < δ <= α with α = {alpha}",
                self.gamma, self.delta
            )));
        }
        Ok(())
    }

    pub fn lambda(&self, beta: f64) -> f64 {
        (self.n as f64 + 0.5) * PI / beta
    }

    /// Largest mesh size that resolves the transverse wavelength.
    pub fn max_h(&self, beta: f64) -> f64 {
        beta / (8.0 * (self.n as f64 + 0.5))
    }

    /// `φ, φ', φ''` at `x` (zero outside the support).
    pub fn profile_derivs(&self, x: f64) -> [f64; 3] {
        if x <= self.gamma || x >= self.delta {
            return [0.0; 3];
        }
        let k = PI / (self.delta - self.gamma);
        let (s, c) = (k * (x - self.gamma)).sin_cos();
        let p = self.profile.power();
        let pf = p as f64;
        let sp2 = s.powi(p - 2);
        [
            sp2 * s * s,
            k * pf * sp2 * s * c,
            k * k * pf * sp2 * ((pf - 1.0) * c * c - s * s),
        ]
    }

    fn norms_1d(&self) -> (f64, f64, f64) {
        let panels = 256;
        let d = |i: usize| move |x: f64| self.profile_derivs(x)[i].powi(2);
        (
            integrate_1d(d(0), self.gamma, self.delta, panels),
            integrate_1d(d(1), self.gamma, self.delta, panels),
            integrate_1d(d(2), self.gamma, self.delta, panels),
        )
    }

    /// Analytic `‖f‖/‖u‖ = ‖φ''‖/‖φ‖`; the transverse factors cancel.
    pub fn analytic_ratio(&self) -> f64 {
        let (p0, _, p2) = self.norms_1d();
        (p2 / p0).sqrt()
    }

    /// `(‖φ‖², ‖φ'‖², ‖φ''‖²)` on `[γ, δ]`.
    pub fn profile_norms(&self) -> (f64, f64, f64) {
        self.norms_1d()
    }

    fn transverse(&self, y: f64, beta: f64) -> f64 {
        (self.lambda(beta) * y).cos()
    }
}

#[derive(Debug, Clone)]
pub struct ModeField {
    /// M-normalised.
    pub vector: FieldVector,
    pub lambda: f64,
    /// Discrete residual `f` (M-Riesz representative of `Ku - λ²Mu`).
    pub residual: FieldVector,
    /// M-norm of `residual`.
    pub f_norm: f64,
    /// Interpolated closed-form residual, when one exists.
    pub analytic_residual: Option<FieldVector>,
    pub f_norm_analytic: Option<f64>,
    pub provenance: Provenance,
}

impl ModeField {
    pub fn lambdasq(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn from_eigenpair(opair: &OperatorPair, pair: &Eigenpair) -> Result<ModeField> {
        let mut u = pair.vector.clone();
        let nrm = opair.m_norm(&u.0);
        u.0.iter_mut().for_each(|v| *v /= nrm);
        let residual = opair.residual(&u, pair.lambdasq)?;
        let f_norm = opair.m_norm(&residual.0);
        Ok(ModeField {
            vector: u,
            lambda: pair.lambda,
            residual,
            f_norm,
            analytic_residual: None,
            f_norm_analytic: None,
            provenance: Provenance::Eigenpair,
        })
    }

    /// The residual used by identity checks: closed form when known, discrete otherwise.
    pub fn identity_residual(&self) -> &FieldVector {
        self.analytic_residual.as_ref().unwrap_or(&self.residual)
    }
}

/// Nodal interpolant of `φ(x) cos((n + ½)πy/β)`, M-normalised, with
/// `λ = (n + ½)π/β`.
pub fn explicit_quasimode(spec: &QuasimodeSpec, mesh: &TriMesh, opair: &OperatorPair) -> Result<ModeField> {
    let alpha = mesh.domain.alpha();
    let beta = mesh.domain.beta();
    spec.validate(alpha)?;
    let required = spec.max_h(beta);
    if mesh.h > required * (1.0 + 1e-12) {
        return Err(LabError::UnderResolved { h: mesh.h, required });
    }
    let lambda = spec.lambda(beta);
    let raw = opair.interpolate(mesh, |p| spec.profile_derivs(p[0])[0] * spec.transverse(p[1], beta));
    let nrm = opair.m_norm(&raw.0);
    if !(nrm > 0.0) {
        return Err(LabError::Invalid("quasimode support contains no interior vertex".into()));
    }
    let vector = raw.scaled(1.0 / nrm);
    let residual = opair.residual(&vector, lambda * lambda)?;
    let f_norm = opair.m_norm(&residual.0);
    let analytic =
        opair.interpolate(mesh, |p| -spec.profile_derivs(p[0])[2] * spec.transverse(p[1], beta)).scaled(1.0 / nrm);
    Ok(ModeField {
        vector,
        lambda,
        residual,
        f_norm,
        analytic_residual: Some(analytic),
        f_norm_analytic: Some(spec.analytic_ratio()),
        provenance: Provenance::ExplicitQuasimode,
    })
}

/// L² mass of the normalised quasimode in the wings.
pub fn wing_mass_of_quasimode(spec: &QuasimodeSpec, mesh: &TriMesh, opair: &OperatorPair) -> Result<f64> {
    let mode = explicit_quasimode(spec, mesh, opair)?;
    region_mass(mesh, opair, &mode.vector, &Region::Wings)
}

/// `u = Σ cᵢuᵢ` for eigenpairs of one window, with `λ² = center` and
/// `f = Σ cᵢ(λᵢ² - λ²)uᵢ`.
pub fn window_combination(opair: &OperatorPair, pairs: &[Eigenpair], coefficients: &[f64]) -> Result<ModeField> {
    if pairs.is_empty() {
        return Err(LabError::Invalid("window combination needs at least one eigenpair".into()));
    }
    if pairs.len() != coefficients.len() {
        return Err(LabError::Dimension { expected: pairs.len(), got: coefficients.len() });
    }
    let window: SpectralWindow = pairs[0].window;
    if pairs.iter().any(|p| p.window != window) {
        return Err(LabError::MismatchedWindows);
    }
    let csq: f64 = coefficients.iter().map(|c| c * c).sum();
    if !(csq > 0.0) {
        return Err(LabError::Invalid("coefficients must not all vanish".into()));
    }
    let scale = 1.0 / csq.sqrt();
    let lambdasq = window.center;
    let n = opair.num_dofs();
    let mut u = vec![0.0; n];
    let mut f = vec![0.0; n];
    for (p, &c) in pairs.iter().zip(coefficients) {
        let c = c * scale;
        let d = c * (p.lambdasq - lambdasq);
        for ((ui, fi), vi) in u.iter_mut().zip(f.iter_mut()).zip(&p.vector.0) {
            *ui += c * vi;
            *fi += d * vi;
        }
    }
    let f_norm = opair.m_norm(&f);
    Ok(ModeField {
        vector: FieldVector(u),
        lambda: lambdasq.sqrt(),
        residual: FieldVector(f),
        f_norm,
        analytic_residual: None,
        f_norm_analytic: None,
        provenance: Provenance::SpectralWindowCombination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{solve_window, SpectralWindow};
    use crate::mesh::Domain;

    #[test]
    fn lambda_and_window_centre() {
        let spec = QuasimodeSpec::new(10, -0.5, 0.5, Profile::Sin4);
        assert!((spec.lambda(1.0) - 10.5 * PI).abs() < 1e-12);
        assert!((spec.lambda(1.0) - 32.9867).abs() < 1e-4);
        let w = crate::eigensolve::bouncing_ball_window(10, 1.0, 1.0).unwrap();
        assert_eq!(spec.lambda(1.0).powi(2), w.center);
    }

    #[test]
    fn sin4_ratio_matches_closed_form() {
        for (g, d) in [(-0.5, 0.5), (-1.0, 0.3), (0.1, 0.2)] {
            let spec = QuasimodeSpec::new(5, g, d, Profile::Sin4);
            let l: f64 = d - g;
            let k = PI / l;
            let (p0, p1, _) = spec.profile_norms();
            assert!((p0 - l * 35.0 / 128.0).abs() < 1e-12 * l);
            assert!((p1 - k * k * l * 5.0 / 8.0).abs() < 1e-10 * k * k * l);
            // ∫ (φ'')² = k⁴ L · 16 · ⟨s⁴(3c² - s²)²⟩ = 4 k⁴ L
            let ratio = (4.0 * k.powi(4) * l / (l * 35.0 / 128.0)).sqrt();
            assert!((spec.analytic_ratio() - ratio).abs() / ratio < 1e-10);
        }
        let r5 = QuasimodeSpec::new(5, -0.5, 0.5, Profile::Sin4).analytic_ratio();
        let r50 = QuasimodeSpec::new(50, -0.5, 0.5, Profile::Sin4).analytic_ratio();
        assert!((r5 - r50).abs() < 1e-12 * r5);
    }

    #[test]
    fn profile_derivatives_consistent() {
        for profile in [Profile::Sin4, Profile::Sin6] {
            let spec = QuasimodeSpec::new(1, -0.3, 0.7, profile);
            let e = 1e-5;
            for x in [-0.2, 0.0, 0.31, 0.6] {
                let d = spec.profile_derivs(x);
                let fd1 = (spec.profile_derivs(x + e)[0] - spec.profile_derivs(x - e)[0]) / (2.0 * e);
                let fd2 = (spec.profile_derivs(x + e)[1] - spec.profile_derivs(x - e)[1]) / (2.0 * e);
                assert!((d[1] - fd1).abs() < 1e-6 * (1.0 + d[1].abs()));
                assert!((d[2] - fd2).abs() < 1e-5 * (1.0 + d[2].abs()));
            }
        }
    }

    #[test]
    fn refuses_under_resolved_mesh() {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.05).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let spec = QuasimodeSpec::new(5, -0.5, 0.5, Profile::Sin4);
        match explicit_quasimode(&spec, &mesh, &op) {
            Err(LabError::UnderResolved { required, .. }) => assert!((required - 1.0 / 44.0).abs() < 1e-15),
            other => panic!("expected refusal, got {other:?}"),
        }
        let bad = QuasimodeSpec::new(0, 0.5, 0.2, Profile::Sin4);
        assert!(bad.validate(1.0).is_err());
    }

    #[test]
    fn quasimode_is_normalised_and_confined() {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.05).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let spec = QuasimodeSpec::new(1, -0.5, 0.5, Profile::Sin4);
        let mode = explicit_quasimode(&spec, &mesh, &op).unwrap();
        assert!((op.m_inner(&mode.vector.0, &mode.vector.0) - 1.0).abs() < 1e-12);
        assert_eq!(wing_mass_of_quasimode(&spec, &mesh, &op).unwrap(), 0.0);
        let full = QuasimodeSpec::new(1, -1.0, 1.0, Profile::Sin4);
        assert_eq!(wing_mass_of_quasimode(&full, &mesh, &op).unwrap(), 0.0);
        assert_eq!(mode.provenance, Provenance::ExplicitQuasimode);
    }

    #[test]
    fn window_combination_rules() {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let w = SpectralWindow::new(60.0, 25.0).unwrap();
        let pairs = solve_window(&op, w, 100).unwrap();
        assert!(pairs.len() >= 2);

        let single = window_combination(&op, &pairs[..1], &[1.0]).unwrap();
        assert_eq!(single.vector, pairs[0].vector);
        assert!((single.lambda - 60f64.sqrt()).abs() < 1e-14);

        let (a, b) = (&pairs[0], pairs.last().unwrap());
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let two = window_combination(&op, &[a.clone(), b.clone()], &[c, c]).unwrap();
        let expect = 0.5 * ((a.lambdasq - 60.0).powi(2) + (b.lambdasq - 60.0).powi(2));
        assert!((two.f_norm.powi(2) - expect).abs() <= 1e-10 * expect.max(1.0));
        assert!(two.f_norm <= w.halfwidth);

        let mut other = b.clone();
        other.window = SpectralWindow::new(61.0, 25.0).unwrap();
        assert!(matches!(window_combination(&op, &[a.clone(), other], &[c, c]), Err(LabError::MismatchedWindows)));

        // a pair paired with λ = its own root has residual at solver tolerance
        let own = SpectralWindow::new(a.lambdasq, 1.0).unwrap();
        let mut ap = a.clone();
        ap.window = own;
        let m = window_combination(&op, &[ap], &[1.0]).unwrap();
        assert!(m.f_norm <= crate::eigensolve::SOLVER_TOL);
    }
}
