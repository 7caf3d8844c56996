//! Identity checks on modes: the Rellich commutator identity
//!
//! ```text
//! ⟨u, [Δ - λ², A]u⟩ = ⟨2Au + (div A)u, f⟩ + ∫_{∂S} (∂_N u)(Au) dl
//! ```
//!
//! for each commutant, its `x∂_x` specialisation with the wing localisation of
//! the boundary term, and the left-hand sides of the wing lower bounds.
//!
//! On the boundary a zero-trace `u` has `∇u = (∂_N u)N`, so the boundary
//! integrand is `(A·N)(∂_N u)²` with `∂_N u` from the variational trace.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{commutator_form, dx_norm_sq, volume_term, FieldKind, VectorFieldSpec};
use crate::mesh::{BoundaryTag, TriMesh};
use crate::observables::{normal_trace, NormalTrace, ObservableReport, TraceMethod};
use crate::operators::{FieldVector, OperatorPair};
use crate::quasimode::ModeField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RellichReport {
    pub kind: FieldKind,
    pub lhs: f64,
    pub rhs_volume: f64,
    pub rhs_boundary: f64,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
}

impl RellichReport {
    pub const CSV_HEADER: &'static str = "field,lhs,rhs_volume,rhs_boundary,residual,scale,relative";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.kind.name(),
            self.lhs,
            self.rhs_volume,
            self.rhs_boundary,
            self.residual,
            self.scale,
            self.relative
        )
    }
}

/// `∫ (A·N)(∂_N u)² dl` from a precomputed trace.
pub fn boundary_term(field: &VectorFieldSpec, trace: &NormalTrace) -> f64 {
    trace.integrate(|q| field.normal_component(q.point, q.normal))
}

/// Rellich terms for raw `(u, λ², f)`; `u` need not be normalised.
pub fn rellich_terms(
    mesh: &TriMesh,
    opair: &OperatorPair,
    u: &FieldVector,
    lambdasq: f64,
    f: &FieldVector,
    field: &VectorFieldSpec,
) -> Result<RellichReport> {
    let trace = normal_trace(mesh, opair, u, lambdasq, f, TraceMethod::Variational)?;
    Ok(rellich_with_trace(mesh, opair, u, f, field, &trace))
}

pub fn rellich_with_trace(
    mesh: &TriMesh,
    opair: &OperatorPair,
    u: &FieldVector,
    f: &FieldVector,
    field: &VectorFieldSpec,
    trace: &NormalTrace,
) -> RellichReport {
    let lhs = commutator_form(field, u, mesh, opair);
    let rhs_volume = volume_term(field, u, f, mesh, opair);
    let rhs_boundary = boundary_term(field, trace);
    let residual = (lhs - rhs_volume - rhs_boundary).abs();
    let scale = lhs.abs().max(rhs_boundary.abs()).max(1.0);
    RellichReport { kind: field.kind, lhs, rhs_volume, rhs_boundary, residual, scale, relative: residual / scale }
}

/// Rellich identity for a mode, using its identity residual.
pub fn rellich_residual(mesh: &TriMesh, opair: &OperatorPair, mode: &ModeField, field: &VectorFieldSpec) -> Result<RellichReport> {
    rellich_terms(mesh, opair, &mode.vector, mode.lambdasq(), mode.identity_residual(), field)
}

/// The `x∂_x` quantity chain: `2‖u_x‖² = ∫ q(∂_N u)² dl + ⟨2x u_x + u, f⟩`
/// with `q = x N_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chain31 {
    pub ux_norm_sq: f64,
    pub boundary: f64,
    /// Boundary term restricted to edges where `q` can be nonzero: the wing
    /// arcs, or the vertical sides of the rectangle oracle.
    pub boundary_wing: f64,
    pub f_term: f64,
    /// `2‖u_x‖² - boundary - f_term`
    pub discrepancy: f64,
    pub relative: f64,
}

pub fn chain_3_1_terms(
    mesh: &TriMesh,
    opair: &OperatorPair,
    u: &FieldVector,
    lambdasq: f64,
    f: &FieldVector,
) -> Result<Chain31> {
    let trace = normal_trace(mesh, opair, u, lambdasq, f, TraceMethod::Variational)?;
    let b = mesh.domain.beta();
    let xdx = VectorFieldSpec::new(FieldKind::XdX, mesh.domain.alpha(), b, lambdasq.sqrt());
    let ux_norm_sq = dx_norm_sq(u, mesh, opair);
    let boundary = boundary_term(&xdx, &trace);
    let horizontal = [BoundaryTag::RectTop, BoundaryTag::RectBottom];
    let boundary_wing = trace.integrate(|q| if horizontal.contains(&q.tag) { 0.0 } else { q.point[0] * q.normal[0] });
    let f_term = volume_term(&xdx, u, f, mesh, opair);
    let discrepancy = 2.0 * ux_norm_sq - boundary - f_term;
    let scale = (2.0 * ux_norm_sq).abs().max(boundary.abs()).max(1.0);
    Ok(Chain31 { ux_norm_sq, boundary, boundary_wing, f_term, discrepancy, relative: discrepancy.abs() / scale })
}

pub fn chain_3_1(mesh: &TriMesh, opair: &OperatorPair, mode: &ModeField) -> Result<Chain31> {
    chain_3_1_terms(mesh, opair, &mode.vector, mode.lambdasq(), mode.identity_residual())
}

/// Left-hand sides of the three wing lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TheoremLhs {
    /// `‖f‖² + ∫ w (∂_N u)² dl`
    pub normderiv: f64,
    /// `‖f‖² + λ⁸ ‖u‖²_W`
    pub l2: f64,
    /// `λ²‖f‖² + λ⁴ ‖u‖²_W`
    pub l2bis: f64,
    /// `λ² ‖u‖_W`
    pub better: f64,
}

pub fn theorem_lhs(r: &ObservableReport) -> TheoremLhs {
    let l2 = r.lambda * r.lambda;
    let f2 = r.f_norm * r.f_norm;
    TheoremLhs {
        normderiv: f2 + r.flux_weighted,
        l2: f2 + l2.powi(4) * r.wing_mass,
        l2bis: l2 * f2 + l2 * l2 * r.wing_mass,
        better: l2 * r.wing_mass.max(0.0).sqrt(),
    }
}

/// Smallest `(x, y)·N` over the boundary Gauss points.
pub fn radial_boundary_factor_min(mesh: &TriMesh) -> f64 {
    mesh.boundary_quadrature(|_| true)
        .iter()
        .map(|q| q.point[0] * q.normal[0] + q.point[1] * q.normal[1])
        .fold(f64::INFINITY, f64::min)
}
