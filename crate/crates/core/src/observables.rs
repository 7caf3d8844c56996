//! Measured functionals of a mode: region and strip masses, normal-derivative
//! traces, boundary fluxes and the gradient identity.
//!
//! Every region used here is a union of vertical bands `lo ≤ x ≤ hi`, so
//! masses are integrated exactly: elements are clipped against the band and
//! the quadratic `u²` is integrated on the clipped polygon.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::Point;
use crate::linalg::{cg, Csr};
use crate::mesh::{BoundaryQuadPoint, BoundaryTag, TriMesh};
use crate::operators::{element_gradients, triangle_points, gradient_identity, FieldVector, GradientIdentity, OperatorPair};
use crate::par;
use crate::quadrature::TRI3;
use crate::quasimode::ModeField;
use crate::verify::{theorem_lhs, TheoremLhs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum Region {
    All,
    Rectangle,
    Wings,
    WingPlus,
    WingMinus,
    /// `lo ≤ x ≤ hi`
    XBand { lo: f64, hi: f64 },
    /// `[-α, γ₁] ∪ [γ₂, α]`
    Strips { gamma1: f64, gamma2: f64 },
    ZoneI { lambda: f64, delta: f64 },
    ZoneII { lambda: f64, delta: f64 },
    ZoneIII { lambda: f64, delta: f64 },
}

impl Region {
    /// Disjoint x-bands making up the region.
    pub fn bands(&self, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        let both = |lo: f64, hi: f64| vec![(-alpha - hi, -alpha - lo), (alpha + lo, alpha + hi)];
        let layer = |lambda: f64, delta: f64| delta / (lambda * lambda);
        match *self {
            Region::All => vec![(-inf, inf)],
            Region::Rectangle => vec![(-alpha, alpha)],
            Region::Wings => vec![(-inf, -alpha), (alpha, inf)],
            Region::WingPlus => vec![(alpha, inf)],
            Region::WingMinus => vec![(-inf, -alpha)],
            Region::XBand { lo, hi } => vec![(lo, hi)],
            Region::Strips { gamma1, gamma2 } => vec![(-alpha, gamma1), (gamma2, alpha)],
            Region::ZoneI { lambda, delta } => both(0.0, layer(lambda, delta)),
            Region::ZoneII { lambda, delta } => {
                let t = layer(lambda, delta);
                both(t, t.max(0.5 * beta))
            }
            Region::ZoneIII { lambda, delta } => both(layer(lambda, delta).max(0.5 * beta), inf),
        }
    }
}

/// Clip a convex polygon to `lo ≤ x ≤ hi`.
fn clip_band(poly: &[Point], lo: f64, hi: f64) -> Vec<Point> {
    let clip = |poly: Vec<Point>, keep: &dyn Fn(f64) -> bool, edge: f64| -> Vec<Point> {
        let mut out = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (ia, ib) = (keep(a[0]), keep(b[0]));
            if ia {
                out.push(a);
            }
            if ia != ib {
                let t = (edge - a[0]) / (b[0] - a[0]);
                out.push([edge, a[1] + t * (b[1] - a[1])]);
            }
        }
        out
    };
    let mut p = poly.to_vec();
    if lo.is_finite() {
        p = clip(p, &|x| x >= lo, lo);
    }
    if hi.is_finite() && p.len() >= 3 {
        p = clip(p, &|x| x <= hi, hi);
    }
    p
}

fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// `∫ u²` over element `t` intersected with the bands.
fn element_band_mass(mesh: &TriMesh, nodal: &[f64], t: usize, bands: &[(f64, f64)]) -> f64 {
    let p = triangle_points(mesh, t);
    let tri = mesh.triangles[t];
    let uv = [nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]];
    if uv == [0.0; 3] {
        return 0.0;
    }
    let xmin = p[0][0].min(p[1][0]).min(p[2][0]);
    let xmax = p[0][0].max(p[1][0]).max(p[2][0]);
    let (g, area) = element_gradients(p);
    let grad = [
        uv[0] * g[0][0] + uv[1] * g[1][0] + uv[2] * g[2][0],
        uv[0] * g[0][1] + uv[1] * g[1][1] + uv[2] * g[2][1],
    ];
    let u_at = |q: Point| uv[0] + grad[0] * (q[0] - p[0][0]) + grad[1] * (q[1] - p[0][1]);
    let mut total = 0.0;
    for &(lo, hi) in bands {
        if xmax <= lo || xmin >= hi {
            continue;
        }
        if xmin >= lo && xmax <= hi {
            let s = uv[0] * uv[0] + uv[1] * uv[1] + uv[2] * uv[2] + uv[0] * uv[1] + uv[1] * uv[2] + uv[0] * uv[2];
            total += area / 6.0 * s;
            continue;
        }
        let poly = clip_band(&p, lo, hi);
        for k in 1..poly.len().saturating_sub(1) {
            let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
            let ar = tri_area(a, b, c).abs();
            for (bary, w) in TRI3.points.iter().zip(TRI3.weights) {
                let q = [
                    bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
                    bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
                ];
                total += w * ar * u_at(q).powi(2);
            }
        }
    }
    total
}

/// `∫_region u²`.
pub fn region_mass(mesh: &TriMesh, opair: &OperatorPair, u: &FieldVector, region: &Region) -> Result<f64> {
    if u.len() != opair.num_dofs() {
        return Err(LabError::Dimension { expected: opair.num_dofs(), got: u.len() });
    }
    let bands = region.bands(mesh.domain.alpha(), mesh.domain.beta());
    let nodal = opair.dofs.to_nodal(&u.0);
    Ok(par::sum(mesh.triangles.len(), |t| element_band_mass(mesh, &nodal, t, &bands)))
}

/// Mass in the control strips `[-α, γ₁] ∪ [γ₂, α]`.
pub fn strip_mass(mesh: &TriMesh, opair: &OperatorPair, u: &FieldVector, gamma1: f64, gamma2: f64) -> Result<f64> {
    let alpha = mesh.domain.alpha();
    if !(-alpha <= gamma1 && gamma1 < gamma2 && gamma2 <= alpha) {
        return Err(LabError::Invalid(format!(
            "strips need -α <= γ₁ < γ₂ <= α, got γ₁={gamma1}, γ₂={gamma2}, α={alpha}"
        )));
    }
    region_mass(mesh, opair, u, &Region::Strips { gamma1, gamma2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    /// Weak boundary flux from the residual of the discrete equation.
    #[default]
    Variational,
    /// One-sided gradient of the adjacent element.
    Raw,
}

/// `∂_N u` at the boundary Gauss points.
#[derive(Debug, Clone)]
pub struct NormalTrace {
    pub points: Vec<BoundaryQuadPoint>,
    pub values: Vec<f64>,
    pub method: TraceMethod,
}

impl NormalTrace {
    /// `∫ weight·(∂_N u)² dl` over the points accepted by `weight`.
    pub fn integrate(&self, weight: impl Fn(&BoundaryQuadPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.values).map(|(q, g)| q.weight * weight(q) * g * g).sum()
    }
}

fn boundary_vertices(mesh: &TriMesh) -> (Vec<usize>, HashMap<usize, usize>) {
    let mut list = Vec::new();
    let mut index = HashMap::new();
    for e in &mesh.boundary_edges {
        for &v in &e.v {
            index.entry(v).or_insert_with(|| {
                list.push(v);
                list.len() - 1
            });
        }
    }
    (list, index)
}

/// Normal derivative of `u` on `∂S` given `(Δ - λ²)u = f`.
pub fn normal_trace(
    mesh: &TriMesh,
    opair: &OperatorPair,
    u: &FieldVector,
    lambdasq: f64,
    f: &FieldVector,
    method: TraceMethod,
) -> Result<NormalTrace> {
    if mesh.boundary_edges.is_empty() {
        return Err(LabError::EmptyBoundary);
    }
    for v in [u, f] {
        if v.len() != opair.num_dofs() {
            return Err(LabError::Dimension { expected: opair.num_dofs(), got: v.len() });
        }
    }
    let points = mesh.boundary_quadrature(|_| true);
    let nodal = opair.dofs.to_nodal(&u.0);
    let values = match method {
        TraceMethod::Variational => {
            let (bverts, bindex) = boundary_vertices(mesh);
            let fnodal = opair.dofs.to_nodal(&f.0);
            let ku = opair.stiffness_full.matvec(&nodal);
            let mu = opair.mass_full.matvec(&nodal);
            let mf = opair.mass_full.matvec(&fnodal);
            let rhs: Vec<f64> = bverts.iter().map(|&v| ku[v] - lambdasq * mu[v] - mf[v]).collect();
            let mut trip = Vec::with_capacity(4 * mesh.boundary_edges.len());
            for e in &mesh.boundary_edges {
                let (a, b) = (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let (i, j) = (bindex[&e.v[0]], bindex[&e.v[1]]);
                trip.push((i, i, len / 3.0));
                trip.push((j, j, len / 3.0));
                trip.push((i, j, len / 6.0));
                trip.push((j, i, len / 6.0));
            }
            let bmass = Csr::from_triplets(bverts.len(), &trip);
            let g = if rhs.iter().all(|&r| r == 0.0) {
                vec![0.0; rhs.len()]
            } else {
                cg(&bmass, &rhs, 1e-14, 10 * bverts.len().max(100))?
            };
            points
                .iter()
                .map(|q| {
                    let e = &mesh.boundary_edges[q.edge];
                    (1.0 - q.t) * g[bindex[&e.v[0]]] + q.t * g[bindex[&e.v[1]]]
                })
                .collect()
        }
        TraceMethod::Raw => {
            let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
            for (t, tri) in mesh.triangles.iter().enumerate() {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    owner.insert((a.min(b), a.max(b)), t);
                }
            }
            points
                .iter()
                .map(|q| {
                    let e = &mesh.boundary_edges[q.edge];
                    let t = owner[&(e.v[0].min(e.v[1]), e.v[0].max(e.v[1]))];
                    let (g, _) = element_gradients(triangle_points(mesh, t));
                    let tri = mesh.triangles[t];
                    let gx: f64 = (0..3).map(|k| nodal[tri[k]] * g[k][0]).sum();
                    let gy: f64 = (0..3).map(|k| nodal[tri[k]] * g[k][1]).sum();
                    gx * q.normal[0] + gy * q.normal[1]
                })
                .collect()
        }
    };
    Ok(NormalTrace { points, values, method })
}

/// `∫_{∂S ∩ W} w (∂_N u)² dl`.
pub fn weighted_flux(trace: &NormalTrace) -> f64 {
    trace.integrate(|q| if q.tag.is_arc() { q.w } else { 0.0 })
}

/// `∫_{∂S} (∂_N u)² dl`.
pub fn unweighted_flux(trace: &NormalTrace) -> f64 {
    trace.integrate(|_| 1.0)
}

/// `∫` of `(∂_N u)²` over the edges with the given tags.
pub fn flux_on(trace: &NormalTrace, tags: &[BoundaryTag]) -> f64 {
    trace.integrate(|q| if tags.contains(&q.tag) { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub grad_norm_sq: f64,
    /// `λ²‖u‖² + ⟨f,u⟩`
    pub rhs: f64,
    pub discrepancy: f64,
    pub s: f64,
    /// `‖∇u‖² / (λ^max(2,s)‖u‖² + λ^(-s)‖f‖²)`
    pub implied_cs: f64,
}

pub fn gradient_identity_report(opair: &OperatorPair, u: &FieldVector, lambdasq: f64, f: &FieldVector, s: f64) -> GradientReport {
    let GradientIdentity { grad_norm_sq, rhs, discrepancy } = gradient_identity(opair, u, lambdasq, f);
    let lambda = lambdasq.sqrt();
    let denom = lambda.powf(s.max(2.0)) * opair.m_inner(&u.0, &u.0) + lambda.powf(-s) * opair.m_inner(&f.0, &f.0);
    let implied_cs = if denom > 0.0 { grad_norm_sq / denom } else { 0.0 };
    GradientReport { grad_norm_sq, rhs, discrepancy, s, implied_cs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserveParams {
    pub delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Exponent for the implied gradient constant.
    pub s: f64,
    pub trace: TraceMethod,
}

impl ObserveParams {
    pub fn for_alpha(alpha: f64) -> Self {
        ObserveParams { delta: 1.0, gamma1: -0.5 * alpha, gamma2: 0.5 * alpha, s: 2.0, trace: TraceMethod::Variational }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub lambda: f64,
    pub total_mass: f64,
    pub wing_mass: f64,
    pub wing_mass_plus: f64,
    pub wing_mass_minus: f64,
    pub strip_mass: f64,
    pub flux_weighted: f64,
    pub flux_unweighted: f64,
    pub grad_norm_sq: f64,
    pub zone_i: f64,
    pub zone_ii: f64,
    pub zone_iii: f64,
    pub f_norm: f64,
    pub lhs: TheoremLhs,
    pub gradient: GradientReport,
}

/// Frozen column order of the observable CSV.
pub const CSV_COLUMNS: [&str; 12] = [
    "lambda",
    "total_mass",
    "wing_mass",
    "flux_weighted",
    "lhs_normderiv",
    "lhs_L2",
    "lhs_L2bis",
    "strip_mass",
    "zoneI",
    "zoneII",
    "zoneIII",
    "f_norm",
];

impl ObservableReport {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        [
            self.lambda,
            self.total_mass,
            self.wing_mass,
            self.flux_weighted,
            self.lhs.normderiv,
            self.lhs.l2,
            self.lhs.l2bis,
            self.strip_mass,
            self.zone_i,
            self.zone_ii,
            self.zone_iii,
            self.f_norm,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn observe(mesh: &TriMesh, opair: &OperatorPair, mode: &ModeField, params: &ObserveParams) -> Result<ObservableReport> {
    let u = &mode.vector;
    let lambda = mode.lambda;
    let mass = |r: Region| region_mass(mesh, opair, u, &r);
    let (delta, lam) = (params.delta, lambda);
    let wing_mass_plus = mass(Region::WingPlus)?;
    let wing_mass_minus = mass(Region::WingMinus)?;
    let trace = normal_trace(mesh, opair, u, mode.lambdasq(), &mode.residual, params.trace)?;
    let gradient = gradient_identity_report(opair, u, mode.lambdasq(), &mode.residual, params.s);
    let mut report = ObservableReport {
        lambda,
        total_mass: opair.m_inner(&u.0, &u.0),
        wing_mass: wing_mass_plus + wing_mass_minus,
        wing_mass_plus,
        wing_mass_minus,
        strip_mass: strip_mass(mesh, opair, u, params.gamma1, params.gamma2)?,
        flux_weighted: weighted_flux(&trace),
        flux_unweighted: unweighted_flux(&trace),
        grad_norm_sq: gradient.grad_norm_sq,
        zone_i: mass(Region::ZoneI { lambda: lam, delta })?,
        zone_ii: mass(Region::ZoneII { lambda: lam, delta })?,
        zone_iii: mass(Region::ZoneIII { lambda: lam, delta })?,
        f_norm: mode.f_norm,
        lhs: TheoremLhs::default(),
        gradient,
    };
    report.lhs = theorem_lhs(&report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;
    use std::f64::consts::PI;

    fn setup(domain: Domain, h: f64) -> (TriMesh, OperatorPair) {
        let mesh = TriMesh::build(domain, h).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        (mesh, op)
    }

    fn rect_mode(mesh: &TriMesh, op: &OperatorPair, k: f64, m: f64) -> FieldVector {
        op.interpolate(mesh, |p| (k * PI * (p[0] + 2.0) / 4.0).sin() * (m * PI * (p[1] + 1.0) / 2.0).sin())
    }

    #[test]
    fn clipping_is_exact_for_quadratics() {
        let (mesh, op) = setup(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1);
        let u = op.interpolate(&mesh, |p| 1.0 + p[0] * 0.3 - p[1]);
        let total = op.m_inner(&u.0, &u.0);
        let all = region_mass(&mesh, &op, &u, &Region::All).unwrap();
        assert!((all - total).abs() < 1e-12 * total);
        // arbitrary cut positions through elements
        let parts = [(-9.0, -0.333), (-0.333, 0.0123), (0.0123, 1.071), (1.071, 9.0)];
        let sum: f64 = parts
            .iter()
            .map(|&(lo, hi)| region_mass(&mesh, &op, &u, &Region::XBand { lo, hi }).unwrap())
            .sum();
        assert!((sum - total).abs() < 1e-12 * total);
    }

    #[test]
    fn half_rectangle_mass_is_half() {
        let (mesh, op) = setup(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.1);
        let u = rect_mode(&mesh, &op, 1.0, 1.0);
        let total = op.m_inner(&u.0, &u.0);
        let half = region_mass(&mesh, &op, &u, &Region::XBand { lo: 0.0, hi: f64::INFINITY }).unwrap();
        assert!((half / total - 0.5).abs() < 1e-12);
    }

    #[test]
    fn strips_and_zones() {
        let (mesh, op) = setup(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1);
        let u = op.interpolate(&mesh, |p| (p[0] * 1.3).cos() * (p[1] * 1.1).cos() + 0.2 * p[1]);
        let even = op.interpolate(&mesh, |p| (p[0] * 1.3).cos() * (p[1] * 1.1).cos());
        let a = region_mass(&mesh, &op, &even, &Region::XBand { lo: -1.0, hi: -0.5 }).unwrap();
        let b = region_mass(&mesh, &op, &even, &Region::XBand { lo: 0.5, hi: 1.0 }).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        let rect = region_mass(&mesh, &op, &u, &Region::Rectangle).unwrap();
        let full = strip_mass(&mesh, &op, &u, 0.0, 1e-15).unwrap();
        assert!((full - rect).abs() < 1e-10 * rect);
        let mut last = 0.0;
        for g in [0.9, 0.6, 0.3, 0.1] {
            let s = strip_mass(&mesh, &op, &u, -g, g).unwrap();
            assert!(s >= last);
            last = s;
        }
        assert!(strip_mass(&mesh, &op, &u, 0.5, 0.5).is_err());
        let wings = region_mass(&mesh, &op, &u, &Region::Wings).unwrap();
        for (lambda, delta) in [(20.0, 1.0), (3.0, 0.1), (1.0, 5.0), (50.0, 0.01)] {
            let z: f64 = [
                Region::ZoneI { lambda, delta },
                Region::ZoneII { lambda, delta },
                Region::ZoneIII { lambda, delta },
            ]
            .iter()
            .map(|r| region_mass(&mesh, &op, &u, r).unwrap())
            .sum();
            assert!((z - wings).abs() < 1e-10, "{z} {wings}");
        }
    }

    #[test]
    fn rectangle_edge_flux_and_rellich_boundary() {
        let (mesh, op) = setup(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.02);
        let u = rect_mode(&mesh, &op, 1.0, 1.0);
        let lsq = (PI / 4.0).powi(2) + (PI / 2.0).powi(2);
        let zero = FieldVector::zeros(op.num_dofs());
        let tr = normal_trace(&mesh, &op, &u, lsq, &zero, TraceMethod::Variational).unwrap();
        let right = flux_on(&tr, &[BoundaryTag::RectRight]);
        let expect = (PI / 4.0).powi(2);
        assert!((right - expect).abs() / expect < 0.01, "{right} vs {expect}");
        let xdx = tr.integrate(|q| q.point[0] * q.normal[0]);
        assert!((xdx - PI * PI / 4.0).abs() / (PI * PI / 4.0) < 0.01, "{xdx}");
        assert_eq!(weighted_flux(&tr), 0.0);
        let raw = normal_trace(&mesh, &op, &u, lsq, &zero, TraceMethod::Raw).unwrap();
        assert!((flux_on(&raw, &[BoundaryTag::RectRight]) - expect).abs() / expect < 0.05);
    }

    #[test]
    fn zero_field_observables() {
        let (mesh, op) = setup(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1);
        let z = FieldVector::zeros(op.num_dofs());
        let tr = normal_trace(&mesh, &op, &z, 10.0, &z, TraceMethod::Variational).unwrap();
        assert!(tr.values.iter().all(|&v| v == 0.0));
        let g = gradient_identity_report(&op, &z, 10.0, &z, 2.0);
        assert_eq!((g.grad_norm_sq, g.rhs, g.discrepancy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn flux_monotone_in_weight() {
        let (mesh, op) = setup(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1);
        let u = op.interpolate(&mesh, |p| (p[0] * 1.3).cos() * (p[1] * 1.1).cos());
        let z = FieldVector::zeros(op.num_dofs());
        let tr = normal_trace(&mesh, &op, &u, 3.0, &z, TraceMethod::Variational).unwrap();
        let w = weighted_flux(&tr);
        assert!(w >= 0.0);
        let bigger = tr.integrate(|q| if q.tag.is_arc() { q.w + 0.1 * q.w * q.w } else { 0.0 });
        assert!(bigger >= w);
    }
}
