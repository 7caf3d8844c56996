//! Commutant vector fields `A = a∂_x + b∂_y` with analytic coefficient
//! derivatives, their action on P1 fields, and the quadratic form
//! `⟨u, [Δ - λ², A]u⟩` for zero-trace `u`.
//!
//! With `Δ = -∂²_x - ∂²_y` and `u = 0` on the boundary, two integrations by parts
//! give
//!
//! ```text
//! ⟨u,[Δ,A]u⟩ = 2∫(a_x u_x² + (a_y + b_x) u_x u_y + b_y u_y²)
//!            + ∫ u u_x (a_xx + a_yy + 2b_xy) + ∫ u u_y (b_yy - b_xx)
//! ```
//!
//! which only needs first derivatives of `u`. For `x∂_x` this is `2‖u_x‖²`,
//! for `x∂_x + y∂_y` it is `2‖∇u‖²`.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::mesh::TriMesh;
use crate::operators::{element_gradients, triangle_points, FieldVector, OperatorPair};
use crate::par;
use crate::quadrature::TRI6;

/// Quintic smoothstep from 0 at `lo` to 1 at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub lo: f64,
    pub hi: f64,
}

impl Ramp {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "ramp knots must increase");
        Ramp { lo, hi }
    }

    /// Value and first two derivatives.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        if t <= self.lo {
            return [0.0; 3];
        }
        if t >= self.hi {
            return [1.0, 0.0, 0.0];
        }
        let l = self.hi - self.lo;
        let s = (t - self.lo) / l;
        let s2 = s * s;
        [
            s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s).powi(2) / l,
            60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (l * l),
        ]
    }
}

/// Knots of the two cutoffs in units of β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    /// `φ` rises on `[phi_lo, phi_hi]·β` in `w`.
    pub phi_lo: f64,
    pub phi_hi: f64,
    /// `χ` rises on `[chi_lo, chi_hi]·β` in `|y|`.
    pub chi_lo: f64,
    pub chi_hi: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { phi_lo: 0.25, phi_hi: 0.5, chi_lo: 0.05, chi_hi: 0.1 }
    }
}

impl CutoffSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if !(0.0 <= self.phi_lo && self.phi_lo < self.phi_hi && 0.0 <= self.chi_lo && self.chi_lo < self.chi_hi) {
            return Err(crate::LabError::Invalid(format!("cutoff knots must be increasing and nonnegative: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `x∂_x`
    XdX,
    /// `x∂_x + y∂_y`
    Radial,
    /// `φ(x)∂_x`
    CutoffX,
    /// `λ²w₊²χ(y)∂_y`
    WingY,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [FieldKind::XdX, FieldKind::Radial, FieldKind::CutoffX, FieldKind::WingY];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::XdX => "xdx",
            FieldKind::Radial => "radial",
            FieldKind::CutoffX => "cutoffx",
            FieldKind::WingY => "wingy",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Coefficients of `A` and their derivatives at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Coeffs {
    pub a: f64,
    pub b: f64,
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
    pub axx: f64,
    pub ayy: f64,
    pub bxx: f64,
    pub byy: f64,
    pub bxy: f64,
}

impl Coeffs {
    pub fn div(&self) -> f64 {
        self.ax + self.by
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub kind: FieldKind,
    pub alpha: f64,
    pub beta: f64,
    /// Frequency entering `WingY`.
    pub lambda: f64,
    pub cutoffs: CutoffSpec,
}

impl VectorFieldSpec {
    pub fn new(kind: FieldKind, alpha: f64, beta: f64, lambda: f64) -> Self {
        VectorFieldSpec { kind, alpha, beta, lambda, cutoffs: CutoffSpec::default() }
    }

    pub fn with_cutoffs(mut self, cutoffs: CutoffSpec) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    fn phi_ramp(&self) -> Ramp {
        Ramp::new(self.cutoffs.phi_lo * self.beta, self.cutoffs.phi_hi * self.beta)
    }

    fn chi_ramp(&self) -> Ramp {
        Ramp::new(self.cutoffs.chi_lo * self.beta, self.cutoffs.chi_hi * self.beta)
    }

    /// `φ(x)`: odd in `x`, so `φ_x ≥ 0` on both wings.
    pub fn phi(&self, x: f64) -> [f64; 3] {
        let [r, r1, r2] = self.phi_ramp().eval(x.abs() - self.alpha);
        let s = x.signum();
        [s * r, r1, s * r2]
    }

    /// `χ(y)`: odd, `±1` for `±y > chi_hi·β`, zero for `|y| < chi_lo·β`.
    pub fn chi(&self, y: f64) -> [f64; 3] {
        let [r, r1, r2] = self.chi_ramp().eval(y.abs());
        let s = y.signum();
        [s * r, r1, s * r2]
    }

    pub fn coeffs(&self, p: Point) -> Coeffs {
        let [x, y] = p;
        match self.kind {
            FieldKind::XdX => Coeffs { a: x, ax: 1.0, ..Default::default() },
            FieldKind::Radial => Coeffs { a: x, b: y, ax: 1.0, by: 1.0, ..Default::default() },
            FieldKind::CutoffX => {
                let [f, f1, f2] = self.phi(x);
                Coeffs { a: f, ax: f1, axx: f2, ..Default::default() }
            }
            FieldKind::WingY => {
                let w = x.abs() - self.alpha;
                if w < 0.0 {
                    return Coeffs::default();
                }
                // H(0) = 1
                let l2 = self.lambda * self.lambda;
                let sx = x.signum();
                let [c, c1, c2] = self.chi(y);
                Coeffs {
                    b: l2 * w * w * c,
                    bx: 2.0 * l2 * sx * w * c,
                    by: l2 * w * w * c1,
                    bxx: 2.0 * l2 * c,
                    byy: l2 * w * w * c2,
                    bxy: 2.0 * l2 * sx * w * c1,
                    ..Default::default()
                }
            }
        }
    }

    /// `A·N` at a boundary point.
    pub fn normal_component(&self, p: Point, n: [f64; 2]) -> f64 {
        let c = self.coeffs(p);
        c.a * n[0] + c.b * n[1]
    }
}

/// Values of a field at the element quadrature points.
#[derive(Debug, Clone, Default)]
pub struct QuadField {
    pub points: Vec<Point>,
    /// Quadrature weights including element area.
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl QuadField {
    pub fn integral(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }
}

struct ElementData {
    grad: [f64; 2],
    area: f64,
    p: [Point; 3],
    uv: [f64; 3],
}

fn element(mesh: &TriMesh, nodal: &[f64], t: usize) -> ElementData {
    let p = triangle_points(mesh, t);
    let (g, area) = element_gradients(p);
    let tri = mesh.triangles[t];
    let uv = [nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]];
    let grad = [
        uv[0] * g[0][0] + uv[1] * g[1][0] + uv[2] * g[2][0],
        uv[0] * g[0][1] + uv[1] * g[1][1] + uv[2] * g[2][1],
    ];
    ElementData { grad, area, p, uv }
}

fn at(bary: &[f64; 3], v: [f64; 3]) -> f64 {
    bary[0] * v[0] + bary[1] * v[1] + bary[2] * v[2]
}

fn point(bary: &[f64; 3], p: &[Point; 3]) -> Point {
    [at(bary, [p[0][0], p[1][0], p[2][0]]), at(bary, [p[0][1], p[1][1], p[2][1]])]
}

/// `Au` at the 6-point Gauss points of every element.
pub fn apply(field: &VectorFieldSpec, u: &FieldVector, mesh: &TriMesh, opair: &OperatorPair) -> QuadField {
    let nodal = opair.dofs.to_nodal(&u.0);
    let per = par::map_range(mesh.triangles.len(), |t| {
        let e = element(mesh, &nodal, t);
        TRI6.points
            .iter()
            .zip(TRI6.weights)
            .map(|(b, w)| {
                let x = point(b, &e.p);
                let c = field.coeffs(x);
                (x, w * e.area, c.a * e.grad[0] + c.b * e.grad[1])
            })
            .collect::<Vec<_>>()
    });
    let mut q = QuadField::default();
    for (x, w, v) in per.into_iter().flatten() {
        q.points.push(x);
        q.weights.push(w);
        q.values.push(v);
    }
    q
}

/// Sum over elements of a Gauss-point integrand built from `u`, `∇u` and the
/// coefficients, with a fixed reduction order.
fn element_integral(
    field: &VectorFieldSpec,
    mesh: &TriMesh,
    nodal: &[f64],
    integrand: impl Fn(&Coeffs, f64, [f64; 2]) -> f64 + Sync + Send,
) -> f64 {
    par::sum(mesh.triangles.len(), |t| {
        let e = element(mesh, nodal, t);
        let mut s = 0.0;
        for (b, w) in TRI6.points.iter().zip(TRI6.weights) {
            let c = field.coeffs(point(b, &e.p));
            s += w * integrand(&c, at(b, e.uv), e.grad);
        }
        s * e.area
    })
}

/// `⟨u, [Δ - λ², A]u⟩` for zero-trace `u`, in first-order form.
pub fn commutator_form(field: &VectorFieldSpec, u: &FieldVector, mesh: &TriMesh, opair: &OperatorPair) -> f64 {
    let nodal = opair.dofs.to_nodal(&u.0);
    element_integral(field, mesh, &nodal, |c, uq, g| {
        let [ux, uy] = g;
        2.0 * (c.ax * ux * ux + (c.ay + c.bx) * ux * uy + c.by * uy * uy)
            + uq * ux * (c.axx + c.ayy + 2.0 * c.bxy)
            + uq * uy * (c.byy - c.bxx)
    })
}

/// `⟨2Au + (div A)u, f⟩`.
pub fn volume_term(field: &VectorFieldSpec, u: &FieldVector, f: &FieldVector, mesh: &TriMesh, opair: &OperatorPair) -> f64 {
    let nodal = opair.dofs.to_nodal(&u.0);
    let fnodal = opair.dofs.to_nodal(&f.0);
    par::sum(mesh.triangles.len(), |t| {
        let e = element(mesh, &nodal, t);
        let tri = mesh.triangles[t];
        let fv = [fnodal[tri[0]], fnodal[tri[1]], fnodal[tri[2]]];
        let mut s = 0.0;
        for (b, w) in TRI6.points.iter().zip(TRI6.weights) {
            let c = field.coeffs(point(b, &e.p));
            let au = c.a * e.grad[0] + c.b * e.grad[1];
            s += w * (2.0 * au + c.div() * at(b, e.uv)) * at(b, fv);
        }
        s * e.area
    })
}

/// `∫ φ_x (u_x² + u_y²)` for the `CutoffX` field.
pub fn cutoff_gradient_form(field: &VectorFieldSpec, u: &FieldVector, mesh: &TriMesh, opair: &OperatorPair) -> f64 {
    let nodal = opair.dofs.to_nodal(&u.0);
    element_integral(field, mesh, &nodal, |c, _, g| c.ax * (g[0] * g[0] + g[1] * g[1]))
}

/// `‖u_x‖²` by direct per-element quadrature of the constant gradient.
pub fn dx_norm_sq(u: &FieldVector, mesh: &TriMesh, opair: &OperatorPair) -> f64 {
    let nodal = opair.dofs.to_nodal(&u.0);
    par::sum(mesh.triangles.len(), |t| {
        let e = element(mesh, &nodal, t);
        e.area * e.grad[0] * e.grad[0]
    })
}
