//! P1 finite-element forms for the Dirichlet Laplacian.

use crate::error::{LabError, Result};
use crate::geometry::Point;
use crate::linalg::{cg, Csr};
use crate::mesh::TriMesh;
use crate::par;
use crate::quadrature::TRI3;

/// Relative tolerance for mass-matrix solves.
pub const MASS_SOLVE_TOL: f64 = 1e-14;

/// Nodal values on interior vertices, zero trace implied.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector(pub Vec<f64>);

impl FieldVector {
    pub fn zeros(n: usize) -> Self {
        FieldVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> FieldVector {
        FieldVector(self.0.iter().map(|v| v * s).collect())
    }
}

/// Interior-vertex numbering with Dirichlet rows eliminated.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub dof_of_vertex: Vec<Option<usize>>,
    pub vertex_of_dof: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &TriMesh) -> Self {
        let bnd = mesh.boundary_flags();
        let mut dof_of_vertex = vec![None; mesh.num_vertices()];
        let mut vertex_of_dof = Vec::new();
        for (v, &b) in bnd.iter().enumerate() {
            if !b {
                dof_of_vertex[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        DofMap { dof_of_vertex, vertex_of_dof }
    }

    pub fn num_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    /// Expand to all vertices, zero on the boundary.
    pub fn to_nodal(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dof_of_vertex.len()];
        for (d, &v) in self.vertex_of_dof.iter().enumerate() {
            out[v] = u[d];
        }
        out
    }

    pub fn from_nodal(&self, nodal: &[f64]) -> FieldVector {
        FieldVector(self.vertex_of_dof.iter().map(|&v| nodal[v]).collect())
    }

    /// Restrict a full-vertex form to interior rows and columns.
    pub fn restrict(&self, full: &Csr) -> Csr {
        let n = self.num_dofs();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for (d, &v) in self.vertex_of_dof.iter().enumerate() {
            let (c, vals) = full.row(v);
            for (&j, &a) in c.iter().zip(vals) {
                if let Some(dj) = self.dof_of_vertex[j] {
                    indices.push(dj);
                    data.push(a);
                }
            }
            indptr[d + 1] = indices.len();
        }
        // interior numbering is monotone in vertex index, so columns stay sorted
        Csr { n, indptr, indices, data }
    }
}

/// Dof-level reflections `x → -x` and `y → -y`.
#[derive(Debug, Clone)]
pub struct DofMirrors {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct OperatorPair {
    /// Interior stiffness `∫∇u·∇v`.
    pub stiffness: Csr,
    /// Interior mass `∫uv`.
    pub mass: Csr,
    pub stiffness_full: Csr,
    pub mass_full: Csr,
    pub dofs: DofMap,
    pub mirrors: Option<DofMirrors>,
}

/// Element gradients of the three hat functions and the triangle area.
pub fn element_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let s = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        g[i] = [(p[j][1] - p[k][1]) * s, (p[k][0] - p[j][0]) * s];
    }
    (g, area)
}

pub fn local_stiffness(p: [Point; 3]) -> [[f64; 3]; 3] {
    let (g, area) = element_gradients(p);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

pub fn triangle_points(mesh: &TriMesh, t: usize) -> [Point; 3] {
    let tri = mesh.triangles[t];
    [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]]
}

/// Merge per-triangle 3×3 blocks into a full-vertex CSR in triangle order.
fn merge(mesh: &TriMesh, blocks: &[[[f64; 3]; 3]]) -> Csr {
    let mut trip = Vec::with_capacity(9 * blocks.len());
    for (tri, b) in mesh.triangles.iter().zip(blocks) {
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], b[i][j]));
            }
        }
    }
    Csr::from_triplets(mesh.num_vertices(), &trip)
}

impl OperatorPair {
    pub fn assemble(mesh: &TriMesh) -> Result<OperatorPair> {
        for t in 0..mesh.triangles.len() {
            let a = mesh.triangle_area(t);
            if !(a > 0.0) || !a.is_finite() {
                return Err(LabError::DegenerateTriangle { index: t, area: a });
            }
        }
        let locals = par::map_range(mesh.triangles.len(), |t| {
            let p = triangle_points(mesh, t);
            (local_stiffness(p), local_mass(mesh.triangle_area(t)))
        });
        let kb: Vec<_> = locals.iter().map(|l| l.0).collect();
        let mb: Vec<_> = locals.iter().map(|l| l.1).collect();
        let stiffness_full = merge(mesh, &kb);
        let mass_full = merge(mesh, &mb);
        let dofs = DofMap::new(mesh);
        let stiffness = dofs.restrict(&stiffness_full);
        let mass = dofs.restrict(&mass_full);
        let mirrors = mesh.mirror_maps().and_then(|mm| {
            let map = |perm: &[usize]| -> Option<Vec<usize>> {
                dofs.vertex_of_dof.iter().map(|&v| dofs.dof_of_vertex[perm[v]]).collect()
            };
            Some(DofMirrors { x: map(&mm.x)?, y: map(&mm.y)? })
        });
        Ok(OperatorPair { stiffness, mass, stiffness_full, mass_full, dofs, mirrors })
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.num_dofs()
    }

    pub fn m_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.form(u, v)
    }

    pub fn m_norm(&self, u: &[f64]) -> f64 {
        self.m_inner(u, u).max(0.0).sqrt()
    }

    /// `‖∇u‖² = uᵀKu`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.stiffness.form(u, u)
    }

    pub fn solve_mass(&self, b: &[f64]) -> Result<Vec<f64>> {
        cg(&self.mass, b, MASS_SOLVE_TOL, 10 * self.num_dofs().max(100))
    }

    /// The residual functional `v ↦ ⟨Ku,v⟩ - λ²⟨Mu,v⟩` as a vector.
    pub fn residual_functional(&self, u: &[f64], lambdasq: f64) -> Vec<f64> {
        let ku = self.stiffness.matvec(u);
        let mu = self.mass.matvec(u);
        ku.iter().zip(&mu).map(|(k, m)| k - lambdasq * m).collect()
    }

    /// M-Riesz representative `f` of the residual: `Mf = Ku - λ²Mu`.
    pub fn residual(&self, u: &FieldVector, lambdasq: f64) -> Result<FieldVector> {
        if u.len() != self.num_dofs() {
            return Err(LabError::Dimension { expected: self.num_dofs(), got: u.len() });
        }
        let r = self.residual_functional(&u.0, lambdasq);
        Ok(FieldVector(self.solve_mass(&r)?))
    }

    /// Full-vertex weighted mass form `∫ weight·u·v` with the 3-point rule.
    pub fn weighted_mass_full(mesh: &TriMesh, weight: impl Fn(Point) -> f64 + Sync + Send) -> Csr {
        let blocks = par::map_range(mesh.triangles.len(), |t| {
            let p = triangle_points(mesh, t);
            let area = mesh.triangle_area(t);
            let mut b = [[0.0; 3]; 3];
            for (bary, wq) in TRI3.points.iter().zip(TRI3.weights) {
                let x = bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0];
                let y = bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1];
                let c = wq * area * weight([x, y]);
                for i in 0..3 {
                    for j in 0..3 {
                        b[i][j] += c * bary[i] * bary[j];
                    }
                }
            }
            b
        });
        merge(mesh, &blocks)
    }

    /// Interior weighted mass form.
    pub fn apply_scalar_weight(&self, mesh: &TriMesh, weight: impl Fn(Point) -> f64 + Sync + Send) -> Csr {
        self.dofs.restrict(&Self::weighted_mass_full(mesh, weight))
    }

    /// Interpolate `f` at interior vertices.
    pub fn interpolate(&self, mesh: &TriMesh, f: impl Fn(Point) -> f64) -> FieldVector {
        FieldVector(self.dofs.vertex_of_dof.iter().map(|&v| f(mesh.vertices[v])).collect())
    }
}

/// The two sides of the discrete gradient identity `‖∇u‖² = λ²‖u‖² + ⟨f,u⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientIdentity {
    pub grad_norm_sq: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / lhs` (zero when both vanish).
    pub discrepancy: f64,
}

pub fn gradient_identity(opair: &OperatorPair, u: &FieldVector, lambdasq: f64, f: &FieldVector) -> GradientIdentity {
    let grad = opair.energy(&u.0);
    let mass = opair.m_inner(&u.0, &u.0);
    let fu = opair.m_inner(&f.0, &u.0);
    let rhs = lambdasq * mass + fu;
    let discrepancy = if grad == 0.0 && rhs == 0.0 { 0.0 } else { (grad - rhs).abs() / grad.abs().max(rhs.abs()) };
    GradientIdentity { grad_norm_sq: grad, rhs, discrepancy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;

    fn stadium(h: f64) -> TriMesh {
        TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, h).unwrap()
    }

    #[test]
    fn unit_right_triangle_stiffness() {
        let k = local_stiffness([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_rows_and_total() {
        let m = local_mass(0.3);
        for row in m {
            assert!((row.iter().sum::<f64>() - 0.1).abs() < 1e-16);
        }
        let mesh = stadium(0.1);
        let op = OperatorPair::assemble(&mesh).unwrap();
        let total: f64 = op.mass_full.data.iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn constants_in_kernel_of_full_stiffness() {
        let mesh = stadium(0.1);
        let op = OperatorPair::assemble(&mesh).unwrap();
        let ones = vec![1.0; mesh.num_vertices()];
        let k1 = op.stiffness_full.matvec(&ones);
        assert!(k1.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn forms_are_symmetric_and_pattern_is_adjacency() {
        let mesh = stadium(0.1);
        let op = OperatorPair::assemble(&mesh).unwrap();
        assert!(op.stiffness.asymmetry() < 1e-13);
        assert!(op.mass.asymmetry() < 1e-13);
        // one row: pattern = self + neighbours
        let v = op.dofs.vertex_of_dof[0];
        let mut nb: Vec<usize> = mesh
            .triangles
            .iter()
            .filter(|t| t.contains(&v))
            .flat_map(|t| t.iter().copied())
            .collect();
        nb.sort();
        nb.dedup();
        assert_eq!(op.stiffness_full.row(v).0, &nb[..]);
        assert!(op.mirrors.is_some());
    }

    #[test]
    fn weighted_forms() {
        let mesh = stadium(0.05);
        let op = OperatorPair::assemble(&mesh).unwrap();
        let w1 = OperatorPair::weighted_mass_full(&mesh, |_| 1.0);
        let diff = w1.axpby(1.0, &op.mass_full, -1.0);
        assert!(diff.data.iter().all(|v| v.abs() < 1e-13));
        let ones = vec![1.0; mesh.num_vertices()];
        let wplus = OperatorPair::weighted_mass_full(&mesh, |p| (p[0].abs() - 1.0).max(0.0));
        let integral = wplus.form(&ones, &ones);
        assert!((integral - 4.0 / 3.0).abs() < 2e-3, "{integral}");

        let rect = TriMesh::build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.25).unwrap();
        let h = OperatorPair::weighted_mass_full(&rect, |p| if p[0].abs() - 2.0 >= 0.0 { 1.0 } else { 0.0 });
        assert!(h.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_of_zero_is_zero() {
        let mesh = stadium(0.1);
        let op = OperatorPair::assemble(&mesh).unwrap();
        let f = op.residual(&FieldVector::zeros(op.num_dofs()), 3.0).unwrap();
        assert!(f.0.iter().all(|&v| v == 0.0));
        assert!(op.residual(&FieldVector::zeros(3), 1.0).is_err());
    }

    #[test]
    fn gradient_identity_is_algebraic() {
        let mesh = stadium(0.05);
        let op = OperatorPair::assemble(&mesh).unwrap();
        let u = op.interpolate(&mesh, |p| (p[0] * 1.3).sin() * (1.0 - p[1] * p[1]) + 0.2 * p[0] * p[1]);
        for lsq in [0.0, 7.0, 120.0] {
            let f = op.residual(&u, lsq).unwrap();
            let g = gradient_identity(&op, &u, lsq, &f);
            assert!(g.discrepancy < 1e-12, "{g:?}");
        }
        let z = FieldVector::zeros(op.num_dofs());
        let g = gradient_identity(&op, &z, 5.0, &z);
        assert_eq!((g.grad_norm_sq, g.rhs, g.discrepancy), (0.0, 0.0, 0.0));
    }
}
