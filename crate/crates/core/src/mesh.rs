//! Conforming, mirror-symmetric triangulations of the stadium and of the two
//! oracle domains (rectangle only, disk only).
//!
//! The rectangle is a structured grid whose cell diagonals point towards the
//! origin, so the grid is symmetric under both reflections. Each wing is a
//! half-disk split into three 60° sectors, each sector carrying the standard
//! subdivided-triangle pattern mapped onto concentric rings; ring `k` has `3k`
//! segments and the diameter points coincide with the grid's vertical edge.
//! The disk is two such half-disks glued along `x = 0`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{Point, StadiumGeometry};
use crate::quadrature::GL3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Stadium { alpha: f64, beta: f64 },
    Rectangle { alpha: f64, beta: f64 },
    Disk { beta: f64 },
}

impl Domain {
    pub fn stadium(g: StadiumGeometry) -> Self {
        Domain::Stadium { alpha: g.alpha, beta: g.beta }
    }

    /// Half-width of the central rectangle (zero for the disk).
    pub fn alpha(&self) -> f64 {
        match *self {
            Domain::Stadium { alpha, .. } | Domain::Rectangle { alpha, .. } => alpha,
            Domain::Disk { .. } => 0.0,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Domain::Stadium { beta, .. } | Domain::Rectangle { beta, .. } | Domain::Disk { beta } => beta,
        }
    }

    pub fn geometry(&self) -> Option<StadiumGeometry> {
        match *self {
            Domain::Stadium { alpha, beta } => Some(StadiumGeometry { alpha, beta }),
            _ => None,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Stadium { alpha, beta } => 4.0 * alpha * beta + PI * beta * beta,
            Domain::Rectangle { alpha, beta } => 4.0 * alpha * beta,
            Domain::Disk { beta } => PI * beta * beta,
        }
    }

    fn has_rectangle(&self) -> bool {
        !matches!(self, Domain::Disk { .. })
    }

    fn has_arcs(&self) -> bool {
        !matches!(self, Domain::Rectangle { .. })
    }

    /// Centre of the circular arc on the `x > 0` (plus) or `x < 0` side.
    pub fn arc_center(&self, plus: bool) -> Point {
        let a = self.alpha();
        [if plus { a } else { -a }, 0.0]
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let good = match *self {
            Domain::Stadium { alpha, beta } | Domain::Rectangle { alpha, beta } => ok(alpha) && ok(beta),
            Domain::Disk { beta } => ok(beta),
        };
        if good {
            Ok(())
        } else {
            Err(LabError::InvalidGeometry(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    RectTop,
    RectBottom,
    RectLeft,
    RectRight,
    ArcPlus,
    ArcMinus,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 6] = [
        BoundaryTag::RectTop,
        BoundaryTag::RectBottom,
        BoundaryTag::RectLeft,
        BoundaryTag::RectRight,
        BoundaryTag::ArcPlus,
        BoundaryTag::ArcMinus,
    ];
    pub const ARCS: [BoundaryTag; 2] = [BoundaryTag::ArcPlus, BoundaryTag::ArcMinus];

    pub fn is_arc(self) -> bool {
        matches!(self, BoundaryTag::ArcPlus | BoundaryTag::ArcMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::RectTop => "rect_top",
            BoundaryTag::RectBottom => "rect_bottom",
            BoundaryTag::RectLeft => "rect_left",
            BoundaryTag::RectRight => "rect_right",
            BoundaryTag::ArcPlus => "arc_plus",
            BoundaryTag::ArcMinus => "arc_minus",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Boundary edge oriented so that the domain lies on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub domain: Domain,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
    pub level: u32,
}

/// Vertex permutations realising the reflections `x → -x` and `y → -y`.
#[derive(Debug, Clone)]
pub struct MirrorMaps {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// One Gauss point on the boundary.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryQuadPoint {
    pub edge: usize,
    /// Position along the edge in `[0, 1]` (arc parameter for curved edges).
    pub t: f64,
    pub point: Point,
    pub weight: f64,
    pub normal: [f64; 2],
    pub tag: BoundaryTag,
    /// `w₊ = max(|x| - α, 0)` at the point.
    pub w: f64,
}

fn key(p: Point) -> (u64, u64) {
    // normalise -0.0 so mirrored zeros hash together
    let n = |v: f64| if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() };
    (n(p[0]), n(p[1]))
}

struct Builder {
    vertices: Vec<Point>,
    index: HashMap<(u64, u64), usize>,
    triangles: Vec<[usize; 3]>,
}

impl Builder {
    fn vertex(&mut self, p: Point) -> usize {
        let k = key(p);
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(p);
        self.index.insert(k, i);
        i
    }

    fn triangle(&mut self, mut t: [usize; 3]) {
        if signed_area(&self.vertices, t) < 0.0 {
            t.swap(1, 2);
        }
        self.triangles.push(t);
    }
}

fn signed_area(v: &[Point], t: [usize; 3]) -> f64 {
    let [a, b, c] = [v[t[0]], v[t[1]], v[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Point on ring `k` of a wing; `num/den ∈ [-1, 1]` is the angle in units of π/2.
fn ring_point(cx: f64, plus: bool, r: f64, num: i64, den: i64) -> Point {
    let sx = if plus { 1.0 } else { -1.0 };
    if num == 0 {
        return [cx + sx * r, 0.0];
    }
    if num == den {
        return [cx, r];
    }
    if num == -den {
        return [cx, -r];
    }
    let th = (num.unsigned_abs() as f64 / den as f64) * FRAC_PI_2;
    let (s, c) = th.sin_cos();
    let sy = if num > 0 { 1.0 } else { -1.0 };
    [cx + sx * r * c, sy * r * s]
}

impl TriMesh {
    /// Build a mesh with target edge length `h ≤ β/4` (`h ≤ β` for the
    /// rectangle, which has no wings to resolve).
    pub fn build(domain: Domain, h: f64) -> Result<TriMesh> {
        domain.validate()?;
        let beta = domain.beta();
        let hmax = if domain.has_arcs() { beta / 4.0 } else { beta };
        if !(h > 0.0 && h <= hmax * (1.0 + 1e-12)) {
            return Err(LabError::MeshTooCoarse { h, max: hmax });
        }
        let m = ((beta / h) - 1e-9).ceil().max(1.0) as i64;
        let hy = beta / m as f64;
        let ycoord = |j: i64| {
            if j == m {
                beta
            } else if j == -m {
                -beta
            } else {
                j as f64 * hy
            }
        };
        let mut b = Builder { vertices: Vec::new(), index: HashMap::new(), triangles: Vec::new() };

        if domain.has_rectangle() {
            let alpha = domain.alpha();
            let nxh = ((alpha / h) - 1e-9).ceil().max(1.0) as i64;
            let hx = alpha / nxh as f64;
            let xcoord = |i: i64| {
                if i == nxh {
                    alpha
                } else if i == -nxh {
                    -alpha
                } else {
                    i as f64 * hx
                }
            };
            for i in -nxh..nxh {
                for j in -m..m {
                    let v00 = b.vertex([xcoord(i), ycoord(j)]);
                    let v10 = b.vertex([xcoord(i + 1), ycoord(j)]);
                    let v01 = b.vertex([xcoord(i), ycoord(j + 1)]);
                    let v11 = b.vertex([xcoord(i + 1), ycoord(j + 1)]);
                    let sx = 2 * i + 1;
                    let sy = 2 * j + 1;
                    if sx * sy > 0 {
                        b.triangle([v00, v10, v11]);
                        b.triangle([v00, v11, v01]);
                    } else {
                        b.triangle([v00, v10, v01]);
                        b.triangle([v10, v11, v01]);
                    }
                }
            }
        }

        if domain.has_arcs() {
            for plus in [true, false] {
                let cx = domain.arc_center(plus)[0];
                let point = |k: i64, p: i64| -> Point {
                    if k == 0 {
                        return [cx, 0.0];
                    }
                    let r = if k == m { beta } else { k as f64 * hy };
                    // p ∈ 0..=3k, angle (2p - 3k)/(3k) · π/2
                    let mut pt = ring_point(cx, plus, r, 2 * p - 3 * k, 3 * k);
                    if k < m && (p == 0 || p == 3 * k) {
                        pt[1] = if p == 0 { -ycoord(k) } else { ycoord(k) };
                    }
                    pt
                };
                for k in 1..=m {
                    for s in 0..3 {
                        let outer = |j: i64| point(k, s * k + j);
                        let inner = |j: i64| if k == 1 { point(0, 0) } else { point(k - 1, s * (k - 1) + j) };
                        for j in 0..k {
                            let t = [b.vertex(outer(j)), b.vertex(outer(j + 1)), b.vertex(inner(j))];
                            b.triangle(t);
                        }
                        for j in 0..(k - 1) {
                            let t = [b.vertex(inner(j)), b.vertex(outer(j + 1)), b.vertex(inner(j + 1))];
                            b.triangle(t);
                        }
                    }
                }
            }
        }

        let mut mesh = TriMesh {
            domain,
            vertices: b.vertices,
            triangles: b.triangles,
            boundary_edges: Vec::new(),
            h,
            level: 0,
        };
        mesh.boundary_edges = mesh.find_boundary_edges();
        mesh.check_triangles()?;
        Ok(mesh)
    }

    fn tag_edge(&self, a: usize, b: usize) -> BoundaryTag {
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let alpha = self.domain.alpha();
        let beta = self.domain.beta();
        let tol = 1e-12 * beta;
        let mx = 0.5 * (pa[0] + pb[0]);
        let my = 0.5 * (pa[1] + pb[1]);
        if self.domain.has_rectangle() && mx.abs() < alpha {
            if (pa[1] - pb[1]).abs() <= tol && my > 0.0 {
                return BoundaryTag::RectTop;
            }
            if (pa[1] - pb[1]).abs() <= tol && my < 0.0 {
                return BoundaryTag::RectBottom;
            }
        }
        if !self.domain.has_arcs() {
            return if mx > 0.0 { BoundaryTag::RectRight } else { BoundaryTag::RectLeft };
        }
        if mx > 0.0 {
            BoundaryTag::ArcPlus
        } else {
            BoundaryTag::ArcMinus
        }
    }

    fn find_boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut out = Vec::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                if count[&(a.min(b), a.max(b))] == 1 {
                    out.push(BoundaryEdge { v: [a, b], tag: self.tag_edge(a, b) });
                }
            }
        }
        out
    }

    fn check_triangles(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            let a = signed_area(&self.vertices, *t);
            if !(a > 0.0) {
                return Err(LabError::DegenerateTriangle { index: i, area: a });
            }
        }
        Ok(())
    }

    /// Split every triangle into four; boundary midpoints on arcs are projected
    /// onto the exact circle.
    pub fn refine(&self) -> TriMesh {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let arc_edge: HashMap<(usize, usize), BoundaryTag> = self
            .boundary_edges
            .iter()
            .map(|e| ((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), e.tag))
            .collect();
        let beta = self.domain.beta();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let k = (a.min(b), a.max(b));
            if let Some(&i) = mid.get(&k) {
                return i;
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            let mut p = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if let Some(tag) = arc_edge.get(&k) {
                if tag.is_arc() {
                    let c = self.domain.arc_center(*tag == BoundaryTag::ArcPlus);
                    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                    let r = dx.hypot(dy);
                    p = [c[0] + beta * dx / r, c[1] + beta * dy / r];
                }
            }
            let i = vertices.len();
            vertices.push(p);
            mid.insert(k, i);
            i
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let k = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
            let m = mid[&k];
            boundary_edges.push(BoundaryEdge { v: [e.v[0], m], tag: e.tag });
            boundary_edges.push(BoundaryEdge { v: [m, e.v[1]], tag: e.tag });
        }
        TriMesh {
            domain: self.domain,
            vertices,
            triangles,
            boundary_edges,
            h: 0.5 * self.h,
            level: self.level + 1,
        }
    }

    /// Build at `h` and refine `levels` times.
    pub fn build_refined(domain: Domain, h: f64, levels: u32) -> Result<TriMesh> {
        let mut m = TriMesh::build(domain, h)?;
        for _ in 0..levels {
            m = m.refine();
        }
        Ok(m)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[t])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            f[e.v[0]] = true;
            f[e.v[1]] = true;
        }
        f
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let a = self.vertices[t[(k + 1) % 3]];
                let b = self.vertices[t[(k + 2) % 3]];
                let u = [a[0] - p[0], a[1] - p[1]];
                let v = [b[0] - p[0], b[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                best = best.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        best
    }

    /// Exact vertex permutations for the two reflections, if the mesh is
    /// symmetric to the last bit.
    pub fn mirror_maps(&self) -> Option<MirrorMaps> {
        let index: HashMap<(u64, u64), usize> =
            self.vertices.iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
        let map = |f: &dyn Fn(Point) -> Point| -> Option<Vec<usize>> {
            self.vertices.iter().map(|p| index.get(&key(f(*p))).copied()).collect()
        };
        let x = map(&|p| [-p[0], p[1]])?;
        let y = map(&|p| [p[0], -p[1]])?;
        Some(MirrorMaps { x, y })
    }

    /// Gauss points on boundary edges whose tag passes `filter`. Arc edges are
    /// integrated along the exact circular arc with exact radial normals.
    pub fn boundary_quadrature(&self, filter: impl Fn(BoundaryTag) -> bool) -> Vec<BoundaryQuadPoint> {
        let alpha = self.domain.alpha();
        let beta = self.domain.beta();
        let mut out = Vec::new();
        for (ei, e) in self.boundary_edges.iter().enumerate() {
            if !filter(e.tag) {
                continue;
            }
            let (pa, pb) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
            if e.tag.is_arc() {
                let c = self.domain.arc_center(e.tag == BoundaryTag::ArcPlus);
                let ta = (pa[1] - c[1]).atan2(pa[0] - c[0]);
                let tb = (pb[1] - c[1]).atan2(pb[0] - c[0]);
                let mut dt = tb - ta;
                if dt > PI {
                    dt -= 2.0 * PI;
                } else if dt < -PI {
                    dt += 2.0 * PI;
                }
                for (s, wq) in GL3.points.iter().zip(GL3.weights) {
                    let th = ta + s * dt;
                    let (sn, cs) = th.sin_cos();
                    let point = [c[0] + beta * cs, c[1] + beta * sn];
                    out.push(BoundaryQuadPoint {
                        edge: ei,
                        t: *s,
                        point,
                        weight: wq * beta * dt.abs(),
                        normal: [cs, sn],
                        tag: e.tag,
                        w: (point[0].abs() - alpha).max(0.0),
                    });
                }
            } else {
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = d[0].hypot(d[1]);
                let normal = [d[1] / len, -d[0] / len];
                for (s, wq) in GL3.points.iter().zip(GL3.weights) {
                    let point = [pa[0] + s * d[0], pa[1] + s * d[1]];
                    out.push(BoundaryQuadPoint {
                        edge: ei,
                        t: *s,
                        point,
                        weight: wq * len,
                        normal,
                        tag: e.tag,
                        w: (point[0].abs() - alpha).max(0.0),
                    });
                }
            }
        }
        out
    }

    /// Plain-text export: vertex count and lines, triangle count and lines,
    /// boundary-edge count and tagged lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# stadium mesh h={:e} level={}", self.h, self.level);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", e.v[0], e.v[1], e.tag.name());
        }
        s
    }

    /// Parse the format written by [`TriMesh::to_text`].
    pub fn from_text(domain: Domain, text: &str) -> Result<TriMesh> {
        let bad = |m: &str| LabError::Invalid(format!("mesh text: {m}"));
        let mut rest: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .collect();
        rest.reverse();
        let mut next = || rest.pop().ok_or_else(|| bad("truncated"));
        let count = |l: &str, name: &str| -> Result<usize> {
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(bad(&format!("expected {name}")));
            }
            it.next().and_then(|n| n.parse().ok()).ok_or_else(|| bad("count"))
        };
        let nv = count(next()?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let v: Vec<f64> = next()?.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            if v.len() != 2 {
                return Err(bad("vertex line"));
            }
            vertices.push([v[0], v[1]]);
        }
        let nt = count(next()?, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let v: Vec<usize> = next()?.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            if v.len() != 3 || v.iter().any(|&i| i >= nv) {
                return Err(bad("triangle line"));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        let ne = count(next()?, "boundary_edges")?;
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let l = next()?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad("edge line"));
            }
            let a: usize = f[0].parse().map_err(|_| bad("edge index"))?;
            let b: usize = f[1].parse().map_err(|_| bad("edge index"))?;
            let tag = BoundaryTag::from_name(f[2]).ok_or_else(|| bad("edge tag"))?;
            boundary_edges.push(BoundaryEdge { v: [a, b], tag });
        }
        let h = text
            .lines()
            .next()
            .and_then(|l| l.split_whitespace().find_map(|t| t.strip_prefix("h=")))
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN);
        let level = text
            .lines()
            .next()
            .and_then(|l| l.split_whitespace().find_map(|t| t.strip_prefix("level=")))
            .and_then(|v| v.parse().ok())
            .unwrap_or(0);
        let mesh = TriMesh { domain, vertices, triangles, boundary_edges, h, level };
        mesh.check_triangles()?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stadium(a: f64, b: f64) -> Domain {
        Domain::Stadium { alpha: a, beta: b }
    }

    fn edge_counts(m: &TriMesh) -> HashMap<(usize, usize), u32> {
        let mut count = HashMap::new();
        for t in &m.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }

    fn check_invariants(m: &TriMesh) {
        for t in 0..m.triangles.len() {
            assert!(m.triangle_area(t) > 0.0);
        }
        let counts = edge_counts(m);
        let nb = counts.values().filter(|&&c| c == 1).count();
        assert!(counts.values().all(|&c| c == 1 || c == 2));
        assert_eq!(nb, m.boundary_edges.len());
        for e in &m.boundary_edges {
            let k = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
            assert_eq!(counts[&k], 1);
        }
        let beta = m.domain.beta();
        let alpha = m.domain.alpha();
        for e in &m.boundary_edges {
            for &v in &e.v {
                let p = m.vertices[v];
                if e.tag.is_arc() {
                    assert!(p[0].abs() >= alpha - 1e-12);
                    let c = m.domain.arc_center(e.tag == BoundaryTag::ArcPlus);
                    let r = (p[0] - c[0]).hypot(p[1] - c[1]);
                    assert!((r - beta).abs() <= 1e-12 * beta, "arc vertex off circle by {}", r - beta);
                } else {
                    match e.tag {
                        BoundaryTag::RectTop => assert_eq!(p[1], beta),
                        BoundaryTag::RectBottom => assert_eq!(p[1], -beta),
                        BoundaryTag::RectLeft => assert_eq!(p[0], -alpha),
                        BoundaryTag::RectRight => assert_eq!(p[0], alpha),
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    #[test]
    fn rectangle_area_is_exact() {
        let m = TriMesh::build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.5).unwrap();
        assert_eq!(m.area(), 8.0);
        check_invariants(&m);
        let r = m.refine();
        assert_eq!(r.triangles.len(), 4 * m.triangles.len());
        assert!((r.area() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn stadium_area_and_invariants() {
        let m = TriMesh::build(stadium(1.0, 1.0), 0.1).unwrap();
        check_invariants(&m);
        let exact = 4.0 + PI;
        assert!((m.area() - exact).abs() / exact < 0.01);
        assert!(m.area() < exact);
        let r = m.refine();
        check_invariants(&r);
        assert!(r.area() > m.area() && r.area() < exact);
        // O(h²) area defect
        let e0 = exact - m.area();
        let e1 = exact - r.area();
        assert!(e0 / e1 > 3.5, "ratio {}", e0 / e1);
    }

    #[test]
    fn arc_chords_close_to_circle() {
        let h = 0.1;
        let m = TriMesh::build(stadium(1.0, 1.0), h).unwrap();
        for e in m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::ArcPlus) {
            let (a, b) = (m.vertices[e.v[0]], m.vertices[e.v[1]]);
            let mx = 0.5 * (a[0] + b[0]);
            let my = 0.5 * (a[1] + b[1]);
            assert!(((mx - 1.0).powi(2) + my * my - 1.0).abs() <= h * h);
        }
    }

    #[test]
    fn refuses_coarse_mesh() {
        assert!(matches!(
            TriMesh::build(stadium(1.0, 1.0), 0.3),
            Err(LabError::MeshTooCoarse { .. })
        ));
        assert!(TriMesh::build(stadium(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn min_angle_through_refinement() {
        for d in [stadium(1.0, 1.0), stadium(2.0, 1.0), Domain::Disk { beta: 1.0 }, Domain::Rectangle { alpha: 2.0, beta: 1.0 }] {
            let mut m = TriMesh::build(d, 0.25).unwrap();
            for _ in 0..3 {
                assert!(m.min_angle_deg() >= 20.0, "{d:?} level {}: {}", m.level, m.min_angle_deg());
                m = m.refine();
            }
        }
    }

    #[test]
    fn meshes_are_mirror_symmetric() {
        for d in [stadium(1.0, 1.0), stadium(1.7, 0.6), Domain::Disk { beta: 1.0 }, Domain::Rectangle { alpha: 2.0, beta: 1.0 }] {
            let m = TriMesh::build(d, 0.1).unwrap();
            assert!(m.mirror_maps().is_some(), "{d:?}");
            assert!(m.refine().mirror_maps().is_some(), "{d:?} refined");
        }
    }

    #[test]
    fn deterministic_build() {
        let a = TriMesh::build(stadium(1.0, 1.0), 0.07).unwrap();
        let b = TriMesh::build(stadium(1.0, 1.0), 0.07).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_nesting() {
        let m = TriMesh::build(stadium(1.0, 1.0), 0.2).unwrap();
        let r = m.refine();
        assert_eq!(&r.vertices[..m.vertices.len()], &m.vertices[..]);
        // new arc vertices moved by at most h²/β from the chord midpoints
        for e in r.boundary_edges.iter().filter(|e| e.tag.is_arc()) {
            let p = r.vertices[e.v[1]];
            let c = r.domain.arc_center(e.tag == BoundaryTag::ArcPlus);
            assert!(((p[0] - c[0]).hypot(p[1] - c[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_quadrature_weights() {
        let m = TriMesh::build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.25).unwrap();
        let top: f64 = m.boundary_quadrature(|t| t == BoundaryTag::RectTop).iter().map(|q| q.weight).sum();
        assert!((top - 4.0).abs() < 1e-13);
        for q in m.boundary_quadrature(|_| true) {
            let expect = match q.tag {
                BoundaryTag::RectTop => [0.0, 1.0],
                BoundaryTag::RectBottom => [0.0, -1.0],
                BoundaryTag::RectLeft => [-1.0, 0.0],
                BoundaryTag::RectRight => [1.0, 0.0],
                _ => unreachable!(),
            };
            assert_eq!(q.normal, expect);
        }

        let m = TriMesh::build(stadium(1.0, 1.0), 0.1).unwrap();
        let arcs = m.boundary_quadrature(|t| t.is_arc());
        let len: f64 = arcs.iter().map(|q| q.weight).sum();
        assert!((len - 2.0 * PI).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        let mut mesh = m.clone();
        for _ in 0..3 {
            let wint: f64 = mesh.boundary_quadrature(|t| t.is_arc()).iter().map(|q| q.w * q.weight).sum();
            let err = (wint - 4.0).abs();
            assert!(err < prev.max(1e-13));
            prev = err;
            mesh = mesh.refine();
        }
        assert!(prev < 1e-8, "∫w dl error {prev}");
    }

    #[test]
    fn text_round_trip() {
        let m = TriMesh::build(stadium(1.0, 1.0), 0.2).unwrap();
        let back = TriMesh::from_text(m.domain, &m.to_text()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_edges, m.boundary_edges);
        assert_eq!(back.h, m.h);
        assert!(TriMesh::from_text(m.domain, "vertices 2\n0 0\n").is_err());
    }
}
