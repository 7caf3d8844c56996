//! Sparse symmetric linear algebra: CSR storage, reverse Cuthill–McKee
//! ordering, a skyline (profile) LDLᵀ factorisation that reports inertia, and
//! Jacobi-preconditioned conjugate gradients.

use std::collections::VecDeque;

use crate::error::{LabError, Result};
use crate::par;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed in
    /// the order they appear.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Csr {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n {
            order.clear();
            order.extend(counts[r]..counts[r + 1]);
            // stable: equal columns keep insertion order
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                if indices.len() > indptr[r] && *indices.last().unwrap() == cols[k] {
                    *data.last_mut().unwrap() += vals[k];
                } else {
                    indices.push(cols[k]);
                    data.push(vals[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Csr { n, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        par::fill(y, |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
        });
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        par::sum(self.n, |i| {
            let (c, v) = self.row(i);
            x[i] * c.iter().zip(v).map(|(&j, a)| a * y[j]).sum::<f64>()
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Linear combination `a·self + b·other` on the union pattern.
    pub fn axpby(&self, a: f64, other: &Csr, b: f64) -> Csr {
        assert_eq!(self.n, other.n);
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for i in 0..self.n {
            let (c1, v1) = self.row(i);
            let (c2, v2) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < c1.len() || q < c2.len() {
                let j1 = c1.get(p).copied().unwrap_or(usize::MAX);
                let j2 = c2.get(q).copied().unwrap_or(usize::MAX);
                if j1 == j2 {
                    indices.push(j1);
                    data.push(a * v1[p] + b * v2[q]);
                    p += 1;
                    q += 1;
                } else if j1 < j2 {
                    indices.push(j1);
                    data.push(a * v1[p]);
                    p += 1;
                } else {
                    indices.push(j2);
                    data.push(b * v2[q]);
                    q += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Csr { n: self.n, indptr, indices, data }
    }

    /// Largest `|A_ij - A_ji| / max|A|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Coordinate-format text dump (`row col value`, 0-based).
    pub fn to_coo_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.n, self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                s.push_str(&format!("{i} {j} {a:e}\n"));
            }
        }
        s
    }
}

/// Reverse Cuthill–McKee ordering of the symmetric pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm(a: &Csr) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, visited_base: &[bool]| -> (usize, usize) {
        // returns (eccentricity, last node of min degree in final level)
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        dist[start] = 0;
        q.push_back(start);
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for &u in a.row(v).0 {
                if !visited_base[u] && dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    q.push_back(u);
                }
            }
        }
        let ecc = dist[last];
        let far = (0..n)
            .filter(|&i| dist[i] == ecc)
            .min_by_key(|&i| (degree[i], i))
            .unwrap_or(last);
        (ecc, far)
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let (e2, f2) = bfs_levels(far, &visited);
            if e2 <= ecc {
                break;
            }
            start = far;
            ecc = e2;
            far = f2;
        }
        let _ = ecc;
        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                if !visited[u] {
                    visited[u] = true;
                    order.push(u);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Skyline LDLᵀ factorisation of a symmetric matrix in a fill-reducing order.
///
/// No pivoting: the factorisation exists whenever all leading principal minors
/// of the permuted matrix are nonzero, which holds for `K - σM` away from the
/// discrete spectrum. The number of negative pivots equals the number of
/// negative eigenvalues (Sylvester).
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

/// Pivots below this fraction of the row scale count as singular.
const PIVOT_TOL: f64 = 1e-13;

impl SkylineLdl {
    pub fn factor(a: &Csr, perm: &[usize]) -> Result<SkylineLdl> {
        let n = a.n;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for new in 0..n {
            let old = perm[new];
            let mut f = new;
            for &j in a.row(old).0 {
                f = f.min(inv[j]);
            }
            first[new] = f;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut row_scale = vec![0.0; n];
        for new in 0..n {
            let old = perm[new];
            let (c, v) = a.row(old);
            for (&j, &val) in c.iter().zip(v) {
                let jn = inv[j];
                row_scale[new] = f64::max(row_scale[new], val.abs());
                if jn < new {
                    lower[start[new] + jn - first[new]] = val;
                } else if jn == new {
                    diag[new] = val;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            // row[k - fi] holds L_ik·D_k while being formed
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                if k0 < j {
                    let (ri, rj) = (si + k0 - fi, start[j] + k0 - fj);
                    let len = j - k0;
                    let s: f64 = lower[ri..ri + len]
                        .iter()
                        .zip(&lower[rj..rj + len])
                        .map(|(a, b)| a * b)
                        .sum();
                    lower[si + j - fi] -= s;
                }
            }
            let mut d = diag[i];
            for j in fi..i {
                let u = lower[si + j - fi];
                let l = u / diag[j];
                lower[si + j - fi] = l;
                d -= u * l;
            }
            if !(d.abs() > PIVOT_TOL * row_scale[i].max(f64::MIN_POSITIVE)) || !d.is_finite() {
                return Err(LabError::SingularPivot { row: i, pivot: d });
            }
            diag[i] = d;
        }
        Ok(SkylineLdl { perm: perm.to_vec(), first, start, lower, diag })
    }

    /// Number of negative pivots.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn profile_len(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let s: f64 = self.lower[si..si + (i - fi)]
                .iter()
                .zip(&z[fi..i])
                .map(|(l, x)| l * x)
                .sum();
            z[i] -= s;
        }
        for i in 0..n {
            z[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = z[i];
            for (k, l) in self.lower[si..si + (i - fi)].iter().enumerate() {
                z[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, relative tolerance
/// on the residual 2-norm.
pub fn cg(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let bnorm = par::dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = par::dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let alpha = rz / par::dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = par::dot(&r, &r).sqrt();
        if rn <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = par::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = par::dot(&r, &r).sqrt();
    Err(LabError::NoConvergence { found: 0, wanted: 1, residual: rn / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplace_1d(n: usize, shift: f64) -> Csr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 - shift));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        Csr::from_triplets(n, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = Csr::from_triplets(2, &[(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5), (1, 1, 3.0)]);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn ldl_solves_and_counts() {
        // eigenvalues of tridiag(-1,2,-1): 2 - 2cos(kπ/(n+1))
        let n = 30;
        let shift = 0.93;
        let a = laplace_1d(n, shift);
        let perm = rcm(&a);
        let f = SkylineLdl::factor(&a, &perm).unwrap();
        let expected = (1..=n)
            .filter(|&k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift)
            .count();
        assert_eq!(f.negative_pivots(), expected);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let r = a.matvec(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_pivot_reported() {
        let a = Csr::from_triplets(2, &[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)]);
        assert!(matches!(SkylineLdl::factor(&a, &[0, 1]), Err(LabError::SingularPivot { .. })));
    }

    #[test]
    fn cg_matches_direct() {
        let a = laplace_1d(50, -0.5);
        let b: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.1).collect();
        let x = cg(&a, &b, 1e-14, 500).unwrap();
        let y = SkylineLdl::factor(&a, &rcm(&a)).unwrap().solve(&b);
        for i in 0..50 {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplace_1d(17, 0.0);
        let mut p = rcm(&a);
        p.sort();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn ldl_inertia_matches_shifted_count(shift in 0.01f64..3.99, n in 3usize..40) {
            let a = laplace_1d(n, shift);
            match SkylineLdl::factor(&a, &rcm(&a)) {
                Ok(f) => {
                    let expected = (1..=n)
                        .filter(|&k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift)
                        .count();
                    prop_assert_eq!(f.negative_pivots(), expected);
                }
                Err(_) => {}
            }
        }
    }
}
