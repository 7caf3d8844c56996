//! Generalized eigenpairs `K u = λ² M u` inside spectral windows.
//!
//! Shift-invert Lanczos on `(K - σM)⁻¹M` in the M-inner product with full
//! reorthogonalisation. When the mesh is mirror-symmetric, one Lanczos chain is
//! run per parity class (even/odd in x and in y); each class has a simple
//! spectrum generically, and the returned vectors are parity-pure. The number
//! of eigenvalues in the window is known beforehand from the inertia of
//! `K - λ²M` at the two window edges, so the iteration stops exactly when
//! every eigenvalue in the window has converged.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{rcm, Csr, SkylineLdl};
use crate::operators::{FieldVector, OperatorPair};
use crate::par;

/// Target relative residual `‖Ku - λ²Mu‖ / (λ²‖Mu‖)`.
pub const SOLVER_TOL: f64 = 1e-9;
/// Windows holding more eigenvalues than this are bisected.
pub const MAX_PER_SHIFT: usize = 16;
/// Relative shift perturbation when a factorisation hits a singular pivot.
pub const SHIFT_PERTURBATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub center: f64,
    pub halfwidth: f64,
}

impl SpectralWindow {
    pub fn new(center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0 && center.is_finite()) {
            return Err(LabError::Invalid(format!("window halfwidth must be positive, got {halfwidth}")));
        }
        Ok(SpectralWindow { center, halfwidth })
    }

    /// From an interval `[lo, hi)`.
    pub fn from_range(lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn lo(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn hi(&self) -> f64 {
        self.center + self.halfwidth
    }

    pub fn contains(&self, lambdasq: f64) -> bool {
        lambdasq >= self.lo() && lambdasq < self.hi()
    }
}

/// Window centred on `((n + 1/2)π/β)²`.
pub fn bouncing_ball_window(n: u32, beta: f64, halfwidth: f64) -> Result<SpectralWindow> {
    let k = (n as f64 + 0.5) * std::f64::consts::PI / beta;
    SpectralWindow::new(k * k, halfwidth)
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambdasq: f64,
    pub lambda: f64,
    /// M-normalised.
    pub vector: FieldVector,
    pub residual_bound: f64,
    pub window: SpectralWindow,
    /// Parity under `(x → -x, y → -y)` when the mesh is symmetric.
    pub parity: Option<(i8, i8)>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    /// Lanczos steps between convergence checks.
    pub block: usize,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: SOLVER_TOL, seed: 0x5eed_57ad, block: 12, max_restarts: 3 }
    }
}

/// Factorisation of `K - σM`, perturbing σ on a singular pivot.
pub struct ShiftedFactor {
    pub shift: f64,
    pub ldl: SkylineLdl,
}

fn shifted(opair: &OperatorPair, shift: f64) -> Csr {
    opair.stiffness.axpby(1.0, &opair.mass, -shift)
}

pub fn factor_shift(opair: &OperatorPair, shift: f64, perm: &[usize]) -> Result<ShiftedFactor> {
    let mut sigma = shift;
    let step = SHIFT_PERTURBATION * shift.abs().max(1.0);
    let mut last = None;
    for attempt in 0..4 {
        match SkylineLdl::factor(&shifted(opair, sigma), perm) {
            Ok(ldl) => return Ok(ShiftedFactor { shift: sigma, ldl }),
            Err(e) => {
                last = Some(e);
                sigma = shift + step * (attempt as f64 + 1.0);
            }
        }
    }
    Err(last.unwrap())
}

/// Ordering shared by every factorisation of a given operator pair.
pub fn ordering(opair: &OperatorPair) -> Vec<usize> {
    rcm(&opair.stiffness)
}

/// Number of discrete eigenvalues below `lambdasq_max` (inertia count).
pub fn count_below(opair: &OperatorPair, lambdasq_max: f64) -> Result<usize> {
    count_below_with(opair, lambdasq_max, &ordering(opair))
}

pub fn count_below_with(opair: &OperatorPair, lambdasq_max: f64, perm: &[usize]) -> Result<usize> {
    if lambdasq_max <= 0.0 {
        return Ok(0);
    }
    Ok(factor_shift(opair, lambdasq_max, perm)?.ldl.negative_pivots())
}

type Class = Option<(i8, i8)>;

fn project(opair: &OperatorPair, class: Class, v: &mut [f64]) {
    let (Some((sx, sy)), Some(mir)) = (class, opair.mirrors.as_ref()) else {
        return;
    };
    let src = v.to_vec();
    let (sx, sy) = (sx as f64, sy as f64);
    for i in 0..v.len() {
        let xi = mir.x[i];
        let yi = mir.y[i];
        let xyi = mir.y[xi];
        v[i] = 0.25 * (src[i] + sx * src[xi] + sy * src[yi] + sx * sy * src[xyi]);
    }
}

struct Chain {
    class: Class,
    q: Vec<Vec<f64>>,
    mq: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Unnormalised next vector.
    next: Option<Vec<f64>>,
    exhausted: bool,
}

struct Ctx<'a> {
    opair: &'a OperatorPair,
    factor: &'a ShiftedFactor,
}

impl Ctx<'_> {
    fn orthogonalize(&self, w: &mut [f64], basis: &[Vec<f64>], mbasis: &[Vec<f64>]) {
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(mbasis) {
                let c = par::dot(mq, w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
    }
}

impl Chain {
    fn new(class: Class, start: Vec<f64>) -> Chain {
        Chain { class, q: vec![], mq: vec![], alpha: vec![], beta: vec![], next: Some(start), exhausted: false }
    }

    fn dim(&self) -> usize {
        self.q.len()
    }

    fn extend(&mut self, ctx: &Ctx, steps: usize, locked: &[Vec<f64>], mlocked: &[Vec<f64>], cap: usize) {
        for _ in 0..steps {
            if self.exhausted || self.dim() >= cap {
                return;
            }
            let Some(mut v) = self.next.take() else {
                self.exhausted = true;
                return;
            };
            if self.q.is_empty() {
                project(ctx.opair, self.class, &mut v);
                ctx.orthogonalize(&mut v, locked, mlocked);
            }
            let mv = ctx.opair.mass.matvec(&v);
            let nrm = par::dot(&v, &mv).max(0.0).sqrt();
            if !(nrm > 1e-300) {
                self.exhausted = true;
                return;
            }
            if !self.q.is_empty() {
                self.beta.push(nrm);
            }
            let q: Vec<f64> = v.iter().map(|x| x / nrm).collect();
            let mq: Vec<f64> = mv.iter().map(|x| x / nrm).collect();
            let mut w = ctx.factor.ldl.solve(&mq);
            project(ctx.opair, self.class, &mut w);
            let a = par::dot(&mq, &w);
            self.q.push(q);
            self.mq.push(mq);
            self.alpha.push(a);
            ctx.orthogonalize(&mut w, locked, mlocked);
            ctx.orthogonalize(&mut w, &self.q, &self.mq);
            let mw = ctx.opair.mass.matvec(&w);
            let b = par::dot(&w, &mw).max(0.0).sqrt();
            // invariant subspace: relative breakdown
            if b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
                self.exhausted = true;
                self.next = None;
            } else {
                self.next = Some(w);
            }
        }
    }

    /// Ritz values `θ` and coefficient vectors of the tridiagonal matrix.
    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let m = self.dim();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    fn vector(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.q[0].len();
        let mut x = vec![0.0; n];
        for (q, c) in self.q.iter().zip(coeffs) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
        x
    }
}

/// Relative residual `‖Kx - λ²Mx‖₂ / (λ²‖Mx‖₂)`.
pub fn relative_residual(opair: &OperatorPair, x: &[f64], lambdasq: f64) -> f64 {
    let kx = opair.stiffness.matvec(x);
    let mx = opair.mass.matvec(x);
    let r: f64 = kx.iter().zip(&mx).map(|(k, m)| (k - lambdasq * m).powi(2)).sum::<f64>().sqrt();
    let s: f64 = mx.iter().map(|m| m * m).sum::<f64>().sqrt();
    r / (lambdasq.abs().max(f64::MIN_POSITIVE) * s.max(f64::MIN_POSITIVE))
}

struct Converged {
    x: Vec<f64>,
}

/// One correction step `x ← x - (K - σM)⁻¹(Kx - λ²Mx)`. It damps every
/// eigencomponent `j` of the error by `(λ² - σ)/(λⱼ² - σ)`, removing the
/// high-frequency noise left by the indefinite factorisation.
fn polish(ctx: &Ctx, mut x: Vec<f64>) -> (Vec<f64>, f64) {
    let op = ctx.opair;
    let rq = |x: &[f64]| op.energy(x) / op.m_inner(x, x);
    let lsq = rq(&x);
    let r = op.residual_functional(&x, lsq);
    let d = ctx.factor.ldl.solve(&r);
    for (xi, di) in x.iter_mut().zip(&d) {
        *xi -= di;
    }
    let nrm = op.m_norm(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    let lsq = rq(&x);
    (x, lsq)
}

/// In-window Ritz pairs of a chain: `(index, λ², estimated relative residual)`.
fn ritz_in_window(ctx: &Ctx, chain: &Chain, window: &SpectralWindow) -> (Vec<(usize, f64, f64)>, DMatrix<f64>) {
    if chain.dim() == 0 {
        return (vec![], DMatrix::zeros(0, 0));
    }
    let (theta, s) = chain.ritz();
    let m = chain.dim();
    let beta_m = chain.next.as_ref().map(|w| ctx.opair.m_norm(w)).unwrap_or(0.0);
    let mut out = Vec::new();
    for (i, &th) in theta.iter().enumerate() {
        if th == 0.0 {
            continue;
        }
        let lsq = ctx.factor.shift + 1.0 / th;
        if window.contains(lsq) {
            out.push((i, lsq, (beta_m * s[(m - 1, i)]).abs() / (th.abs() * lsq.abs())));
        }
    }
    (out, s)
}

/// Ritz pairs whose true residual meets `tol`, and the worst residual seen.
fn verify_ritz(ctx: &Ctx, chain: &Chain, cands: &[(usize, f64, f64)], s: &DMatrix<f64>, tol: f64) -> (Vec<Converged>, f64) {
    let m = chain.dim();
    let checked = par::map(cands, |&(i, _, _)| {
        let coeffs: Vec<f64> = (0..m).map(|k| s[(k, i)]).collect();
        let (x, lsq) = polish(ctx, chain.vector(&coeffs));
        let res = relative_residual(ctx.opair, &x, lsq);
        (Converged { x }, res)
    });
    let worst = checked.iter().map(|c| c.1).fold(0.0, f64::max);
    (checked.into_iter().filter(|c| c.1 <= tol).map(|c| c.0).collect(), worst)
}

/// Rayleigh–Ritz on a set of vectors: returns `(λ², M-orthonormal vector)`.
fn rayleigh_ritz(opair: &OperatorPair, xs: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let k = xs.len();
    if k == 0 {
        return vec![];
    }
    let kx: Vec<Vec<f64>> = xs.iter().map(|x| opair.stiffness.matvec(x)).collect();
    let mx: Vec<Vec<f64>> = xs.iter().map(|x| opair.mass.matvec(x)).collect();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = par::dot(&xs[i], &kx[j]);
            b[(i, j)] = par::dot(&xs[i], &mx[j]);
        }
    }
    let a = 0.5 * (&a + a.transpose());
    let b = 0.5 * (&b + b.transpose());
    let Some(chol) = b.clone().cholesky() else {
        return xs.iter().map(|x| (opair.energy(x) / opair.m_inner(x, x), x.clone())).collect();
    };
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("cholesky factor is invertible");
    let c = &linv * &a * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let coef = linv.transpose() * &eig.eigenvectors;
    let n = xs[0].len();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = vec![0.0; n];
        for (i, x) in xs.iter().enumerate() {
            let c = coef[(i, j)];
            for (vi, xi) in v.iter_mut().zip(x) {
                *vi += c * xi;
            }
        }
        let nrm = opair.m_norm(&v);
        v.iter_mut().for_each(|x| *x /= nrm);
        out.push((eig.eigenvalues[j], v));
    }
    out
}

/// All eigenpairs in `window` (at most `max_count`, nearest the centre),
/// sorted by eigenvalue.
pub fn solve_window(opair: &OperatorPair, window: SpectralWindow, max_count: usize) -> Result<Vec<Eigenpair>> {
    solve_window_with(opair, window, max_count, &SolverOptions::default(), &ordering(opair))
}

pub fn solve_window_with(
    opair: &OperatorPair,
    window: SpectralWindow,
    max_count: usize,
    opts: &SolverOptions,
    perm: &[usize],
) -> Result<Vec<Eigenpair>> {
    if !(window.center > 0.0) {
        return Err(LabError::Invalid(format!("window centre must be positive, got {}", window.center)));
    }
    if max_count == 0 || opair.num_dofs() == 0 {
        return Ok(vec![]);
    }
    let below_hi = count_below_with(opair, window.hi(), perm)?;
    let below_lo = count_below_with(opair, window.lo(), perm)?;
    let mut pairs = solve_split(opair, window, below_lo, below_hi, opts, perm)?;
    for p in &mut pairs {
        p.window = window;
    }
    if pairs.len() > max_count {
        pairs.sort_by(|a, b| {
            (a.lambdasq - window.center)
                .abs()
                .total_cmp(&(b.lambdasq - window.center).abs())
                .then(a.lambdasq.total_cmp(&b.lambdasq))
        });
        pairs.truncate(max_count);
    }
    pairs.sort_by(|a, b| a.lambdasq.total_cmp(&b.lambdasq));
    Ok(pairs)
}

/// Bisect windows holding more than `MAX_PER_SHIFT` eigenvalues so that every
/// shift sees a narrow window.
fn solve_split(
    opair: &OperatorPair,
    window: SpectralWindow,
    below_lo: usize,
    below_hi: usize,
    opts: &SolverOptions,
    perm: &[usize],
) -> Result<Vec<Eigenpair>> {
    let target = below_hi - below_lo;
    if target == 0 {
        return Ok(vec![]);
    }
    if target > MAX_PER_SHIFT {
        let mid = window.center;
        let below_mid = count_below_with(opair, mid, perm)?;
        if below_mid > below_lo && below_mid < below_hi {
            let mut left = solve_split(opair, SpectralWindow::from_range(window.lo(), mid)?, below_lo, below_mid, opts, perm)?;
            left.extend(solve_split(opair, SpectralWindow::from_range(mid, window.hi())?, below_mid, below_hi, opts, perm)?);
            return Ok(left);
        }
    }
    solve_counted(opair, window, target, opts, perm)
}

fn solve_counted(
    opair: &OperatorPair,
    window: SpectralWindow,
    target: usize,
    opts: &SolverOptions,
    perm: &[usize],
) -> Result<Vec<Eigenpair>> {
    let n = opair.num_dofs();
    let factor = factor_shift(opair, window.center, perm)?;
    let ctx = Ctx { opair, factor: &factor };

    let classes: Vec<Class> = if opair.mirrors.is_some() {
        vec![Some((1, 1)), Some((1, -1)), Some((-1, 1)), Some((-1, -1))]
    } else {
        vec![None]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ window.center.to_bits());
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };

    // per class: locked vectors from finished chains, and the live chain
    let mut locked: Vec<Vec<Vec<f64>>> = vec![vec![]; classes.len()];
    let mut mlocked: Vec<Vec<Vec<f64>>> = vec![vec![]; classes.len()];
    let mut chains: Vec<Chain> = classes.iter().map(|&c| Chain::new(c, random(&mut rng))).collect();
    let cap = (n / classes.len()).clamp(1, 80 + 8 * target);
    let mut restarts = 0;
    let mut found: Vec<Vec<Converged>> = (0..classes.len()).map(|_| vec![]).collect();

    loop {
        for (ci, chain) in chains.iter_mut().enumerate() {
            chain.extend(&ctx, opts.block, &locked[ci], &mlocked[ci], cap);
        }
        let stalled = chains.iter().all(|c| c.exhausted || c.dim() >= cap);
        let ritz: Vec<_> = chains.iter().map(|c| ritz_in_window(&ctx, c, &window)).collect();
        // the cheap Lanczos estimate gates the exact residual check
        let estimated: usize = (0..classes.len())
            .map(|ci| locked[ci].len() + ritz[ci].0.iter().filter(|c| c.2 <= opts.tol).count())
            .sum();
        if estimated < target && !stalled {
            continue;
        }
        let mut total = 0;
        let mut worst = 0.0f64;
        for (ci, chain) in chains.iter().enumerate() {
            let cands: Vec<_> = ritz[ci].0.iter().copied().filter(|c| c.2 <= 1e3 * opts.tol).collect();
            let (conv, w) = verify_ritz(&ctx, chain, &cands, &ritz[ci].1, opts.tol);
            worst = worst.max(w);
            total += conv.len() + locked[ci].len();
            found[ci] = conv;
        }
        if total >= target {
            break;
        }
        if stalled {
            if restarts >= opts.max_restarts {
                return Err(LabError::NoConvergence { found: total, wanted: target, residual: worst });
            }
            restarts += 1;
            // lock what converged and restart every class deflated against it
            for ci in 0..classes.len() {
                for c in found[ci].drain(..) {
                    mlocked[ci].push(opair.mass.matvec(&c.x));
                    locked[ci].push(c.x);
                }
                chains[ci] = Chain::new(classes[ci], random(&mut rng));
            }
        }
    }

    let mut pairs: Vec<Eigenpair> = Vec::new();
    for (ci, class) in classes.iter().enumerate() {
        let mut xs: Vec<Vec<f64>> = locked[ci].clone();
        xs.extend(found[ci].iter().map(|c| c.x.clone()));
        for (_, mut v) in rayleigh_ritz(opair, &xs) {
            project(opair, *class, &mut v);
            let nrm = opair.m_norm(&v);
            v.iter_mut().for_each(|x| *x /= nrm);
            let lsq = opair.energy(&v);
            let res = relative_residual(opair, &v, lsq);
            pairs.push(Eigenpair {
                lambdasq: lsq,
                lambda: lsq.sqrt(),
                vector: FieldVector(v),
                residual_bound: res,
                window,
                parity: *class,
            });
        }
    }
    pairs.retain(|p| window.contains(p.lambdasq));
    Ok(pairs)
}

/// The `count` lowest eigenpairs.
pub fn lowest(opair: &OperatorPair, count: usize) -> Result<Vec<Eigenpair>> {
    if count == 0 {
        return Ok(vec![]);
    }
    let perm = ordering(opair);
    // grow an upper bound until the inertia count covers `count`
    let diag_max = opair
        .stiffness
        .diagonal()
        .iter()
        .zip(opair.mass.diagonal())
        .fold(0.0f64, |m, (k, mm)| m.max(k / mm));
    let mut hi = 1.0f64;
    let mut below = count_below_with(opair, hi, &perm)?;
    while below < count {
        if hi > 4.0 * diag_max {
            return Err(LabError::Invalid(format!("only {below} eigenvalues available, asked for {count}")));
        }
        hi *= 2.0;
        below = count_below_with(opair, hi, &perm)?;
    }
    let window = SpectralWindow::from_range(0.0, hi)?;
    let mut pairs = solve_window_with(opair, window, usize::MAX, &SolverOptions::default(), &perm)?;
    pairs.truncate(count);
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, TriMesh};
    use std::f64::consts::PI;

    fn rect_exact(count: usize) -> Vec<f64> {
        let mut v = Vec::new();
        for k in 1..40 {
            for m in 1..40 {
                v.push((k as f64 * PI / 4.0).powi(2) + (m as f64 * PI / 2.0).powi(2));
            }
        }
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    #[test]
    fn window_formula() {
        let w = bouncing_ball_window(10, 1.0, 5.0).unwrap();
        assert!((w.center - (10.5 * PI).powi(2)).abs() < 1e-9);
        assert!((w.center - 1088.2).abs() < 0.2);
        let w = bouncing_ball_window(0, 1.0, 1.0).unwrap();
        assert!((w.center - 2.4674).abs() < 1e-4);
        let w = bouncing_ball_window(3, 2.0, 1.0).unwrap();
        assert!((w.center - 30.226).abs() < 1e-3);
        assert!(SpectralWindow::new(1.0, 0.0).is_err());
    }

    #[test]
    fn rectangle_lowest_three() {
        let mesh = TriMesh::build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.05).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let pairs = lowest(&op, 3).unwrap();
        let exact = rect_exact(3);
        for (p, e) in pairs.iter().zip(&exact) {
            assert!((p.lambdasq - e).abs() / e < 0.005, "{} vs {e}", p.lambdasq);
            assert!(p.residual_bound <= SOLVER_TOL);
        }
    }

    #[test]
    fn orthonormal_within_window_and_count_consistent() {
        let mesh = TriMesh::build(Domain::Stadium { alpha: 1.0, beta: 1.0 }, 0.1).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let w = SpectralWindow::new(60.0, 25.0).unwrap();
        let pairs = solve_window(&op, w, 1000).unwrap();
        let expect = count_below(&op, w.hi()).unwrap() - count_below(&op, w.lo()).unwrap();
        assert_eq!(pairs.len(), expect);
        assert!(pairs.len() >= 3);
        for i in 0..pairs.len() {
            let ui = &pairs[i].vector.0;
            assert!((op.m_inner(ui, ui) - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!(op.m_inner(ui, &pairs[j].vector.0).abs() < 1e-10);
            }
            assert!(pairs[i].residual_bound <= SOLVER_TOL);
        }
        assert!(pairs.windows(2).all(|p| p[0].lambdasq <= p[1].lambdasq));
    }

    #[test]
    fn disk_fundamental() {
        // j_{0,1} from bisection on the power series of J0
        let j0 = |x: f64| {
            let mut term = 1.0;
            let mut s = 1.0;
            for k in 1..60 {
                term *= -(x * x / 4.0) / (k as f64 * k as f64);
                s += term;
            }
            s
        };
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if j0(a) * j0(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        let zero = 0.5 * (a + b);
        assert!((zero - 2.404826).abs() < 1e-6);
        let mesh = TriMesh::build(Domain::Disk { beta: 1.0 }, 0.05).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        let p = lowest(&op, 1).unwrap();
        assert!((p[0].lambdasq - zero * zero).abs() / (zero * zero) < 0.01, "{}", p[0].lambdasq);
    }

    #[test]
    fn count_below_edges() {
        let mesh = TriMesh::build(Domain::Rectangle { alpha: 2.0, beta: 1.0 }, 0.05).unwrap();
        let op = OperatorPair::assemble(&mesh).unwrap();
        assert_eq!(count_below(&op, 1.0).unwrap(), 0);
        assert_eq!(count_below(&op, -3.0).unwrap(), 0);
        let exact = rect_exact(1000).iter().filter(|&&v| v <= 20.0).count();
        assert_eq!(count_below(&op, 20.0).unwrap(), exact);
    }
}
