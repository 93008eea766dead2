//! Primal-dual interior-point method for block-diagonal complex Hermitian
//! semidefinite programs
//!
//! ```text
//! minimize   Σ_k Re Tr(C_k X_k)
//! subject to Σ_k Re Tr(A_ik X_k) = b_i,   X_k ⪰ 0
//! ```
//!
//! with dual `maximize bᵀy s.t. S_k = C_k - Σ_i y_i A_ik ⪰ 0`. Search
//! directions are HKM with a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};

/// One block of a constraint matrix. Sparse entries list every nonzero of the
/// (Hermitian) matrix explicitly.
#[derive(Debug, Clone)]
pub enum ConMat {
    Sparse(Vec<(usize, usize, C64)>),
    Dense(CMat),
}

impl ConMat {
    /// `Re Tr(A G)` for any square `G`.
    pub fn dot(&self, g: &CMat) -> f64 {
        match self {
            ConMat::Sparse(e) => e.iter().map(|&(r, c, v)| (v * g[(c, r)]).re).sum(),
            ConMat::Dense(a) => {
                let n = a.nrows();
                let mut s = 0.0;
                for c in 0..n {
                    for r in 0..n {
                        let x = a[(r, c)];
                        let y = g[(c, r)];
                        s += x.re * y.re - x.im * y.im;
                    }
                }
                s
            }
        }
    }

    pub fn add_to(&self, target: &mut CMat, coef: f64) {
        match self {
            ConMat::Sparse(e) => {
                for &(r, c, v) in e {
                    target[(r, c)] += v * coef;
                }
            }
            ConMat::Dense(a) => target.zip_apply(a, |t, x| *t += x * coef),
        }
    }

    fn fro_norm(&self) -> f64 {
        match self {
            ConMat::Sparse(e) => e.iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt(),
            ConMat::Dense(a) => linalg::fro_norm(a),
        }
    }

    fn is_dense(&self) -> bool {
        matches!(self, ConMat::Dense(_))
    }

    /// `X A S⁻¹`.
    fn sandwich(&self, x: &CMat, sinv: &CMat) -> CMat {
        match self {
            ConMat::Dense(a) => x * a * sinv,
            ConMat::Sparse(e) => {
                let n = x.nrows();
                let mut out = CMat::zeros(n, n);
                for &(r, c, v) in e {
                    // v · X[:, r] ⊗ Sinv[c, :]
                    for j in 0..n {
                        let s = sinv[(c, j)] * v;
                        if s == ZERO {
                            continue;
                        }
                        for i in 0..n {
                            out[(i, j)] += x[(i, r)] * s;
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub parts: Vec<(usize, ConMat)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Sdp {
    pub block_dims: Vec<usize>,
    pub c: Vec<CMat>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target for relative gap and infeasibilities.
    pub tol: f64,
    /// Accepted on stagnation.
    pub loose_tol: f64,
    pub max_iter: usize,
    /// Return the best iterate instead of an error when neither tolerance is
    /// reached; for callers that repair and re-verify the solution.
    pub accept_inexact: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, loose_tol: 1e-6, max_iter: 200, accept_inexact: false }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<CMat>,
    pub s: Vec<CMat>,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn max_residual(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.gap)
    }
}

struct Workspace<'a> {
    sdp: &'a Sdp,
    /// For each block, the constraint indices touching it with their part.
    by_block: Vec<Vec<(usize, &'a ConMat)>>,
}

impl<'a> Workspace<'a> {
    fn new(sdp: &'a Sdp) -> Self {
        let mut by_block = vec![Vec::new(); sdp.block_dims.len()];
        for (i, con) in sdp.constraints.iter().enumerate() {
            for (k, a) in &con.parts {
                by_block[*k].push((i, a));
            }
        }
        Workspace { sdp, by_block }
    }

    fn m(&self) -> usize {
        self.sdp.constraints.len()
    }

    /// `𝒜(G)_i = Σ_k Re Tr(A_ik G_k)`.
    fn a_op(&self, g: &[CMat]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for (i, con) in self.sdp.constraints.iter().enumerate() {
            out[i] = con.parts.iter().map(|(k, a)| a.dot(&g[*k])).sum();
        }
        out
    }

    /// `𝒜*(y)_k = Σ_i y_i A_ik`.
    fn a_adj(&self, y: &DVector<f64>) -> Vec<CMat> {
        let mut out: Vec<CMat> = self.sdp.block_dims.iter().map(|&n| CMat::zeros(n, n)).collect();
        for (i, con) in self.sdp.constraints.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for (k, a) in &con.parts {
                a.add_to(&mut out[*k], y[i]);
            }
        }
        out
    }

    /// HKM Schur complement `M_ij = Σ_k Re Tr(A_ik X_k A_jk S_k⁻¹)`.
    fn schur(&self, x: &[CMat], sinv: &[CMat]) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::<f64>::zeros(m, m);
        for (k, cons) in self.by_block.iter().enumerate() {
            let (xk, sk) = (&x[k], &sinv[k]);
            let dense: Vec<usize> = (0..cons.len()).filter(|&p| cons[p].1.is_dense()).collect();
            let sparse: Vec<usize> = (0..cons.len()).filter(|&p| !cons[p].1.is_dense()).collect();
            for (pi, &p) in dense.iter().enumerate() {
                let (i, ai) = cons[p];
                let g = ai.sandwich(xk, sk);
                for &q in &dense[pi..] {
                    let (j, aj) = cons[q];
                    let v = aj.dot(&g);
                    out[(i, j)] += v;
                    if i != j {
                        out[(j, i)] += v;
                    }
                }
                for &q in &sparse {
                    let (j, aj) = cons[q];
                    let v = aj.dot(&g);
                    out[(i, j)] += v;
                    out[(j, i)] += v;
                }
            }
            for (pi, &p) in sparse.iter().enumerate() {
                let (i, ai) = cons[p];
                let ei = match ai {
                    ConMat::Sparse(e) => e,
                    ConMat::Dense(_) => unreachable!(),
                };
                for &q in &sparse[pi..] {
                    let (j, aj) = cons[q];
                    let ej = match aj {
                        ConMat::Sparse(e) => e,
                        ConMat::Dense(_) => unreachable!(),
                    };
                    let mut v = 0.0;
                    for &(r, c, a) in ei {
                        for &(r2, c2, b) in ej {
                            v += (a * b * xk[(c, r2)] * sk[(c2, r)]).re;
                        }
                    }
                    out[(i, j)] += v;
                    if i != j {
                        out[(j, i)] += v;
                    }
                }
            }
        }
        out
    }
}

fn inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::re_trace_prod(x, y)).sum()
}

fn fro(a: &[CMat]) -> f64 {
    a.iter().map(|x| linalg::fro_norm(x).powi(2)).sum::<f64>().sqrt()
}

/// Largest `α ≤ α_cap` with `X + α ΔX ⪰ 0`, given a Cholesky factor of `X`.
fn max_step(x: &[CMat], dx: &[CMat]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xk, dk) in x.iter().zip(dx) {
        let n = xk.nrows();
        if n == 0 {
            continue;
        }
        let lam = match nalgebra::linalg::Cholesky::new(xk.clone()) {
            Some(ch) => {
                let l = ch.l();
                let linv = l.solve_lower_triangular(&linalg::identity(n)).unwrap_or_else(|| linalg::identity(n));
                let q = &linv * dk * linv.adjoint();
                linalg::min_eigenvalue(&q)
            }
            None => return 0.0,
        };
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    alpha
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = nalgebra::linalg::Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    let scale = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut delta = 1e-14 * scale;
    for _ in 0..8 {
        let mut reg = m.clone();
        for i in 0..m.nrows() {
            reg[(i, i)] += delta;
        }
        if let Some(ch) = nalgebra::linalg::Cholesky::new(reg) {
            return Some(ch.solve(rhs));
        }
        delta *= 100.0;
    }
    m.clone().lu().solve(rhs)
}

fn herm_inverse(s: &CMat) -> CMat {
    match linalg::hpd_inverse(s) {
        Some(inv) => linalg::hermitian_part(&inv),
        None => linalg::herm_fn(s, |v| if v > 1e-300 { 1.0 / v } else { 0.0 }),
    }
}

pub fn solve(sdp: &Sdp, opts: &SolverOptions) -> Result<SdpSolution> {
    let ws = Workspace::new(sdp);
    let m = ws.m();
    let nblocks = sdp.block_dims.len();
    let b = DVector::from_iterator(m, sdp.constraints.iter().map(|c| c.rhs));
    let b_norm = b.norm();
    let c_norm = fro(&sdp.c);
    let n_total: usize = sdp.block_dims.iter().sum();

    let mut x: Vec<CMat> = Vec::with_capacity(nblocks);
    let mut s: Vec<CMat> = Vec::with_capacity(nblocks);
    for (k, &n) in sdp.block_dims.iter().enumerate() {
        let sq = (n as f64).sqrt();
        let mut xi: f64 = 10.0_f64.max(sq);
        let mut eta: f64 = 10.0_f64.max(sq).max(linalg::fro_norm(&sdp.c[k]));
        for (i, a) in &ws.by_block[k] {
            let an = a.fro_norm();
            xi = xi.max(sq * (1.0 + b[*i].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(linalg::identity(n) * linalg::r(xi));
        s.push(linalg::identity(n) * linalg::r(eta));
    }
    let mut y = DVector::<f64>::zeros(m);

    let mut best: Option<SdpSolution> = None;
    let mut stall = 0usize;

    for iter in 0..=opts.max_iter {
        let ax = ws.a_op(&x);
        let rp = &b - &ax;
        let aty = ws.a_adj(&y);
        let rd: Vec<CMat> = (0..nblocks).map(|k| &sdp.c[k] - &aty[k] - &s[k]).collect();
        let pobj = inner(&sdp.c, &x);
        let dobj = b.dot(&y);
        let xs = inner(&x, &s);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = fro(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
        let current = SdpSolution {
            x: x.clone(),
            s: s.clone(),
            y: y.iter().copied().collect(),
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: pinf,
            dual_residual: dinf,
            gap,
            iterations: iter,
        };
        let improved = best.as_ref().is_none_or(|bst| current.max_residual() < 0.9 * bst.max_residual());
        if improved {
            stall = 0;
        } else {
            stall += 1;
        }
        if best.as_ref().is_none_or(|bst| current.max_residual() < bst.max_residual()) {
            best = Some(current);
        }
        if pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol {
            return Ok(best.unwrap());
        }
        if iter == opts.max_iter || stall >= 8 || !pobj.is_finite() || !dobj.is_finite() {
            break;
        }

        let mu = xs / n_total as f64;
        let sinv: Vec<CMat> = s.iter().map(herm_inverse).collect();
        let schur = ws.schur(&x, &sinv);
        // X R_d S⁻¹ is shared by predictor and corrector
        let x_rd_sinv: Vec<CMat> = (0..nblocks).map(|k| &x[k] * &rd[k] * &sinv[k]).collect();

        let direction = |sigma_mu: f64, corr: Option<&Vec<CMat>>| -> Option<(DVector<f64>, Vec<CMat>, Vec<CMat>)> {
            let base: Vec<CMat> = (0..nblocks)
                .map(|k| {
                    let mut t = &sinv[k] * linalg::r(sigma_mu) - &x[k] - &x_rd_sinv[k];
                    if let Some(cc) = corr {
                        t -= &cc[k];
                    }
                    t
                })
                .collect();
            let rhs = &rp - ws.a_op(&base);
            let dy = solve_spd(&schur, &rhs)?;
            let atdy = ws.a_adj(&dy);
            let ds: Vec<CMat> = (0..nblocks).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<CMat> = (0..nblocks)
                .map(|k| {
                    let mut t = &sinv[k] * linalg::r(sigma_mu) - &x[k] - &x[k] * &ds[k] * &sinv[k];
                    if let Some(cc) = corr {
                        t -= &cc[k];
                    }
                    linalg::hermitian_part(&t)
                })
                .collect();
            Some((dy, dx, ds))
        };

        let Some((_, dx_a, ds_a)) = direction(0.0, None) else { break };
        let ap = max_step(&x, &dx_a).min(1.0);
        let ad = max_step(&s, &ds_a).min(1.0);
        let x_a: Vec<CMat> = (0..nblocks).map(|k| &x[k] + &dx_a[k] * linalg::r(ap)).collect();
        let s_a: Vec<CMat> = (0..nblocks).map(|k| &s[k] + &ds_a[k] * linalg::r(ad)).collect();
        let mu_a = inner(&x_a, &s_a) / n_total as f64;
        let sigma = if mu > 0.0 { (mu_a / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let corr: Vec<CMat> = (0..nblocks).map(|k| &dx_a[k] * &ds_a[k] * &sinv[k]).collect();
        let Some((dy, dx, ds)) = direction(sigma * mu, Some(&corr)) else { break };

        let gamma = 0.95;
        let ap = (gamma * max_step(&x, &dx)).min(1.0);
        let ad = (gamma * max_step(&s, &ds)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for k in 0..nblocks {
            x[k] = linalg::hermitian_part(&(&x[k] + &dx[k] * linalg::r(ap)));
            s[k] = linalg::hermitian_part(&(&s[k] + &ds[k] * linalg::r(ad)));
        }
        y += dy * ad;
    }

    let best = best.expect("at least one iterate");
    if best.max_residual() <= opts.loose_tol || opts.accept_inexact {
        Ok(best)
    } else {
        Err(Error::NonConvergence {
            iterations: best.iterations,
            primal_residual: best.primal_residual,
            dual_residual: best.dual_residual,
            gap: best.gap,
        })
    }
}
