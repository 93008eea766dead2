//! Fidelity maximization over affinely parametrized pairs of operators.
//!
//! `√F(P, Q) = max { Re Tr Z : [[P, Z], [Z†, Q]] ⪰ 0 }`, so maximizing the
//! root fidelity between `P(W)` and `Q(W)` over PSD variables `W` subject to
//! linear equalities is a single semidefinite program.

use super::solver::{self, ConMat, Constraint, Sdp, SdpSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Linear map from `n_in x n_in` to `n_out x n_out` matrices, stored with
/// `mat[(a n_out + b), (p n_in + q)] = L(E_pq)[a, b]`.
#[derive(Debug, Clone)]
pub struct SuperOp {
    pub n_in: usize,
    pub n_out: usize,
    pub mat: CMat,
}

impl SuperOp {
    pub fn from_fn(n_in: usize, n_out: usize, mut f: impl FnMut(&CMat) -> CMat) -> Self {
        let mut mat = CMat::zeros(n_out * n_out, n_in * n_in);
        let mut e = CMat::zeros(n_in, n_in);
        for p in 0..n_in {
            for q in 0..n_in {
                e[(p, q)] = linalg::ONE;
                let out = f(&e);
                e[(p, q)] = linalg::ZERO;
                for a in 0..n_out {
                    for b in 0..n_out {
                        mat[(a * n_out + b, p * n_in + q)] = out[(a, b)];
                    }
                }
            }
        }
        SuperOp { n_in, n_out, mat }
    }

    /// `J ↦ (id_rest ⊗ R_J)(X)` for a Choi variable `J` on `in ⊗ out` and a
    /// fixed `X` on `rest ⊗ in`; the output lives on `rest ⊗ out`, optionally
    /// reordered by `perm` over the factor dimensions `out_factor_dims`.
    pub fn choi_action(x: &CMat, d_rest: usize, d_in: usize, d_out: usize, reorder: Option<(&[usize], &[usize])>) -> Self {
        let n_in = d_in * d_out;
        let n_out = d_rest * d_out;
        let map: Vec<usize> = match reorder {
            Some((dims, perm)) => linalg::permutation_map(dims, perm),
            None => (0..n_out).collect(),
        };
        let mut mat = CMat::zeros(n_out * n_out, n_in * n_in);
        for i in 0..d_in {
            for o in 0..d_out {
                for j in 0..d_in {
                    for o2 in 0..d_out {
                        let col = (i * d_out + o) * n_in + (j * d_out + o2);
                        for r in 0..d_rest {
                            for r2 in 0..d_rest {
                                let v = x[(r * d_in + i, r2 * d_in + j)];
                                if v == linalg::ZERO {
                                    continue;
                                }
                                let a = map[r * d_out + o];
                                let b = map[r2 * d_out + o2];
                                mat[(a * n_out + b, col)] = v;
                            }
                        }
                    }
                }
            }
        }
        SuperOp { n_in, n_out, mat }
    }

    pub fn apply(&self, w: &CMat) -> CMat {
        let v = nalgebra::DVector::from_fn(self.n_in * self.n_in, |k, _| w[(k / self.n_in, k % self.n_in)]);
        let out = &self.mat * v;
        CMat::from_fn(self.n_out, self.n_out, |a, b| out[a * self.n_out + b])
    }

    /// `E ↦ V† L(E) V`.
    pub fn conjugate(&self, v: &CMat) -> SuperOp {
        let r = v.ncols();
        let vd = v.adjoint();
        let mut mat = CMat::zeros(r * r, self.mat.ncols());
        for col in 0..self.mat.ncols() {
            let m = CMat::from_fn(self.n_out, self.n_out, |a, b| self.mat[(a * self.n_out + b, col)]);
            let t = &vd * m * v;
            for a in 0..r {
                for b in 0..r {
                    mat[(a * r + b, col)] = t[(a, b)];
                }
            }
        }
        SuperOp { n_in: self.n_in, n_out: r, mat }
    }

    /// Hermitian `K` with `Re Tr(H L(W)) = Re Tr(K W)` for Hermitian `W`.
    fn adjoint_sparse(&self, h: &[(usize, usize, C64)]) -> CMat {
        let n = self.n_in;
        let mut k = CMat::zeros(n, n);
        for &(r, c, v) in h {
            let row = c * self.n_out + r;
            for p in 0..n {
                for q in 0..n {
                    k[(q, p)] += v * self.mat[(row, p * n + q)];
                }
            }
        }
        linalg::hermitian_part(&k)
    }
}

/// `X(W) = constant + Σ_k L_k(W_k)`.
#[derive(Debug, Clone)]
pub struct AffineHerm {
    pub constant: CMat,
    pub terms: Vec<(usize, SuperOp)>,
}

impl AffineHerm {
    pub fn fixed(m: CMat) -> Self {
        AffineHerm { constant: m, terms: Vec::new() }
    }

    pub fn linear(n: usize, var: usize, op: SuperOp) -> Self {
        AffineHerm { constant: CMat::zeros(n, n), terms: vec![(var, op)] }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn evaluate(&self, vars: &[CMat]) -> CMat {
        let mut out = self.constant.clone();
        for (k, op) in &self.terms {
            out += op.apply(&vars[*k]);
        }
        out
    }

    fn conjugate(&self, v: &CMat) -> AffineHerm {
        AffineHerm {
            constant: v.adjoint() * &self.constant * v,
            terms: self.terms.iter().map(|(k, op)| (*k, op.conjugate(v))).collect(),
        }
    }
}

/// Linear equality `Σ Re Tr(A_k W_k) = rhs` on program variables.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub parts: Vec<(usize, ConMat)>,
    pub rhs: f64,
}

/// `Tr_out J = I_in` for a Choi variable on `in ⊗ out`.
pub fn trace_preserving(var: usize, d_in: usize, d_out: usize) -> Vec<LinearConstraint> {
    linalg::hermitian_basis(d_in)
        .into_iter()
        .map(|h| {
            let rhs = h.iter().filter(|(r, c, _)| r == c).map(|(_, _, v)| v.re).sum();
            let mut e = Vec::with_capacity(h.len() * d_out);
            for &(r, c, v) in &h {
                for o in 0..d_out {
                    e.push((r * d_out + o, c * d_out + o, v));
                }
            }
            LinearConstraint { parts: vec![(var, ConMat::Sparse(e))], rhs }
        })
        .collect()
}

/// `Tr W = value`.
pub fn trace_equals(var: usize, n: usize, value: f64) -> LinearConstraint {
    LinearConstraint {
        parts: vec![(var, ConMat::Sparse((0..n).map(|i| (i, i, linalg::ONE)).collect()))],
        rhs: value,
    }
}

/// `Σ_k W_k = target` over the listed variables, all `n x n`.
pub fn sum_equals(vars: &[usize], target: &CMat) -> Vec<LinearConstraint> {
    let n = target.nrows();
    linalg::hermitian_basis(n)
        .into_iter()
        .map(|h| {
            let rhs = h.iter().map(|&(r, c, v)| (v * target[(c, r)]).re).sum();
            LinearConstraint { parts: vars.iter().map(|&k| (k, ConMat::Sparse(h.clone()))).collect(), rhs }
        })
        .collect()
}

/// `P = W^Γ` (partial transpose over the listed factors of `dims`), which with
/// `P ⪰ 0` imposes the PPT condition on `W`.
pub fn partial_transpose_link(var_w: usize, var_p: usize, dims: &[usize], which: &[usize]) -> Vec<LinearConstraint> {
    let n: usize = dims.iter().product();
    let mut ii = vec![0usize; dims.len()];
    let mut jj = vec![0usize; dims.len()];
    let pt = |r: usize, c: usize, ii: &mut Vec<usize>, jj: &mut Vec<usize>| {
        linalg::unravel(r, dims, ii);
        linalg::unravel(c, dims, jj);
        for &w in which {
            std::mem::swap(&mut ii[w], &mut jj[w]);
        }
        (linalg::ravel(ii, dims), linalg::ravel(jj, dims))
    };
    linalg::hermitian_basis(n)
        .into_iter()
        .map(|h| {
            let neg: Vec<(usize, usize, C64)> = h
                .iter()
                .map(|&(r, c, v)| {
                    let (a, b) = pt(r, c, &mut ii, &mut jj);
                    (a, b, -v)
                })
                .collect();
            LinearConstraint { parts: vec![(var_p, ConMat::Sparse(h)), (var_w, ConMat::Sparse(neg))], rhs: 0.0 }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FidelityProgram {
    pub var_dims: Vec<usize>,
    pub first: AffineHerm,
    pub second: AffineHerm,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone)]
pub struct FidelitySolution {
    /// Optimal `√F` estimate from the primal objective.
    pub root_fidelity: f64,
    /// Dual objective (an upper bound on `√F` up to dual infeasibility).
    pub dual_bound: f64,
    pub vars: Vec<CMat>,
    pub sdp: SdpSolution,
}

/// Relative cutoff for the support of a fixed first argument.
const RANK_CUTOFF: f64 = 1e-13;

impl FidelityProgram {
    pub fn solve(&self, opts: &SolverOptions) -> Result<FidelitySolution> {
        if self.first.dim() != self.second.dim() {
            return Err(Error::DimensionMismatch("fidelity arguments must have equal size".into()));
        }
        // a fixed first argument ρ = V V† reduces the block to the support of ρ
        let (first, second) = if self.first.terms.is_empty() {
            let (vals, vecs) = linalg::eigh(&self.first.constant);
            let lmax = vals[0].max(0.0);
            let r = vals.iter().filter(|&&v| v > RANK_CUTOFF * lmax && v > 0.0).count().max(1);
            let mut v = CMat::zeros(vecs.nrows(), r);
            for k in 0..r {
                let s = vals[k].max(0.0).sqrt();
                for i in 0..vecs.nrows() {
                    v[(i, k)] = vecs[(i, k)] * s;
                }
            }
            (AffineHerm::fixed(linalg::identity(r)), self.second.conjugate(&v))
        } else {
            (self.first.clone(), self.second.clone())
        };
        let n = first.dim();
        let mut block_dims = vec![2 * n];
        block_dims.extend(&self.var_dims);
        let mut c: Vec<CMat> = block_dims.iter().map(|&d| CMat::zeros(d, d)).collect();
        for i in 0..n {
            c[0][(i, n + i)] = linalg::r(-0.5);
            c[0][(n + i, i)] = linalg::r(-0.5);
        }
        let mut constraints = Vec::new();
        for (offset, side) in [(0usize, &first), (n, &second)] {
            for h in linalg::hermitian_basis(n) {
                let rhs: f64 = h.iter().map(|&(r, cc, v)| (v * side.constant[(cc, r)]).re).sum();
                let shifted: Vec<(usize, usize, C64)> = h.iter().map(|&(r, cc, v)| (r + offset, cc + offset, v)).collect();
                let mut parts = vec![(0usize, ConMat::Sparse(shifted))];
                for (k, op) in &side.terms {
                    let kmat = op.adjoint_sparse(&h);
                    parts.push((k + 1, ConMat::Dense(-kmat)));
                }
                constraints.push(Constraint { parts, rhs });
            }
        }
        for lc in &self.constraints {
            constraints.push(Constraint {
                parts: lc.parts.iter().map(|(k, a)| (k + 1, a.clone())).collect(),
                rhs: lc.rhs,
            });
        }
        let sdp = Sdp { block_dims, c, constraints };
        let sol = solver::solve(&sdp, opts)?;
        Ok(FidelitySolution {
            root_fidelity: -sol.primal_objective,
            dual_bound: -sol.dual_objective,
            vars: sol.x[1..].to_vec(),
            sdp: sol,
        })
    }
}
