//! Product-vector decomposition of separable two-qubit operators.

use crate::linalg::{self, CMat, CVec};
use nalgebra::DMatrix;

/// `|ṽ⟩ = (σ_y ⊗ σ_y)|v̄⟩`.
fn spin_flip(v: &CVec) -> CVec {
    CVec::from_vec(vec![-v[3].conj(), v[2].conj(), v[1].conj(), -v[0].conj()])
}

/// Takagi factorization `τ = U diag(s) Uᵀ` of a complex symmetric matrix,
/// singular values descending.
fn takagi(tau: &CMat) -> (Vec<f64>, CMat) {
    let n = tau.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = tau[(i, j)];
            m[(i, j)] = z.re;
            m[(i, j + n)] = z.im;
            m[(i + n, j)] = z.im;
            m[(i + n, j + n)] = -z.re;
        }
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let smax = eig.eigenvalues[order[0]].max(0.0);
    let mut vals = Vec::with_capacity(n);
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    for &k in order.iter().take(n) {
        let s = eig.eigenvalues[k];
        if s <= 1e-10 * smax.max(1e-300) {
            break;
        }
        let w = eig.eigenvectors.column(k);
        cols.push(CVec::from_fn(n, |i, _| linalg::c(w[i], w[i + n])));
        vals.push(s);
    }
    // zero singular values: any orthonormal completion lies in conj(ker τ)
    let mut k = 0;
    while cols.len() < n {
        let mut v = linalg::basis_vector(n, k);
        k += 1;
        for u in &cols {
            let p = u.dotc(&v);
            v -= u * p;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            cols.push(v / linalg::r(nv));
            vals.push(0.0);
        }
    }
    let mut u = CMat::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        u.set_column(j, col);
    }
    (vals, u)
}

/// Angles `φ_j` with `Σ_j λ_j e^{iφ_j} = 0` for descending `λ`, exact when
/// the largest does not exceed the sum of the others.
fn closing_angles(l: &[f64; 4]) -> [f64; 4] {
    use std::f64::consts::PI;
    if l[0] >= l[1] + l[2] + l[3] || l[1] <= 0.0 {
        return [0.0, PI, PI, PI];
    }
    let tri = |a: f64, b: f64, len: f64| -> f64 {
        if a * b <= 0.0 {
            return PI;
        }
        ((len * len - a * a - b * b) / (2.0 * a * b)).clamp(-1.0, 1.0).acos()
    };
    let len = (l[0] - l[1]).abs().max(l[2] - l[3]).min(l[2] + l[3]);
    let alpha = tri(l[0], l[1], len);
    let head = linalg::r(l[0]) + linalg::c(0.0, alpha).exp() * l[1];
    let beta = (-head).arg();
    let delta = tri(l[2], l[3], len);
    let tail = linalg::r(l[2]) + linalg::c(0.0, delta).exp() * l[3];
    let rot = beta - tail.arg();
    [0.0, alpha, rot, rot + delta]
}

/// Product vectors `(a_k, b_k)` with `J ≈ Σ_k a_k a_k† ⊗ b_k b_k†` for a PSD
/// operator `J` on `2 ⊗ 2`. Exact up to round-off when `J` is PPT.
pub(crate) fn product_decomposition(j: &CMat) -> Vec<(CVec, CVec)> {
    let (vals, vecs) = linalg::eigh(j);
    let v: Vec<CVec> = (0..4).map(|k| vecs.column(k).into_owned() * linalg::r(vals[k].max(0.0).sqrt())).collect();
    let tau = CMat::from_fn(4, 4, |i, k| v[i].dotc(&spin_flip(&v[k])));
    let tau = (&tau + tau.transpose()) * linalg::r(0.5);
    let (lam, q) = takagi(&tau);
    // x_i = Σ_j Q_ji v_j has ⟨x_i|x̃_k⟩ = λ_i δ_ik
    let x: Vec<CVec> = (0..4)
        .map(|i| (0..4).fold(CVec::zeros(4), |acc, jj| acc + &v[jj] * q[(jj, i)]))
        .collect();
    let phi = closing_angles(&[lam[0], lam[1], lam[2], lam[3]]);
    let y: Vec<CVec> = (0..4).map(|i| &x[i] * linalg::c(0.0, -phi[i] / 2.0).exp()).collect();
    let h = [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0], [1.0, -1.0, 1.0, -1.0]];
    let mut out = Vec::new();
    for row in h {
        let z = (0..4).fold(CVec::zeros(4), |acc, k| acc + &y[k] * linalg::r(row[k] / 2.0));
        if z.norm() < 1e-12 {
            continue;
        }
        let zm = CMat::from_fn(2, 2, |i, k| z[i * 2 + k]);
        // rank one: zm = a bᵀ with a the larger column
        let k = if zm.column(0).norm() >= zm.column(1).norm() { 0 } else { 1 };
        let a: CVec = zm.column(k).into_owned();
        let bt = a.adjoint() * &zm / linalg::r(a.norm_squared());
        let b = CVec::from_fn(2, |j, _| bt[(0, j)]);
        out.push((a, b));
    }
    out
}
