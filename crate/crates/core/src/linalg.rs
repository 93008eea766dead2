//! Dense complex linear algebra shared by every module.
//!
//! Tensor index convention: for subsystem dimensions `[d0, d1, ..., dk]` the
//! flat index of `(i0, i1, ..., ik)` is row-major with `i0` most significant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    let mut h = m + m.adjoint();
    h.scale_mut(0.5);
    h
}

/// Largest entrywise `|M - M†|`, with the offending coordinates.
pub fn hermiticity_defect(m: &CMat) -> (f64, usize, usize) {
    let n = m.nrows();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    worst
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Real part of `Tr(A B)` without forming the product.
pub fn re_trace_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            let x = a[(i, k)];
            let y = b[(k, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// Frobenius norm.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
///
/// Each eigenvector is rotated so that its largest-magnitude component is
/// real and positive; ties go to the lowest index.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    for (k, &idx) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[idx]);
        let col = eig.eigenvectors.column(idx);
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for i in 0..n {
            let mag = col[i].norm();
            if mag > best_mag + 1e-12 {
                best_mag = mag;
                best = i;
            }
        }
        let phase = if best_mag > 0.0 { col[best].conj() / best_mag } else { ONE };
        for i in 0..n {
            vecs[(i, k)] = col[i] * phase;
        }
    }
    (vals, vecs)
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut v: Vec<f64> = nalgebra::linalg::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// `V diag(f(λ)) V†` for Hermitian `m`.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    rebuild(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vecs)
}

pub(crate) fn rebuild(vals: &[f64], vecs: &CMat) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= v;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a PSD matrix. Eigenvalues at or below `1e-14 λ_max`
/// (including slightly negative rounding noise) are set to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    psd_pow(m, 0.5, 1e-14)
}

/// Matrix power on the support: eigenvalues at or below `cutoff * λ_max` map to zero.
pub fn psd_pow(m: &CMat, p: f64, rel_cutoff: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let lmax = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_cutoff * lmax;
    let f: Vec<f64> = vals
        .iter()
        .map(|&x| if x > cut && x > 0.0 { x.powf(p) } else { 0.0 })
        .collect();
    rebuild(&f, &vecs)
}

/// Projector onto the eigenspaces with eigenvalue above `rel_cutoff * λ_max`.
pub fn support_projector(m: &CMat, rel_cutoff: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let lmax = vals.first().copied().unwrap_or(0.0).max(0.0);
    let f: Vec<f64> = vals.iter().map(|&x| if x > rel_cutoff * lmax && x > 0.0 { 1.0 } else { 0.0 }).collect();
    rebuild(&f, &vecs)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

/// The isometry `W` (shape `cols(q) x rows(q)`) maximizing `Re Tr(W q)`.
///
/// With `q = L Σ R†`, the maximizer is `R L†` and the maximum is `‖q‖₁`.
pub fn polar_maximizer(q: &CMat) -> CMat {
    let svd = q.clone().svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    // q = u Σ v_t, maximizer = v_t† u†
    v_t.adjoint() * u.adjoint()
}

/// Decomposes a flat index into per-subsystem indices.
#[inline]
pub fn unravel(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

#[inline]
pub fn ravel(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for k in 0..dims.len() {
        flat = flat * dims[k] + idx[k];
    }
    flat
}

/// Reorders tensor factors: system `k` of the result is system `perm[k]` of the input.
pub fn permute_systems(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let n: usize = dims.iter().product();
    let map = permutation_map(dims, perm);
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    out
}

/// Same reordering applied to a vector.
pub fn permute_vector(v: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let map = permutation_map(dims, perm);
    let mut out = CVec::zeros(v.len());
    for i in 0..v.len() {
        out[map[i]] = v[i];
    }
    out
}

/// `map[old_flat] = new_flat` for the reordering `perm`.
pub fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut idx = vec![0usize; dims.len()];
    let mut new_idx = vec![0usize; dims.len()];
    (0..n)
        .map(|flat| {
            unravel(flat, dims, &mut idx);
            for (k, &p) in perm.iter().enumerate() {
                new_idx[k] = idx[p];
            }
            ravel(&new_idx, &new_dims)
        })
        .collect()
}

/// Partial trace keeping the systems in `keep` (in their original relative order).
pub fn ptrace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let dk: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    // bring to keep ⊗ traced ordering, then contract the trailing factor
    let mut perm = keep_sorted.clone();
    perm.extend(&traced);
    let p = if perm.iter().enumerate().all(|(i, &x)| i == x) {
        m.clone()
    } else {
        permute_systems(m, dims, &perm)
    };
    let mut out = CMat::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = ZERO;
            for t in 0..dt {
                s += p[(i * dt + t, j * dt + t)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Partial transpose on the systems listed in `which`.
pub fn partial_transpose(m: &CMat, dims: &[usize], which: &[usize]) -> CMat {
    let n: usize = dims.iter().product();
    let mut out = CMat::zeros(n, n);
    let mut ii = vec![0usize; dims.len()];
    let mut jj = vec![0usize; dims.len()];
    for i in 0..n {
        unravel(i, dims, &mut ii);
        for j in 0..n {
            unravel(j, dims, &mut jj);
            let mut a = ii.clone();
            let mut b = jj.clone();
            for &w in which {
                a[w] = jj[w];
                b[w] = ii[w];
            }
            out[(ravel(&a, dims), ravel(&b, dims))] = m[(i, j)];
        }
    }
    out
}

/// Applies a channel given by its Choi matrix (`in ⊗ out` ordering) to the
/// last factor of an operator on `rest ⊗ in`; the result lives on `rest ⊗ out`.
pub fn apply_choi(choi: &CMat, d_in: usize, d_out: usize, x: &CMat, d_rest: usize) -> CMat {
    let mut out = CMat::zeros(d_rest * d_out, d_rest * d_out);
    for r in 0..d_rest {
        for rp in 0..d_rest {
            for i in 0..d_in {
                for j in 0..d_in {
                    let coef = x[(r * d_in + i, rp * d_in + j)];
                    if coef == ZERO {
                        continue;
                    }
                    for o in 0..d_out {
                        for op in 0..d_out {
                            out[(r * d_out + o, rp * d_out + op)] += coef * choi[(i * d_out + o, j * d_out + op)];
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn basis_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    v
}

/// Cholesky-based inverse of a Hermitian positive definite matrix.
pub fn hpd_inverse(m: &CMat) -> Option<CMat> {
    nalgebra::linalg::Cholesky::new(hermitian_part(m)).map(|c| c.inverse())
}

/// Hermitian basis of `n x n` matrices orthogonal under `Re Tr(A B)`:
/// diagonal units, then `E_pq + E_qp` and `i(E_pq - E_qp)` for `p < q`.
/// Returned in sparse form `(row, col, value)`.
pub fn hermitian_basis(n: usize) -> Vec<Vec<(usize, usize, C64)>> {
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        out.push(vec![(p, p, ONE)]);
    }
    for p in 0..n {
        for q in (p + 1)..n {
            out.push(vec![(p, q, ONE), (q, p, ONE)]);
            out.push(vec![(p, q, I), (q, p, -I)]);
        }
    }
    out
}
