//! Quantum channels in Choi form, POVMs, isometries, and the named constructions.

mod constructions;

pub use constructions::{
    dephasing_channel, eb_channel, isometry_inverse_channel, measurement_channel, measurement_isometry,
    petz_recovery, private_state, stinespring, MeasurementDilation,
};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ONE, ZERO};
use crate::qcore::random::random_isometry;
use crate::qcore::MultipartiteState;
use crate::rng::StreamRng;

pub const CHOI_PSD_TOL: f64 = 1e-8;
pub const TP_TOL: f64 = 1e-8;
pub const POVM_PSD_TOL: f64 = 1e-9;
pub const POVM_SUM_TOL: f64 = 1e-8;
pub const ISOMETRY_TOL: f64 = 1e-9;

/// A CPTP map stored as its unnormalized Choi matrix
/// `J = Σ_ij |i⟩⟨j|_in ⊗ N(|i⟩⟨j|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    choi: CMat,
}

fn tp_defect(choi: &CMat, d_in: usize, d_out: usize) -> f64 {
    let t = linalg::ptrace(choi, &[d_in, d_out], &[0]);
    (t - linalg::identity(d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl QuantumChannel {
    pub fn new(in_dims: Vec<usize>, out_dims: Vec<usize>, choi: CMat) -> Result<Self> {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        if choi.nrows() != d_in * d_out || choi.ncols() != d_in * d_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix side {} but in x out = {}",
                choi.nrows(),
                d_in * d_out
            )));
        }
        let (dev, row, col) = linalg::hermiticity_defect(&choi);
        if dev > CHOI_PSD_TOL {
            return Err(Error::NotHermitian { deviation: dev, row, col });
        }
        let choi = linalg::hermitian_part(&choi);
        let min = linalg::min_eigenvalue(&choi);
        if min < -CHOI_PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min, tolerance: CHOI_PSD_TOL });
        }
        let tp = tp_defect(&choi, d_in, d_out);
        if tp > TP_TOL {
            return Err(Error::NotTracePreserving(tp));
        }
        Ok(Self { in_dims, out_dims, choi })
    }

    /// Nearest-valid repair of an optimizer output: Hermitian part, negative
    /// eigenvalues clamped, then `J ← (T^{-1/2} ⊗ I) J (T^{-1/2} ⊗ I)` with
    /// `T = Tr_out J`, which makes the map exactly trace preserving.
    pub fn from_choi_projected(in_dims: Vec<usize>, out_dims: Vec<usize>, choi: &CMat) -> Result<Self> {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        let j = linalg::herm_fn(choi, |x| x.max(0.0));
        let t = linalg::ptrace(&j, &[d_in, d_out], &[0]);
        let (vals, vecs) = linalg::eigh(&t);
        if vals.last().copied().unwrap_or(0.0) <= 1e-14 {
            return Err(Error::NotTracePreserving(1.0));
        }
        let inv_sqrt = linalg::rebuild(&vals.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>(), &vecs);
        let k = linalg::kron(&inv_sqrt, &linalg::identity(d_out));
        let fixed = linalg::hermitian_part(&(&k * j * &k));
        Self::new(in_dims, out_dims, fixed)
    }

    pub(crate) fn from_choi_unchecked(in_dims: Vec<usize>, out_dims: Vec<usize>, choi: CMat) -> Self {
        Self { in_dims, out_dims, choi }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        let mut v = CVec::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = ONE;
        }
        Self::from_choi_unchecked(dims.to_vec(), dims.to_vec(), linalg::outer(&v, &v))
    }

    /// `X ↦ Tr(X) τ`.
    pub fn replacement(in_dims: &[usize], tau: &CMat, out_dims: &[usize]) -> Self {
        let d_in: usize = in_dims.iter().product();
        Self::from_choi_unchecked(in_dims.to_vec(), out_dims.to_vec(), linalg::kron(&linalg::identity(d_in), tau))
    }

    /// Completely depolarizing channel `X ↦ Tr(X) I/d`.
    pub fn depolarizing(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Self::replacement(dims, &(linalg::identity(d) / linalg::r(d as f64)), dims)
    }

    pub fn unitary(u: &CMat, dims: &[usize]) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u), dims.to_vec(), dims.to_vec())
    }

    /// Random channel with `kraus_count` Kraus operators from a Haar isometry,
    /// raised to `⌈d_in/d_out⌉` when fewer cannot form an isometry.
    pub fn random(in_dims: &[usize], out_dims: &[usize], kraus_count: usize, rng: &mut StreamRng) -> Self {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        let kraus_count = kraus_count.max(d_in.div_ceil(d_out));
        let v = random_isometry(d_out * kraus_count, d_in, rng);
        let kraus: Vec<CMat> = (0..kraus_count)
            .map(|k| CMat::from_fn(d_out, d_in, |o, i| v[(o * kraus_count + k, i)]))
            .collect();
        Self::from_kraus(&kraus, in_dims.to_vec(), out_dims.to_vec()).expect("isometry yields a channel")
    }

    pub fn from_kraus(kraus: &[CMat], in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        let mut completeness = CMat::zeros(d_in, d_in);
        let mut choi = CMat::zeros(d_in * d_out, d_in * d_out);
        for k in kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            completeness += k.adjoint() * k;
            let v = CVec::from_fn(d_in * d_out, |r, _| k[(r % d_out, r / d_out)]);
            choi += linalg::outer(&v, &v);
        }
        let dev = (completeness - linalg::identity(d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self::from_choi_unchecked(in_dims, out_dims, choi))
    }

    /// Kraus operators from the eigendecomposition of the Choi matrix; the
    /// count equals the numerical rank.
    pub fn kraus(&self) -> Vec<CMat> {
        let (d_in, d_out) = (self.d_in(), self.d_out());
        let (vals, vecs) = linalg::eigh(&self.choi);
        let lmax = vals.first().copied().unwrap_or(0.0);
        vals.iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-12 * lmax.max(1.0))
            .map(|(k, &v)| {
                let s = v.sqrt();
                CMat::from_fn(d_out, d_in, |o, i| vecs[(i * d_out + o, k)] * s)
            })
            .collect()
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn d_in(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn d_out(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn tp_defect(&self) -> f64 {
        tp_defect(&self.choi, self.d_in(), self.d_out())
    }

    /// Action on an operator of the input space.
    pub fn apply_matrix(&self, x: &CMat) -> CMat {
        linalg::apply_choi(&self.choi, self.d_in(), self.d_out(), x, 1)
    }

    /// Action on the system at position `target` of an operator on `dims`;
    /// the output system replaces the input in place.
    pub fn apply_operator(&self, x: &CMat, dims: &[usize], target: usize) -> CMat {
        let n = dims.len();
        let mut perm: Vec<usize> = (0..n).filter(|&k| k != target).collect();
        perm.push(target);
        let moved = linalg::permute_systems(x, dims, &perm);
        let d_rest = x.nrows() / dims[target];
        let y = linalg::apply_choi(&self.choi, self.d_in(), self.d_out(), &moved, d_rest);
        let mut new_dims: Vec<usize> = perm[..n - 1].iter().map(|&k| dims[k]).collect();
        new_dims.push(self.d_out());
        // move the output (currently last) back to position `target`
        let mut back: Vec<usize> = (0..n - 1).collect();
        back.insert(target, n - 1);
        linalg::permute_systems(&y, &new_dims, &back)
    }

    /// `(id ⊗ N)(s)` with the output keeping the target labels.
    pub fn apply(&self, s: &MultipartiteState, target: &[&str]) -> Result<MultipartiteState> {
        if self.out_dims.len() != target.len() {
            return Err(Error::DimensionMismatch(
                "output has a different number of systems than the target; use apply_relabel".into(),
            ));
        }
        self.apply_relabel(s, target, target)
    }

    /// `(id ⊗ N)(s)` where the outputs are named `out_labels` and placed at the
    /// position of the first target system.
    pub fn apply_relabel(&self, s: &MultipartiteState, target: &[&str], out_labels: &[&str]) -> Result<MultipartiteState> {
        if out_labels.len() != self.out_dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} output labels for {} output systems",
                out_labels.len(),
                self.out_dims.len()
            )));
        }
        let tidx = s.indices_of(target)?;
        let tdims: Vec<usize> = tidx.iter().map(|&i| s.dims()[i]).collect();
        if tdims != self.in_dims {
            return Err(Error::DimensionMismatch(format!(
                "target dims {:?} differ from channel input {:?}",
                tdims, self.in_dims
            )));
        }
        let rest: Vec<usize> = (0..s.dims().len()).filter(|i| !tidx.contains(i)).collect();
        for l in out_labels {
            if rest.iter().any(|&i| s.labels()[i] == *l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
        }
        let mut perm = rest.clone();
        perm.extend(&tidx);
        let moved = linalg::permute_systems(s.matrix(), s.dims(), &perm);
        let d_rest: usize = rest.iter().map(|&i| s.dims()[i]).product();
        let y = linalg::apply_choi(&self.choi, self.d_in(), self.d_out(), &moved, d_rest);
        let first = *tidx.iter().min().unwrap();
        let insert_at = rest.iter().filter(|&&i| i < first).count();
        let mut dims: Vec<usize> = rest.iter().map(|&i| s.dims()[i]).collect();
        let mut labels: Vec<String> = rest.iter().map(|&i| s.labels()[i].clone()).collect();
        let n_rest = dims.len();
        dims.extend(&self.out_dims);
        labels.extend(out_labels.iter().map(|l| l.to_string()));
        let n_out = self.out_dims.len();
        let mut order: Vec<usize> = (0..insert_at).collect();
        order.extend(n_rest..n_rest + n_out);
        order.extend(insert_at..n_rest);
        let m = linalg::permute_systems(&y, &dims, &order);
        let mut m = linalg::hermitian_part(&m);
        let tr = m.trace().re;
        m.scale_mut(1.0 / tr);
        Ok(MultipartiteState::from_parts_unchecked(
            order.iter().map(|&k| dims[k]).collect(),
            order.iter().map(|&k| labels[k].clone()).collect(),
            m,
        ))
    }

    /// `second ∘ self`.
    pub fn then(&self, second: &QuantumChannel) -> Result<QuantumChannel> {
        if self.d_out() != second.d_in() {
            return Err(Error::DimensionMismatch("composition dimensions differ".into()));
        }
        let j = linalg::apply_choi(&second.choi, second.d_in(), second.d_out(), &self.choi, self.d_in());
        Ok(Self::from_choi_unchecked(self.in_dims.clone(), second.out_dims.clone(), j))
    }

    /// `self ⊗ other` acting on `in_self ⊗ in_other`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let (a_in, a_out, b_in, b_out) = (self.d_in(), self.d_out(), other.d_in(), other.d_out());
        let k = linalg::kron(&self.choi, &other.choi);
        // kron order is (a_in a_out b_in b_out); reorder to (a_in b_in a_out b_out)
        let j = linalg::permute_systems(&k, &[a_in, a_out, b_in, b_out], &[0, 2, 1, 3]);
        let mut in_dims = self.in_dims.clone();
        in_dims.extend(&other.in_dims);
        let mut out_dims = self.out_dims.clone();
        out_dims.extend(&other.out_dims);
        Self::from_choi_unchecked(in_dims, out_dims, j)
    }

    /// Whether the partial transpose of the Choi matrix is PSD within `tol`.
    pub fn choi_is_ppt(&self, tol: f64) -> bool {
        let pt = linalg::partial_transpose(&self.choi, &[self.d_in(), self.d_out()], &[1]);
        linalg::min_eigenvalue(&pt) >= -tol
    }
}

/// A POVM on a single system.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMat>,
}

impl Povm {
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let d = effects.first().map(|e| e.nrows()).ok_or_else(|| Error::InvalidParameter("POVM needs at least one effect".into()))?;
        let mut sum = CMat::zeros(d, d);
        let mut out = Vec::with_capacity(effects.len());
        for e in effects {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch("POVM effects must share one square shape".into()));
            }
            let (dev, row, col) = linalg::hermiticity_defect(&e);
            if dev > POVM_PSD_TOL {
                return Err(Error::NotHermitian { deviation: dev, row, col });
            }
            let h = linalg::hermitian_part(&e);
            let min = linalg::min_eigenvalue(&h);
            if min < -POVM_PSD_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min, tolerance: POVM_PSD_TOL });
            }
            sum += &h;
            out.push(h);
        }
        let dev = (sum - linalg::identity(d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > POVM_SUM_TOL {
            return Err(Error::IncompletePovm(dev));
        }
        Ok(Self { effects: out })
    }

    /// Rank-one projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        Self::new((0..u.ncols()).map(|k| linalg::outer(&u.column(k).into_owned(), &u.column(k).into_owned())).collect())
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis(&linalg::identity(d)).expect("computational basis")
    }

    pub fn trivial(d: usize) -> Self {
        Self { effects: vec![linalg::identity(d)] }
    }

    /// Normalizes arbitrary PSD operators `A_x` to `S^{-1/2} A_x S^{-1/2}` with `S = Σ A_x`.
    pub fn from_unnormalized(ops: &[CMat]) -> Result<Self> {
        let d = ops[0].nrows();
        let mut s = CMat::zeros(d, d);
        for a in ops {
            s += a;
        }
        let inv = linalg::psd_pow(&s, -0.5, 1e-14);
        Self::new(ops.iter().map(|a| linalg::hermitian_part(&(&inv * a * &inv))).collect())
    }

    /// Normalized Wishart effects of the given rank, raised to `⌈d/outcomes⌉`
    /// when needed for the effects to span the space.
    pub fn random(d: usize, outcomes: usize, rank: usize, rng: &mut StreamRng) -> Self {
        let rank = rank.max(d.div_ceil(outcomes.max(1)));
        let ops: Vec<CMat> = (0..outcomes)
            .map(|_| {
                let g = rng.ginibre(d, rank);
                &g * g.adjoint()
            })
            .collect();
        Self::from_unnormalized(&ops).expect("random POVM")
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    /// `Tr(Λ_x ω)` for each outcome.
    pub fn probabilities(&self, omega: &CMat) -> Vec<f64> {
        self.effects.iter().map(|e| linalg::re_trace_prod(e, omega)).collect()
    }
}

/// An isometry `V` with `V†V = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMat,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl Isometry {
    pub fn new(matrix: CMat, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        if matrix.nrows() != d_out || matrix.ncols() != d_in || d_in > d_out {
            return Err(Error::DimensionMismatch(format!(
                "isometry is {}x{}, expected {d_out}x{d_in} with columns <= rows",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = (matrix.adjoint() * &matrix - linalg::identity(d_in)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > ISOMETRY_TOL {
            return Err(Error::NotIsometry(dev));
        }
        Ok(Self { matrix, in_dims, out_dims })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn channel(&self) -> QuantumChannel {
        QuantumChannel::from_kraus(std::slice::from_ref(&self.matrix), self.in_dims.clone(), self.out_dims.clone())
            .expect("isometries are trace preserving")
    }

    /// Canonical embedding of dimension `d_in` into `d_out` (first basis vectors).
    pub fn embedding(d_in: usize, d_out: usize) -> Result<Self> {
        let m = CMat::from_fn(d_out, d_in, |i, j| if i == j { ONE } else { ZERO });
        Self::new(m, vec![d_in], vec![d_out])
    }
}

#[cfg(test)]
mod tests;
