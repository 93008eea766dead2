use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64, ONE};
use crate::qcore::pure_state::PureStateVector;

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-6;
/// Eigenvalues below this are dropped when purifying.
pub const RANK_CUTOFF: f64 = 1e-12;

/// A density matrix on a labelled tensor product of finite-dimensional systems.
///
/// The first label is the most significant index of the row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteState {
    dims: Vec<usize>,
    labels: Vec<String>,
    matrix: CMat,
}

pub(crate) fn check_layout(dims: &[usize], labels: &[String], side: usize) -> Result<()> {
    if dims.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} dimensions for {} labels",
            dims.len(),
            labels.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidParameter("subsystem dimensions must be positive".into()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    let n: usize = dims.iter().product();
    if n != side {
        return Err(Error::DimensionMismatch(format!("matrix side {side} but product of dims is {n}")));
    }
    Ok(())
}

pub fn to_labels(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

impl MultipartiteState {
    /// Validates and normalizes a density matrix.
    ///
    /// The Hermitian part is kept when the asymmetry is at most 1e-9 and the
    /// trace is rescaled to one when it is within 1e-6 (round-off deviations
    /// are kept); anything worse is rejected.
    pub fn new(dims: Vec<usize>, labels: Vec<String>, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        check_layout(&dims, &labels, matrix.nrows())?;
        let (dev, row, col) = linalg::hermiticity_defect(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev, row, col });
        }
        let mut m = linalg::hermitian_part(&matrix);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: tr });
        }
        // leave round-off alone so stored states reload bit for bit
        if (tr - 1.0).abs() > 8.0 * f64::EPSILON * m.nrows() as f64 {
            m.scale_mut(1.0 / tr);
        }
        let min = linalg::min_eigenvalue(&m);
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min, tolerance: PSD_TOL });
        }
        Ok(Self { dims, labels, matrix: m })
    }

    pub fn from_strs(dims: &[usize], labels: &[&str], matrix: CMat) -> Result<Self> {
        Self::new(dims.to_vec(), to_labels(labels), matrix)
    }

    /// Builds a state from any nonzero PSD operator by dividing out its trace.
    pub fn from_unnormalized(dims: Vec<usize>, labels: Vec<String>, matrix: CMat) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::BadTrace { trace: tr });
        }
        Self::new(dims, labels, matrix / linalg::r(tr))
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, labels: Vec<String>, matrix: CMat) -> Self {
        Self { dims, labels, matrix }
    }

    pub fn from_pure(v: &PureStateVector) -> Self {
        let a = v.amplitudes();
        Self {
            dims: v.dims().to_vec(),
            labels: v.labels().to_vec(),
            matrix: a * a.adjoint(),
        }
    }

    pub fn maximally_mixed(dims: &[usize], labels: &[&str]) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::from_strs(dims, labels, linalg::identity(n) / linalg::r(n as f64))
    }

    /// `|k⟩⟨k|` in the computational basis of the joint system.
    pub fn basis_state(dims: &[usize], labels: &[&str], k: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if k >= n {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range {n}")));
        }
        let mut m = CMat::zeros(n, n);
        m[(k, k)] = ONE;
        Self::from_strs(dims, labels, m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn indices_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }

    /// Joint dimension of a group of labels.
    pub fn dim_of(&self, labels: &[&str]) -> Result<usize> {
        Ok(self.indices_of(labels)?.iter().map(|&i| self.dims[i]).product())
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn tensor(&self, other: &MultipartiteState) -> Result<Self> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        let mut dims = self.dims.clone();
        dims.extend(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut m = linalg::kron(&self.matrix, &other.matrix);
        let tr = m.trace().re;
        m.scale_mut(1.0 / tr);
        Ok(Self { dims, labels, matrix: m })
    }

    /// Reduced state on `keep`; the kept systems retain their relative order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidParameter("partial trace must keep at least one system".into()));
        }
        let mut idx = self.indices_of(keep)?;
        idx.sort_unstable();
        idx.dedup();
        let m = linalg::ptrace(&self.matrix, &self.dims, &idx);
        Ok(Self {
            dims: idx.iter().map(|&i| self.dims[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            matrix: m,
        })
    }

    /// Partial trace over the listed systems.
    pub fn trace_out(&self, remove: &[&str]) -> Result<Self> {
        let rm = self.indices_of(remove)?;
        let keep: Vec<&str> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !rm.contains(i))
            .map(|(_, l)| l.as_str())
            .collect();
        self.partial_trace(&keep)
    }

    pub fn permute(&self, new_order: &[&str]) -> Result<Self> {
        if new_order.len() != self.labels.len() {
            return Err(Error::NotPermutation(to_labels(new_order)));
        }
        let perm = match self.indices_of(new_order) {
            Ok(p) => p,
            Err(_) => return Err(Error::NotPermutation(to_labels(new_order))),
        };
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != perm.len() {
            return Err(Error::NotPermutation(to_labels(new_order)));
        }
        Ok(Self {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            matrix: linalg::permute_systems(&self.matrix, &self.dims, &perm),
        })
    }

    /// Renames systems; `mapping` pairs old and new labels.
    pub fn relabel(&self, mapping: &[(&str, &str)]) -> Result<Self> {
        let mut labels = self.labels.clone();
        for (old, new) in mapping {
            let i = self.index_of(old)?;
            labels[i] = new.to_string();
        }
        check_layout(&self.dims, &labels, self.dim())?;
        Ok(Self { dims: self.dims.clone(), labels, matrix: self.matrix.clone() })
    }

    /// Merges the matrix ordering into `groups` (each a list of labels) and
    /// returns the matrix together with the group dimensions.
    pub fn grouped_matrix(&self, groups: &[&[&str]]) -> Result<(CMat, Vec<usize>)> {
        let order: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
        let kept = self.partial_trace(&order)?;
        let p = kept.permute(&order)?;
        let gdims = groups
            .iter()
            .map(|g| g.iter().map(|l| self.dims[self.index_of(l).unwrap()]).product())
            .collect();
        Ok((p.matrix, gdims))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::re_trace_prod(&self.matrix, &self.matrix)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.purity() >= 1.0 - tol
    }

    /// Purification on `labels ∪ {ref_label}` with reference dimension equal to
    /// the rank (eigenvalue cutoff 1e-12).
    pub fn purify(&self, ref_label: &str) -> Result<PureStateVector> {
        if self.has_label(ref_label) {
            return Err(Error::LabelCollision(ref_label.to_string()));
        }
        let (vals, vecs) = linalg::eigh(&self.matrix);
        let rank = vals.iter().filter(|&&v| v > RANK_CUTOFF).count().max(1);
        let n = self.dim();
        let mut amp = CVec::zeros(n * rank);
        for k in 0..rank {
            let w = vals[k].max(0.0).sqrt();
            for i in 0..n {
                amp[i * rank + k] = vecs[(i, k)] * w;
            }
        }
        let mut dims = self.dims.clone();
        dims.push(rank);
        let mut labels = self.labels.clone();
        labels.push(ref_label.to_string());
        PureStateVector::normalized(dims, labels, amp)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entrywise difference between two states with identical layout.
    pub fn max_abs_diff(&self, other: &MultipartiteState) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `|Φ⟩ = d^{-1/2} Σ_i |i⟩|i⟩` on two systems of dimension `d`.
pub fn maximally_entangled(d: usize, labels: [&str; 2]) -> Result<MultipartiteState> {
    let mut v = CVec::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = linalg::r(a);
    }
    let p = PureStateVector::new(vec![d, d], to_labels(&labels), v)?;
    Ok(MultipartiteState::from_pure(&p))
}

/// `d^{-1} Σ_x |x⟩⟨x| ⊗ |x⟩⟨x|`, the classically correlated analogue of `Φ`.
pub fn classical_copy(d: usize, labels: [&str; 2]) -> Result<MultipartiteState> {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        m[(i * d + i, i * d + i)] = linalg::r(1.0 / d as f64);
    }
    MultipartiteState::from_strs(&[d, d], &labels, m)
}

/// GHZ state on `labels.len()` qubits.
pub fn ghz(labels: &[&str]) -> Result<MultipartiteState> {
    let k = labels.len();
    let n = 1usize << k;
    let mut v = CVec::zeros(n);
    v[0] = linalg::r(std::f64::consts::FRAC_1_SQRT_2);
    v[n - 1] = linalg::r(std::f64::consts::FRAC_1_SQRT_2);
    let p = PureStateVector::new(vec![2; k], to_labels(labels), v)?;
    Ok(MultipartiteState::from_pure(&p))
}

/// Single-system state from a matrix.
pub fn single(label: &str, m: CMat) -> Result<MultipartiteState> {
    let d = m.nrows();
    MultipartiteState::new(vec![d], vec![label.to_string()], m)
}
