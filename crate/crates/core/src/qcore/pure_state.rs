use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::qcore::state::{check_layout, to_labels, MultipartiteState};

pub const NORM_TOL: f64 = 1e-10;

/// A unit vector on a labelled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    dims: Vec<usize>,
    labels: Vec<String>,
    amplitudes: CVec,
}

/// Schmidt decomposition across a cut.
///
/// `coefficients` are the squared Schmidt coefficients (they sum to one).
/// Column `i` of `left` lives on the cut systems, column `i` of `right` on the
/// complement, both in the original relative order.
#[derive(Debug, Clone)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub left: CMat,
    pub right: CMat,
    pub left_labels: Vec<String>,
    pub right_labels: Vec<String>,
}

impl PureStateVector {
    pub fn new(dims: Vec<usize>, labels: Vec<String>, amplitudes: CVec) -> Result<Self> {
        check_layout(&dims, &labels, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::BadNorm { norm });
        }
        Ok(Self { dims, labels, amplitudes })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, labels: Vec<String>, amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::BadNorm { norm });
        }
        Self::new(dims, labels, amplitudes / linalg::r(norm))
    }

    pub fn from_strs(dims: &[usize], labels: &[&str], amplitudes: CVec) -> Result<Self> {
        Self::new(dims.to_vec(), to_labels(labels), amplitudes)
    }

    /// Pure state whose density matrix is `rho`; fails unless `Tr ρ² ≥ 1 - 1e-9`.
    pub fn from_density(rho: &MultipartiteState) -> Result<Self> {
        let purity = rho.purity();
        if purity < 1.0 - 1e-9 {
            return Err(Error::NotPure { purity });
        }
        let (_, vecs) = linalg::eigh(rho.matrix());
        Self::normalized(rho.dims().to_vec(), rho.labels().to_vec(), vecs.column(0).into_owned())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn density(&self) -> MultipartiteState {
        MultipartiteState::from_pure(self)
    }

    pub fn tensor(&self, other: &PureStateVector) -> Result<Self> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        let a = CMat::from_column_slice(self.amplitudes.len(), 1, self.amplitudes.as_slice());
        let b = CMat::from_column_slice(other.amplitudes.len(), 1, other.amplitudes.as_slice());
        let k = linalg::kron(&a, &b);
        let mut dims = self.dims.clone();
        dims.extend(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self::normalized(dims, labels, k.column(0).into_owned())
    }

    pub fn permute(&self, new_order: &[&str]) -> Result<Self> {
        let perm: Vec<usize> = new_order
            .iter()
            .map(|l| self.labels.iter().position(|x| x == l))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::NotPermutation(to_labels(new_order)))?;
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.labels.len() || perm.len() != self.labels.len() {
            return Err(Error::NotPermutation(to_labels(new_order)));
        }
        Ok(Self {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            amplitudes: linalg::permute_vector(&self.amplitudes, &self.dims, &perm),
        })
    }

    /// Amplitudes reshaped as a `dim(cut) x dim(rest)` matrix.
    fn bipartite_matrix(&self, cut: &[&str]) -> Result<(CMat, Vec<usize>, Vec<usize>)> {
        let mut cut_idx = Vec::new();
        for l in cut {
            let i = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if !cut_idx.contains(&i) {
                cut_idx.push(i);
            }
        }
        cut_idx.sort_unstable();
        let rest: Vec<usize> = (0..self.dims.len()).filter(|i| !cut_idx.contains(i)).collect();
        if cut_idx.is_empty() || rest.is_empty() {
            return Err(Error::InvalidParameter("Schmidt cut must be a nontrivial bipartition".into()));
        }
        let mut perm = cut_idx.clone();
        perm.extend(&rest);
        let v = linalg::permute_vector(&self.amplitudes, &self.dims, &perm);
        let dl: usize = cut_idx.iter().map(|&i| self.dims[i]).product();
        let dr: usize = rest.iter().map(|&i| self.dims[i]).product();
        let m = CMat::from_fn(dl, dr, |i, j| v[i * dr + j]);
        Ok((m, cut_idx, rest))
    }

    pub fn schmidt(&self, cut: &[&str]) -> Result<Schmidt> {
        let (m, cut_idx, rest) = self.bipartite_matrix(cut)?;
        let svd = m.svd(true, true);
        let u = svd.u.unwrap();
        let v_t = svd.v_t.unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
        let k = order.len();
        let mut left = CMat::zeros(u.nrows(), k);
        let mut right = CMat::zeros(v_t.ncols(), k);
        let mut coefficients = Vec::with_capacity(k);
        for (col, &o) in order.iter().enumerate() {
            let s = svd.singular_values[o];
            coefficients.push(s * s);
            left.set_column(col, &u.column(o));
            right.set_column(col, &v_t.row(o).transpose());
        }
        Ok(Schmidt {
            coefficients,
            left,
            right,
            left_labels: cut_idx.iter().map(|&i| self.labels[i].clone()).collect(),
            right_labels: rest.iter().map(|&i| self.labels[i].clone()).collect(),
        })
    }
}

impl Schmidt {
    /// `Σ √λ_i |l_i⟩|r_i⟩` in `left ⊗ right` ordering.
    pub fn reconstruct(&self) -> CVec {
        let dl = self.left.nrows();
        let dr = self.right.nrows();
        let mut v = CVec::zeros(dl * dr);
        for (k, &lam) in self.coefficients.iter().enumerate() {
            let s = linalg::r(lam.max(0.0).sqrt());
            for i in 0..dl {
                for j in 0..dr {
                    v[i * dr + j] += s * self.left[(i, k)] * self.right[(j, k)];
                }
            }
        }
        v
    }
}
