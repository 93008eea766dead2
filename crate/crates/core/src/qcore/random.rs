use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qcore::pure_state::PureStateVector;
use crate::qcore::state::{to_labels, MultipartiteState};
use crate::rng::StreamRng;

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure(dims: &[usize], labels: &[&str], rng: &mut StreamRng) -> Result<PureStateVector> {
    let n: usize = dims.iter().product();
    PureStateVector::normalized(dims.to_vec(), to_labels(labels), rng.gaussian_vector(n))
}

/// Hilbert-Schmidt-induced random state: the marginal of a Haar pure state on
/// the system and a `rank`-dimensional ancilla.
pub fn random_density(dims: &[usize], labels: &[&str], rank: usize, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let n: usize = dims.iter().product();
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={n}")));
    }
    let g = rng.ginibre(n, rank);
    let m = &g * g.adjoint();
    MultipartiteState::from_unnormalized(dims.to_vec(), to_labels(labels), m)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction.
pub fn random_unitary(n: usize, rng: &mut StreamRng) -> CMat {
    random_isometry(n, n, rng)
}

/// Random isometry `cols -> rows` (first columns of a Haar unitary).
pub fn random_isometry(rows: usize, cols: usize, rng: &mut StreamRng) -> CMat {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = rng.ginibre(rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for k in 0..cols {
        let d = rr[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..rows {
            q[(i, k)] *= ph;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_is_pure() {
        let mut rng = StreamRng::new(21, 0);
        let s = random_density(&[2, 2], &["A", "B"], 1, &mut rng).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-9);
        assert!(random_density(&[2], &["A"], 3, &mut rng).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = random_density(&[3], &["A"], 2, &mut StreamRng::new(5, 9)).unwrap();
        let b = random_density(&[3], &["A"], 2, &mut StreamRng::new(5, 9)).unwrap();
        let bits = |s: &MultipartiteState| s.matrix().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn empirical_mean_is_maximally_mixed() {
        let mut rng = StreamRng::new(77, 0);
        let mut acc = CMat::zeros(2, 2);
        let n = 10_000;
        for _ in 0..n {
            acc += random_density(&[2], &["A"], 2, &mut rng).unwrap().matrix();
        }
        acc /= linalg::r(n as f64);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 0.5 } else { 0.0 };
                assert!((acc[(i, j)] - linalg::r(e)).norm() < 0.02);
            }
        }
    }

    #[test]
    fn isometry_columns_orthonormal() {
        let mut rng = StreamRng::new(3, 3);
        let v = random_isometry(5, 3, &mut rng);
        assert!((v.adjoint() * &v - linalg::identity(3)).norm() < 1e-12);
    }
}
