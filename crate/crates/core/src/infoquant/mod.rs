//! Fidelities, distances, entropies and Rényi quantities. Logarithms are base 2.

mod quantity;

pub use quantity::{digest_matrices, ExtReal, Quantity, QuantityKind};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qcore::MultipartiteState;

pub const INPUT_PSD_TOL: f64 = 1e-9;
/// Eigenvalue cutoff (relative to the largest eigenvalue) for supports and
/// pseudo-inverse powers.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

fn check_psd(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("operator must be square".into()));
    }
    let (dev, row, col) = linalg::hermiticity_defect(m);
    if dev > INPUT_PSD_TOL {
        return Err(Error::NotHermitian { deviation: dev, row, col });
    }
    let min = linalg::min_eigenvalue(m);
    if min < -INPUT_PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min, tolerance: INPUT_PSD_TOL });
    }
    Ok(())
}

fn same_shape(p: &CMat, q: &CMat) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", p.shape(), q.shape())));
    }
    Ok(())
}

/// `‖√P √Q‖₁` without input validation.
pub(crate) fn root_fidelity_raw(p: &CMat, q: &CMat) -> f64 {
    let sp = linalg::psd_sqrt(p);
    let sq = linalg::psd_sqrt(q);
    linalg::trace_norm(&(sp * sq))
}

/// `‖√P √Q‖₁`.
pub fn root_fidelity(p: &CMat, q: &CMat) -> Result<f64> {
    same_shape(p, q)?;
    check_psd(p)?;
    check_psd(q)?;
    Ok(root_fidelity_raw(p, q))
}

/// `F(P, Q) = ‖√P √Q‖₁²`.
pub fn fidelity(p: &CMat, q: &CMat) -> Result<f64> {
    root_fidelity(p, q).map(|x| x * x)
}

/// Fidelity between two states on the same layout.
pub fn state_fidelity(a: &MultipartiteState, b: &MultipartiteState) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok(root_fidelity_raw(a.matrix(), b.matrix()).powi(2))
}

/// `‖ρ - σ‖₁`, in `[0, 2]` for states.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    same_shape(rho, sigma)?;
    Ok(linalg::eigvalsh(&(rho - sigma)).iter().map(|v| v.abs()).sum())
}

/// `√(1 - F)`.
pub fn purified_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok((1.0 - fidelity(rho, sigma)?.min(1.0)).max(0.0).sqrt())
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

pub fn von_neumann_entropy(rho: &CMat) -> f64 {
    -linalg::eigvalsh(rho).iter().map(|&v| xlog2x(v)).sum::<f64>()
}

/// `H` of the marginal on `labels` (zero for the empty set).
pub fn entropy_of(s: &MultipartiteState, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(von_neumann_entropy(s.partial_trace(labels)?.matrix()))
}

pub(crate) fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for l in *g {
            if seen.contains(l) {
                return Err(Error::InvalidParameter(format!("label `{l}` appears in more than one group")));
            }
            seen.push(l);
        }
    }
    Ok(())
}

fn union<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// `I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)`; `c` may be empty.
pub fn cqmi(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("A and B must be nonempty".into()));
    }
    Ok(entropy_of(s, &union(&[a, c]))? + entropy_of(s, &union(&[b, c]))?
        - entropy_of(s, c)?
        - entropy_of(s, &union(&[a, b, c]))?)
}

pub fn mutual_information(s: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<f64> {
    cqmi(s, a, b, &[])
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || (alpha - 1.0).abs() < f64::EPSILON || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("Rényi parameter {alpha} must lie in [0,1) ∪ (1,∞)")));
    }
    Ok(())
}

/// Whether `supp ρ ⊆ supp σ` up to the support cutoff.
fn support_contained(rho: &CMat, sigma: &CMat) -> bool {
    let n = sigma.nrows();
    let p = linalg::support_projector(sigma, SUPPORT_CUTOFF);
    let q = linalg::identity(n) - p;
    linalg::re_trace_prod(&q, rho) <= SUPPORT_CUTOFF * rho.trace().re.abs().max(1.0)
}

/// Petz–Rényi divergence `(1/(α-1)) log Tr ρ^α σ^{1-α}`.
pub fn renyi_relative_entropy(rho: &CMat, sigma: &CMat, alpha: f64) -> Result<ExtReal> {
    check_alpha(alpha)?;
    same_shape(rho, sigma)?;
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(ExtReal::PosInfinity);
    }
    let ra = if alpha == 0.0 {
        linalg::support_projector(rho, SUPPORT_CUTOFF)
    } else {
        linalg::psd_pow(rho, alpha, SUPPORT_CUTOFF)
    };
    let sb = linalg::psd_pow(sigma, 1.0 - alpha, SUPPORT_CUTOFF);
    let q = linalg::re_trace_prod(&ra, &sb);
    if q <= 0.0 {
        // disjoint supports with α < 1
        return Ok(ExtReal::PosInfinity);
    }
    Ok(ExtReal::Finite(q.log2() / (alpha - 1.0)))
}

/// Sandwiched divergence `(2α/(α-1)) log ‖σ^{(1-α)/2α} ρ^{1/2}‖_{2α}`.
pub fn sandwiched_renyi(rho: &CMat, sigma: &CMat, alpha: f64) -> Result<ExtReal> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidParameter("sandwiched divergence needs α > 0".into()));
    }
    same_shape(rho, sigma)?;
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(ExtReal::PosInfinity);
    }
    let x = linalg::psd_pow(sigma, (1.0 - alpha) / (2.0 * alpha), SUPPORT_CUTOFF) * linalg::psd_sqrt(rho);
    let q: f64 = linalg::singular_values(&x).iter().map(|s| s.powf(2.0 * alpha)).sum();
    if q <= 0.0 {
        return Ok(ExtReal::PosInfinity);
    }
    Ok(ExtReal::Finite(q.log2() / (alpha - 1.0)))
}

/// Umegaki relative entropy `Tr ρ (log ρ - log σ)`.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<ExtReal> {
    same_shape(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Ok(ExtReal::PosInfinity);
    }
    let log_support = |m: &CMat| {
        let (vals, vecs) = linalg::eigh(m);
        let lmax = vals.first().copied().unwrap_or(0.0);
        let f: Vec<f64> = vals.iter().map(|&v| if v > SUPPORT_CUTOFF * lmax && v > 0.0 { v.log2() } else { 0.0 }).collect();
        linalg::rebuild(&f, &vecs)
    };
    Ok(ExtReal::Finite(linalg::re_trace_prod(rho, &(log_support(rho) - log_support(sigma)))))
}

/// `H_α(A|B) = -D_α(ρ_AB ‖ I_A ⊗ ρ_B)`.
pub fn conditional_renyi_entropy(s: &MultipartiteState, a: &[&str], b: &[&str], alpha: f64) -> Result<ExtReal> {
    check_disjoint(&[a, b])?;
    let (m, gd) = s.grouped_matrix(&[a, b])?;
    let rho_b = linalg::ptrace(&m, &gd, &[1]);
    let sigma = linalg::kron(&linalg::identity(gd[0]), &rho_b);
    Ok(renyi_relative_entropy(&m, &sigma, alpha)?.neg())
}

/// Rényi conditional mutual information together with a flag recording
/// whether any marginal was rank deficient, so that pseudo-inverse powers were
/// used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiCqmi {
    pub value: f64,
    pub pseudo_inverse_used: bool,
}

/// `Ĩ_α(A;B|C) = (1/(α-1)) log ‖ρ_ABC^{1/2} ρ_AC^{(1-α)/2α} ρ_C^{(α-1)/2α} ρ_BC^{(1-α)/2α}‖_{2α}^{2α}`.
pub fn renyi_cqmi(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str], alpha: f64) -> Result<RenyiCqmi> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidParameter("Rényi CQMI needs α > 0".into()));
    }
    check_disjoint(&[a, b, c])?;
    let (m, gd) = if c.is_empty() {
        let (m, g) = s.grouped_matrix(&[a, b])?;
        (m, vec![g[0], g[1], 1])
    } else {
        s.grouped_matrix(&[a, b, c])?
    };
    let (da, db, dc) = (gd[0], gd[1], gd[2]);
    let dims = [da, db, dc];
    let rho_ac = linalg::ptrace(&m, &dims, &[0, 2]);
    let rho_bc = linalg::ptrace(&m, &dims, &[1, 2]);
    let rho_c = linalg::ptrace(&m, &dims, &[2]);
    let deficient = |x: &CMat| {
        let v = linalg::eigvalsh(x);
        v.last().copied().unwrap_or(0.0) <= SUPPORT_CUTOFF * v[0]
    };
    let pseudo_inverse_used = deficient(&rho_ac) || deficient(&rho_bc) || deficient(&rho_c);
    let p = (1.0 - alpha) / (2.0 * alpha);
    let ac = linalg::psd_pow(&rho_ac, p, SUPPORT_CUTOFF);
    // A C ⊗ B → A B C
    let ac_full = linalg::permute_systems(&linalg::kron(&ac, &linalg::identity(db)), &[da, dc, db], &[0, 2, 1]);
    let c_full = linalg::kron(&linalg::identity(da * db), &linalg::psd_pow(&rho_c, -p, SUPPORT_CUTOFF));
    let bc_full = linalg::kron(&linalg::identity(da), &linalg::psd_pow(&rho_bc, p, SUPPORT_CUTOFF));
    let x = linalg::psd_sqrt(&m) * ac_full * c_full * bc_full;
    let q: f64 = linalg::singular_values(&x).iter().map(|s| s.powf(2.0 * alpha)).sum();
    Ok(RenyiCqmi { value: q.log2() / (alpha - 1.0), pseudo_inverse_used })
}

/// `h₂(ε) = -ε log ε - (1-ε) log(1-ε)`.
pub fn binary_entropy(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("binary entropy argument {eps} outside [0,1]")));
    }
    Ok(-xlog2x(eps) - xlog2x(1.0 - eps))
}
