use super::{Isometry, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ONE};
use crate::qcore::state::to_labels;
use crate::qcore::{maximally_entangled, MultipartiteState};

/// Relative eigenvalue cutoff for the pseudo-inverse of `ρ_C`.
pub const PETZ_CUTOFF: f64 = 1e-10;

/// The Petz map `σ_C ↦ ρ_AC^{1/2} ρ_C^{-1/2} σ_C ρ_C^{-1/2} ρ_AC^{1/2}` as a
/// channel from `c` to `a ⊗ c`.
///
/// On the kernel of `ρ_C` the map is completed to be trace preserving by a
/// branch `σ ↦ Tr[(I - Π_C)σ] ρ_AC`.
pub fn petz_recovery(rho: &MultipartiteState, a: &[&str], c: &[&str]) -> Result<QuantumChannel> {
    let (m, gd) = rho.grouped_matrix(&[a, c])?;
    let (da, dc) = (gd[0], gd[1]);
    let rho_c = linalg::ptrace(&m, &[da, dc], &[1]);
    let inv_sqrt = linalg::psd_pow(&rho_c, -0.5, PETZ_CUTOFF);
    let proj = linalg::support_projector(&rho_c, PETZ_CUTOFF);
    let sqrt_ac = linalg::psd_sqrt(&m);
    let left = &sqrt_ac * linalg::kron(&linalg::identity(da), &inv_sqrt);
    let right = left.adjoint();
    let kernel = linalg::identity(dc) - &proj;
    let d_out = da * dc;
    let mut choi = CMat::zeros(dc * d_out, dc * d_out);
    for i in 0..dc {
        for j in 0..dc {
            let mut e = CMat::zeros(dc, dc);
            e[(i, j)] = ONE;
            let mut out = &left * linalg::kron(&linalg::identity(da), &e) * &right;
            // Tr[(I - Π) E_ij] = (I - Π)[j, i]
            out += &m * kernel[(j, i)];
            choi.view_mut((i * d_out, j * d_out), (d_out, d_out)).copy_from(&out);
        }
    }
    let a_dims: Vec<usize> = a.iter().map(|l| rho.dims()[rho.index_of(l).unwrap()]).collect();
    let c_dims: Vec<usize> = c.iter().map(|l| rho.dims()[rho.index_of(l).unwrap()]).collect();
    let mut out_dims = a_dims;
    out_dims.extend(&c_dims);
    QuantumChannel::from_choi_projected(c_dims, out_dims, &choi)
}

/// `ω ↦ V†ωV + Tr[(I - VV†)ω] τ`, a left inverse of conjugation by `V`.
pub fn isometry_inverse_channel(v: &Isometry, tau: &MultipartiteState) -> Result<QuantumChannel> {
    let d_in: usize = v.in_dims().iter().product();
    let d_out: usize = v.out_dims().iter().product();
    if tau.dim() != d_in {
        return Err(Error::DimensionMismatch(format!("τ has dimension {} but V has input {d_in}", tau.dim())));
    }
    let vm = v.matrix();
    let kernel = linalg::identity(d_out) - vm * vm.adjoint();
    let mut choi = CMat::zeros(d_out * d_in, d_out * d_in);
    for i in 0..d_out {
        for j in 0..d_out {
            // V† E_ij V = |row_i(V)†⟩⟨row_j(V)†|
            let mut blk = CMat::from_fn(d_in, d_in, |p, q| vm[(i, p)].conj() * vm[(j, q)]);
            blk += tau.matrix() * kernel[(j, i)];
            choi.view_mut((i * d_in, j * d_in), (d_in, d_in)).copy_from(&blk);
        }
    }
    QuantumChannel::new(v.out_dims().to_vec(), v.in_dims().to_vec(), choi)
}

/// `ω ↦ Σ_x Tr(Λ_x ω) |x⟩⟨x|`.
pub fn measurement_channel(p: &Povm) -> QuantumChannel {
    let d = p.dim();
    let nx = p.len();
    let mut choi = CMat::zeros(d * nx, d * nx);
    for (x, e) in p.effects().iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                choi[(i * nx + x, j * nx + x)] = e[(j, i)];
            }
        }
    }
    QuantumChannel::from_choi_unchecked(vec![d], vec![nx], choi)
}

/// Isometric extension of a measurement built from the rank-one refinement
/// `Λ_x = Σ_y |φ_xy⟩⟨φ_xy|`.
#[derive(Debug, Clone)]
pub struct MeasurementDilation {
    /// `U: A → X ⊗ E`, `U|ψ⟩ = Σ_xy |x⟩|k(x,y)⟩⟨φ_xy|ψ⟩`.
    pub isometry: Isometry,
    /// `(x, y)` for each index `k` of the E register.
    pub pairs: Vec<(usize, usize)>,
    /// The refinement vectors `φ_xy` (unnormalized), in E order.
    pub vectors: Vec<CVec>,
}

pub fn measurement_isometry(p: &Povm) -> MeasurementDilation {
    let d = p.dim();
    let nx = p.len();
    let mut pairs = Vec::new();
    let mut vectors = Vec::new();
    for (x, e) in p.effects().iter().enumerate() {
        let (vals, vecs) = linalg::eigh(e);
        for (y, &lam) in vals.iter().enumerate() {
            if lam > 1e-12 {
                pairs.push((x, y));
                vectors.push(vecs.column(y).into_owned() * linalg::r(lam.sqrt()));
            }
        }
    }
    let ne = pairs.len();
    let mut u = CMat::zeros(nx * ne, d);
    for (k, (&(x, _), phi)) in pairs.iter().zip(&vectors).enumerate() {
        for i in 0..d {
            u[(x * ne + k, i)] = phi[i].conj();
        }
    }
    // the refinement drops eigenvalues below 1e-12, so V†V = I only to that order
    let isometry = Isometry { matrix: u, in_dims: vec![d], out_dims: vec![nx, ne] };
    MeasurementDilation { isometry, pairs, vectors }
}

/// Measure-and-prepare channel with Choi `Σ_x Λ_xᵀ ⊗ σ_x`.
pub fn eb_channel(p: &Povm, preparations: &[CMat], out_dims: &[usize]) -> Result<QuantumChannel> {
    if preparations.len() != p.len() {
        return Err(Error::InvalidParameter(format!(
            "{} preparations for {} effects",
            preparations.len(),
            p.len()
        )));
    }
    let d_out: usize = out_dims.iter().product();
    let d = p.dim();
    let mut choi = CMat::zeros(d * d_out, d * d_out);
    for (e, s) in p.effects().iter().zip(preparations) {
        if s.nrows() != d_out {
            return Err(Error::DimensionMismatch("preparation dimension differs from output".into()));
        }
        choi += linalg::kron(&e.transpose(), s);
    }
    QuantumChannel::new(vec![d], out_dims.to_vec(), choi)
}

/// Complete dephasing in the orthonormal basis given by the columns of `basis`
/// (computational basis when `None`).
pub fn dephasing_channel(dim: usize, basis: Option<&CMat>) -> Result<QuantumChannel> {
    let b = basis.cloned().unwrap_or_else(|| linalg::identity(dim));
    if b.nrows() != dim || b.ncols() != dim {
        return Err(Error::DimensionMismatch("basis must be a square matrix of the system dimension".into()));
    }
    let dev = (b.adjoint() * &b - linalg::identity(dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-9 {
        return Err(Error::InvalidParameter(format!("basis is not orthonormal (deviation {dev:.3e})")));
    }
    let p = Povm::from_basis(&b)?;
    let preps: Vec<CMat> = p.effects().to_vec();
    eb_channel(&p, &preps, &[dim])
}

/// `γ = U (Φ_AB ⊗ σ_A'B') U†` with `U = Σ_i |i⟩⟨i|_A ⊗ I_B ⊗ V^i`.
///
/// Labels are `labels = [A, B, A', B']`.
pub fn private_state(
    d: usize,
    shield_dims: [usize; 2],
    twisting: &[CMat],
    sigma_shield: &MultipartiteState,
    labels: [&str; 4],
) -> Result<MultipartiteState> {
    let ds = shield_dims[0] * shield_dims[1];
    if twisting.len() != d {
        return Err(Error::InvalidParameter(format!("{} twisting unitaries for key dimension {d}", twisting.len())));
    }
    if sigma_shield.dim() != ds {
        return Err(Error::DimensionMismatch("shield state dimension".into()));
    }
    for v in twisting {
        if v.nrows() != ds || v.ncols() != ds {
            return Err(Error::DimensionMismatch("twisting unitary must act on the shield".into()));
        }
        let dev = (v.adjoint() * v - linalg::identity(ds)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-9 {
            return Err(Error::NotIsometry(dev));
        }
    }
    let phi = maximally_entangled(d, [labels[0], labels[1]])?;
    let base = linalg::kron(phi.matrix(), sigma_shield.matrix());
    let n = d * d * ds;
    let mut u = CMat::zeros(n, n);
    for (i, v) in twisting.iter().enumerate() {
        let mut pi = CMat::zeros(d, d);
        pi[(i, i)] = ONE;
        u += linalg::kron(&linalg::kron(&pi, &linalg::identity(d)), v);
    }
    let m = &u * base * u.adjoint();
    MultipartiteState::new(vec![d, d, shield_dims[0], shield_dims[1]], to_labels(&labels), linalg::hermitian_part(&m))
}

/// Stinespring isometry `in → out ⊗ E` with `E` of dimension rank(J).
pub fn stinespring(ch: &QuantumChannel) -> Isometry {
    let kraus = ch.kraus();
    let ne = kraus.len();
    let (d_in, d_out) = (ch.d_in(), ch.d_out());
    let mut u = CMat::zeros(d_out * ne, d_in);
    for (k, kr) in kraus.iter().enumerate() {
        for o in 0..d_out {
            for i in 0..d_in {
                u[(o * ne + k, i)] = kr[(o, i)];
            }
        }
    }
    let mut out_dims = ch.out_dims().to_vec();
    out_dims.push(ne);
    Isometry { matrix: u, in_dims: ch.in_dims().to_vec(), out_dims }
}
