//! Fidelity of recovery `F(A;B|C) = sup_R F(ρ_ABC, R_{C→AC}(ρ_BC))`, its
//! surprisal, the product-conditioning quantity `F(A;B)` and the multipartite
//! generalization.

mod multipartite;

#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

pub use multipartite::{multipartite_for, MultipartiteOptions};

use crate::channels::{petz_recovery, QuantumChannel};
use crate::error::{Error, Result};
use crate::infoquant::{check_disjoint, root_fidelity_raw};
use crate::linalg::{self, CMat};
use crate::qcore::state::to_labels;
use crate::qcore::MultipartiteState;
use crate::sdp::{self, AffineHerm, FidelityProgram, SdpSolution, SolverOptions, SuperOp};

/// Relative-improvement threshold for the see-saw backend.
pub const SEESAW_TOL: f64 = 1e-7;
pub const SEESAW_MAX_ITER: usize = 500;
/// Residual and gap threshold for labeling a convex result exact.
pub const EXACT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Petz,
    Seesaw,
    Convex,
}

impl Backend {
    pub fn tag(&self) -> &'static str {
        match self {
            Backend::Petz => "petz",
            Backend::Seesaw => "seesaw",
            Backend::Convex => "convex",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "petz" => Ok(Backend::Petz),
            "seesaw" => Ok(Backend::Seesaw),
            "convex" => Ok(Backend::Convex),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    ExactWithinTol,
    LowerBound,
    UpperBound,
}

impl BoundKind {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundKind::ExactWithinTol => "exact-within-tol",
            BoundKind::LowerBound => "lower-bound",
            BoundKind::UpperBound => "upper-bound",
        }
    }

    /// Direction after a decreasing transformation such as `-log`.
    pub fn flipped(self) -> Self {
        match self {
            BoundKind::LowerBound => BoundKind::UpperBound,
            BoundKind::UpperBound => BoundKind::LowerBound,
            b => b,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Certificate {
    Channel(QuantumChannel),
    Channels(Vec<QuantumChannel>),
    State(CMat),
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub(crate) fn of(sol: &SdpSolution) -> Self {
        Residuals { primal: sol.primal_residual, dual: sol.dual_residual, gap: sol.gap }
    }

    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub value: f64,
    pub bound: BoundKind,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub backend: &'static str,
}

/// `ρ` regrouped as `A ⊗ B ⊗ C` with the original factor dimensions kept for
/// certificate metadata.
#[derive(Debug, Clone)]
pub(crate) struct Tripartite {
    pub m: CMat,
    pub da: usize,
    pub db: usize,
    pub dc: usize,
    pub a_dims: Vec<usize>,
    pub c_dims: Vec<usize>,
}

impl Tripartite {
    pub fn new(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str]) -> Result<Self> {
        check_disjoint(&[a, b, c])?;
        if a.is_empty() {
            return Err(Error::InvalidParameter("A must be nonempty".into()));
        }
        let (m, g) = s.grouped_matrix(&[a, b, c])?;
        let dims_of = |ls: &[&str]| ls.iter().map(|l| s.dims()[s.index_of(l).unwrap()]).collect::<Vec<_>>();
        Ok(Tripartite { m, da: g[0], db: g[1], dc: g[2], a_dims: dims_of(a), c_dims: dims_of(c) })
    }

    pub fn from_matrix(m: CMat, da: usize, db: usize, dc: usize) -> Self {
        Tripartite { m, da, db, dc, a_dims: vec![da], c_dims: vec![dc] }
    }

    pub fn rho_bc(&self) -> CMat {
        linalg::ptrace(&self.m, &[self.da, self.db, self.dc], &[1, 2])
    }

    fn out_dims(&self) -> Vec<usize> {
        let mut d = self.a_dims.clone();
        d.extend(&self.c_dims);
        d
    }

    /// `R_J(ρ_BC)` reordered to `A ⊗ B ⊗ C`.
    pub fn recovered(&self, choi: &CMat) -> CMat {
        let y = linalg::apply_choi(choi, self.dc, self.da * self.dc, &self.rho_bc(), self.db);
        linalg::permute_systems(&y, &[self.db, self.da, self.dc], &[1, 0, 2])
    }

    /// The recovered state as a linear map of the Choi matrix.
    pub fn recovery_superop(&self) -> SuperOp {
        SuperOp::choi_action(
            &self.rho_bc(),
            self.db,
            self.dc,
            self.da * self.dc,
            Some((&[self.db, self.da, self.dc], &[1, 0, 2])),
        )
    }

    pub fn fidelity_with(&self, choi: &CMat) -> f64 {
        let rf = root_fidelity_raw(&self.m, &self.recovered(choi));
        rf * rf
    }

    fn channel(&self, choi: CMat) -> QuantumChannel {
        QuantumChannel::from_choi_unchecked(self.c_dims.clone(), self.out_dims(), choi)
    }

    pub fn petz(&self) -> Result<QuantumChannel> {
        let st = MultipartiteState::from_parts_unchecked(
            vec![self.da, self.db, self.dc],
            to_labels(&["A", "B", "C"]),
            self.m.clone(),
        );
        let p = petz_recovery(&st, &["A"], &["C"])?;
        Ok(self.channel(p.choi().clone()))
    }
}

pub(crate) struct ConvexOutcome {
    pub value: f64,
    pub channel: QuantumChannel,
    pub upper: f64,
    pub sol: SdpSolution,
}

pub(crate) fn convex_for(t: &Tripartite, opts: &SolverOptions) -> Result<ConvexOutcome> {
    let n = t.da * t.db * t.dc;
    let nj = t.dc * t.da * t.dc;
    let prog = FidelityProgram {
        var_dims: vec![nj],
        first: AffineHerm::fixed(t.m.clone()),
        second: AffineHerm::linear(n, 0, t.recovery_superop()),
        constraints: sdp::trace_preserving(0, t.dc, t.da * t.dc),
    };
    let fs = prog.solve(opts)?;
    let ch = QuantumChannel::from_choi_projected(t.c_dims.clone(), t.out_dims(), &fs.vars[0])?;
    let value = t.fidelity_with(ch.choi());
    let upper = fs.dual_bound.max(0.0).powi(2);
    Ok(ConvexOutcome { value, channel: ch, upper, sol: fs.sdp })
}

/// Spectral purification: `ρ = Ψ Ψ†` with `Ψ` of shape `n x rank`.
pub(crate) fn purification_matrix(m: &CMat) -> CMat {
    let (vals, vecs) = linalg::eigh(m);
    let lmax = vals[0].max(0.0);
    let r = vals.iter().filter(|&&v| v > 1e-13 * lmax && v > 0.0).count().max(1);
    CMat::from_fn(m.nrows(), r, |i, k| vecs[(i, k)] * vals[k].max(0.0).sqrt())
}

/// Alternating polar ascent of `‖Ψ†Ξ(W)‖₁ = √F` over Stinespring isometries
/// `W: C → A C E` and the Uhlmann alignment, starting from `start`.
pub(crate) fn seesaw_for(t: &Tripartite, start: &QuantumChannel, tol: f64, max_iter: usize) -> Result<(f64, QuantumChannel, usize)> {
    let (da, db, dc) = (t.da, t.db, t.dc);
    let n_out = da * dc;
    let de = dc * n_out;
    let psi = purification_matrix(&t.m);
    let r = psi.ncols();
    let psi_conj = psi.map(|z| z.conj());
    let mut w = CMat::zeros(n_out * de, dc);
    for (k, kr) in start.kraus().iter().enumerate().take(de) {
        for o in 0..n_out {
            for c in 0..dc {
                w[(o * de + k, c)] = kr[(o, c)];
            }
        }
    }
    let col = |a: usize, rr: usize, e: usize| (a * r + rr) * de + e;
    let overlap = |w: &CMat| -> CMat {
        // Ξ[(a'' b c'), (a r e)] = Σ_c W[(a'' c') e, c] Ψ[(a b c), r]
        let mut xi = CMat::zeros(da * db * dc, da * r * de);
        for a2 in 0..da {
            for c2 in 0..dc {
                let o = a2 * dc + c2;
                for e in 0..de {
                    for c in 0..dc {
                        let wv = w[(o * de + e, c)];
                        if wv == linalg::ZERO {
                            continue;
                        }
                        for b in 0..db {
                            let row = (a2 * db + b) * dc + c2;
                            for a in 0..da {
                                for rr in 0..r {
                                    xi[(row, col(a, rr, e))] += wv * psi[((a * db + b) * dc + c, rr)];
                                }
                            }
                        }
                    }
                }
            }
        }
        psi.adjoint() * xi
    };
    let mut tmat = overlap(&w);
    let mut g = linalg::trace_norm(&tmat);
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let y = linalg::polar_maximizer(&tmat);
        let z = &psi_conj * y.transpose();
        let mut nmat = CMat::zeros(dc, n_out * de);
        for a2 in 0..da {
            for c2 in 0..dc {
                let o = a2 * dc + c2;
                for b in 0..db {
                    let row = (a2 * db + b) * dc + c2;
                    for e in 0..de {
                        for a in 0..da {
                            for rr in 0..r {
                                let zv = z[(row, col(a, rr, e))];
                                for c in 0..dc {
                                    nmat[(c, o * de + e)] += zv * psi[((a * db + b) * dc + c, rr)];
                                }
                            }
                        }
                    }
                }
            }
        }
        let w_new = linalg::polar_maximizer(&nmat);
        let t_new = overlap(&w_new);
        let g_new = linalg::trace_norm(&t_new);
        if g_new < g {
            break;
        }
        let improvement = g_new * g_new - g * g;
        w = w_new;
        tmat = t_new;
        g = g_new;
        if improvement <= tol * g * g {
            break;
        }
    }
    let kraus: Vec<CMat> = (0..de).map(|e| CMat::from_fn(n_out, dc, |o, c| w[(o * de + e, c)])).collect();
    let ch = QuantumChannel::from_kraus(&kraus, t.c_dims.clone(), t.out_dims())
        .or_else(|_| QuantumChannel::from_choi_projected(t.c_dims.clone(), t.out_dims(), &kraus_choi(&kraus, dc, n_out)))?;
    let value = t.fidelity_with(ch.choi());
    Ok((value, ch, iters))
}

fn kraus_choi(kraus: &[CMat], d_in: usize, d_out: usize) -> CMat {
    let mut j = CMat::zeros(d_in * d_out, d_in * d_out);
    for k in kraus {
        let v = CMat::from_fn(d_in * d_out, 1, |row, _| k[(row % d_out, row / d_out)]);
        j += &v * v.adjoint();
    }
    j
}

fn solve_tripartite(t: &Tripartite, backend: Backend, tol: f64) -> Result<OptResult> {
    match backend {
        Backend::Petz => {
            let p = t.petz()?;
            Ok(OptResult {
                value: t.fidelity_with(p.choi()),
                bound: BoundKind::LowerBound,
                certificate: Some(Certificate::Channel(p)),
                iterations: 0,
                residuals: Residuals::default(),
                backend: backend.tag(),
            })
        }
        Backend::Seesaw => {
            let p = t.petz()?;
            let petz_value = t.fidelity_with(p.choi());
            let (value, ch, iterations) = seesaw_for(t, &p, tol, SEESAW_MAX_ITER)?;
            // the ascent starts at the Petz map, so keep it if rounding lost ground
            let (value, ch) = if value >= petz_value { (value, ch) } else { (petz_value, p) };
            Ok(OptResult {
                value,
                bound: BoundKind::LowerBound,
                certificate: Some(Certificate::Channel(ch)),
                iterations,
                residuals: Residuals::default(),
                backend: backend.tag(),
            })
        }
        Backend::Convex => {
            let out = convex_for(t, &SolverOptions::default())?;
            let residuals = Residuals::of(&out.sol);
            let exact = out.upper - out.value <= EXACT_TOL && out.sol.max_residual() <= EXACT_TOL;
            Ok(OptResult {
                value: out.value,
                bound: if exact { BoundKind::ExactWithinTol } else { BoundKind::LowerBound },
                certificate: Some(Certificate::Channel(out.channel)),
                iterations: out.sol.iterations,
                residuals,
                backend: backend.tag(),
            })
        }
    }
}

/// `F(A;B|C)`; `b` and `c` may be empty.
pub fn fidelity_of_recovery(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str], backend: Backend, tol: f64) -> Result<OptResult> {
    let t = Tripartite::new(s, a, b, c)?;
    solve_tripartite(&t, backend, tol)
}

/// `I_F(A;B|C) = -log₂ F(A;B|C)` in bits.
pub fn surprisal_of_recovery(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str], backend: Backend, tol: f64) -> Result<OptResult> {
    let mut r = fidelity_of_recovery(s, a, b, c, backend, tol)?;
    r.value = -r.value.log2();
    r.bound = r.bound.flipped();
    Ok(r)
}

/// `F(A;B) = sup_τ F(σ_AB, τ_A ⊗ σ_B)`; the certificate is the optimal `τ_A`.
pub fn fidelity_ab(sigma: &MultipartiteState, a: &[&str], b: &[&str], backend: Backend, tol: f64) -> Result<OptResult> {
    let mut r = fidelity_of_recovery(sigma, a, b, &[], backend, tol)?;
    if let Some(Certificate::Channel(ch)) = &r.certificate {
        // a channel out of a one-dimensional input is a state preparation
        r.certificate = Some(Certificate::State(ch.choi().clone()));
    }
    Ok(r)
}

pub(crate) fn fidelity_of_tripartite(t: &Tripartite) -> Result<OptResult> {
    solve_tripartite(t, Backend::Convex, SEESAW_TOL)
}
