//! Surprisal of measurement recoverability
//! `D_F(Ā;B) = -log₂ sup_E F(ρ_AB, E_A(ρ_AB))` over entanglement-breaking
//! channels, quantum discord and the fixed-point witnesses relating them.

mod discord;
mod separable;


use std::fmt;
use std::str::FromStr;

pub use discord::{discord, discord_as_cqmi, DiscordResult};

use crate::channels::{eb_channel, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::infoquant::{binary_entropy, check_disjoint, root_fidelity_raw};
use crate::linalg::{self, CMat};
use crate::qcore::MultipartiteState;
use crate::recopt::Residuals;
use crate::rng::StreamRng;
use crate::sdp::{self, AffineHerm, FidelityProgram, SolverOptions, SuperOp};

/// Gap below which the rounded relaxation counts as exact.
pub const DFM_EXACT_TOL: f64 = 1e-6;
pub const DFM_MAX_ITER: usize = 200;
/// Random starts of the see-saw when `|A| ≥ 3`.
const RANDOM_STARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfmBackend {
    Seesaw,
    PptRelax,
}

impl DfmBackend {
    pub fn tag(&self) -> &'static str {
        match self {
            DfmBackend::Seesaw => "seesaw",
            DfmBackend::PptRelax => "ppt-relax",
        }
    }
}

impl fmt::Display for DfmBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DfmBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seesaw" => Ok(DfmBackend::Seesaw),
            "ppt-relax" | "ppt" => Ok(DfmBackend::PptRelax),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfmBound {
    ExactWithinTol,
    /// A feasible entanglement-breaking channel: `f_value ≤ sup F`.
    UpperBoundOnD,
    /// A relaxation optimum: `f_value ≥ sup F`.
    LowerBoundOnD,
}

impl DfmBound {
    pub fn tag(&self) -> &'static str {
        match self {
            DfmBound::ExactWithinTol => "exact-within-tol",
            DfmBound::UpperBoundOnD => "upper-bound-on-D",
            DfmBound::LowerBoundOnD => "lower-bound-on-D",
        }
    }
}

/// Measure-and-prepare form `E(X) = Σ_x Tr(Λ_x X) σ_x`.
#[derive(Debug, Clone)]
pub struct EbForm {
    pub povm: Povm,
    pub preparations: Vec<CMat>,
}

#[derive(Debug, Clone, Default)]
pub struct DfmDiagnostics {
    pub iterations: usize,
    pub residuals: Residuals,
    /// Relaxation optimum when the reported value comes from a rounding.
    pub relaxation_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DfmResult {
    pub d_value: f64,
    pub f_value: f64,
    pub bound: DfmBound,
    /// Entanglement breaking unless the result is an inexact relaxation.
    pub channel_certificate: QuantumChannel,
    pub eb_form: Option<EbForm>,
    pub backend: &'static str,
    pub diagnostics: DfmDiagnostics,
}

impl DfmResult {
    fn new(f: f64, bound: DfmBound, channel: QuantumChannel, eb_form: Option<EbForm>, backend: &'static str, diagnostics: DfmDiagnostics) -> Self {
        let f = f.clamp(0.0, 1.0);
        DfmResult { d_value: -f.log2(), f_value: f, bound, channel_certificate: channel, eb_form, backend, diagnostics }
    }
}

/// `ρ` as a matrix on `B ⊗ A`, the order in which channels on `A` act via
/// [`linalg::apply_choi`].
#[derive(Debug, Clone)]
pub(crate) struct Bipartite {
    pub m: CMat,
    pub d: usize,
    pub db: usize,
    pub a_dims: Vec<usize>,
}

impl Bipartite {
    pub fn new(rho: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<Self> {
        check_disjoint(&[a, b])?;
        if a.is_empty() {
            return Err(Error::InvalidParameter("the measured system must be nonempty".into()));
        }
        let (m, g) = rho.grouped_matrix(&[b, a])?;
        let a_dims = a.iter().map(|l| rho.dim_of(&[*l])).collect::<Result<Vec<_>>>()?;
        Ok(Bipartite { m, d: g[1], db: g[0], a_dims })
    }

    pub fn rho_a(&self) -> CMat {
        linalg::ptrace(&self.m, &[self.db, self.d], &[1])
    }

    pub fn apply(&self, choi: &CMat) -> CMat {
        linalg::apply_choi(choi, self.d, self.d, &self.m, self.db)
    }

    pub fn fidelity_with(&self, choi: &CMat) -> f64 {
        root_fidelity_raw(&self.m, &self.apply(choi)).powi(2)
    }

    /// `ω_x = Tr_A[(I ⊗ Λ) ρ]`.
    pub fn conditional(&self, lambda: &CMat) -> CMat {
        let (d, db) = (self.d, self.db);
        CMat::from_fn(db, db, |c, b| {
            let mut z = linalg::ZERO;
            for a in 0..d {
                for a2 in 0..d {
                    z += lambda[(a, a2)] * self.m[(c * d + a2, b * d + a)];
                }
            }
            z
        })
    }

    /// `G` with `Tr(L ω_Λ) = Tr(Λ G)` for every `Λ`.
    pub fn conditional_adjoint(&self, l: &CMat) -> CMat {
        let (d, db) = (self.d, self.db);
        CMat::from_fn(d, d, |i, j| {
            let mut z = linalg::ZERO;
            for b in 0..db {
                for c in 0..db {
                    z += l[(b, c)] * self.m[(c * d + i, b * d + j)];
                }
            }
            z
        })
    }
}

fn eb_choi(effects: &[CMat], preps: &[CMat]) -> CMat {
    effects.iter().zip(preps).fold(CMat::zeros(0, 0), |acc, (e, s)| {
        let t = linalg::kron(&e.transpose(), s);
        if acc.nrows() == 0 {
            t
        } else {
            acc + t
        }
    })
}

fn normalized_state(m: &CMat) -> Option<CMat> {
    let h = linalg::herm_fn(m, |x| x.max(0.0));
    let t = linalg::trace(&h).re;
    (t > 1e-14).then(|| h / linalg::r(t))
}

/// Current iterate of the alternating optimization.
#[derive(Debug, Clone)]
struct EbIterate {
    effects: Vec<CMat>,
    preps: Vec<CMat>,
    f: f64,
}

impl EbIterate {
    fn new(t: &Bipartite, effects: Vec<CMat>, preps: Vec<CMat>) -> Self {
        let f = t.fidelity_with(&eb_choi(&effects, &preps));
        EbIterate { effects, preps, f }
    }

    fn into_form(self, t: &Bipartite) -> Result<(EbForm, QuantumChannel)> {
        let povm = Povm::from_unnormalized(&self.effects)?;
        let ch = eb_channel(&povm, &self.preps, &t.a_dims)?;
        Ok((EbForm { povm, preparations: self.preps }, ch))
    }
}

/// Optimal preparations for fixed effects.
fn preparation_step(t: &Bipartite, it: &EbIterate, opts: &SolverOptions) -> Result<EbIterate> {
    let (d, db) = (t.d, t.db);
    let n = d * db;
    let mut second = AffineHerm::fixed(CMat::zeros(n, n));
    let mut constraints = Vec::new();
    for (x, e) in it.effects.iter().enumerate() {
        let w = t.conditional(e);
        second.terms.push((x, SuperOp::from_fn(d, n, |s| linalg::kron(&w, s))));
        constraints.push(sdp::trace_equals(x, d, 1.0));
    }
    let prog = FidelityProgram { var_dims: vec![d; it.effects.len()], first: AffineHerm::fixed(t.m.clone()), second, constraints };
    let sol = prog.solve(&SolverOptions { accept_inexact: true, ..*opts })?;
    let preps = sol
        .vars
        .iter()
        .zip(&it.preps)
        .map(|(v, old)| normalized_state(v).unwrap_or_else(|| old.clone()))
        .collect();
    Ok(EbIterate::new(t, it.effects.clone(), preps))
}

/// Optimal effects for fixed preparations.
fn measurement_step(t: &Bipartite, it: &EbIterate, opts: &SolverOptions) -> Result<EbIterate> {
    let (d, db) = (t.d, t.db);
    let n = d * db;
    let mut second = AffineHerm::fixed(CMat::zeros(n, n));
    for (x, s) in it.preps.iter().enumerate() {
        second.terms.push((x, SuperOp::from_fn(d, n, |e| linalg::kron(&t.conditional(e), s))));
    }
    let vars: Vec<usize> = (0..it.preps.len()).collect();
    let prog = FidelityProgram {
        var_dims: vec![d; it.preps.len()],
        first: AffineHerm::fixed(t.m.clone()),
        second,
        constraints: sdp::sum_equals(&vars, &linalg::identity(d)),
    };
    let sol = prog.solve(&SolverOptions { accept_inexact: true, ..*opts })?;
    let raw: Vec<CMat> = sol.vars.iter().map(|v| linalg::herm_fn(v, |x| x.max(0.0))).collect();
    let povm = Povm::from_unnormalized(&raw)?;
    Ok(EbIterate::new(t, povm.effects().to_vec(), it.preps.clone()))
}

fn seesaw_from(t: &Bipartite, start: EbIterate, tol: f64, max_iter: usize, opts: &SolverOptions) -> Result<(EbIterate, usize)> {
    let mut cur = start;
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let before = cur.f;
        for step in [preparation_step, measurement_step] {
            let next = step(t, &cur, opts)?;
            if next.f > cur.f {
                cur = next;
            }
        }
        if cur.f - before <= tol * before.max(1e-12) {
            break;
        }
    }
    Ok((cur, iters))
}

/// Pads a measure-and-prepare pair to `|A|²` outcomes with null effects.
fn padded(t: &Bipartite, mut effects: Vec<CMat>, mut preps: Vec<CMat>, rng: &mut StreamRng) -> EbIterate {
    let d = t.d;
    while effects.len() < d * d {
        effects.push(CMat::zeros(d, d));
        let g = rng.ginibre(d, 1);
        preps.push(normalized_state(&(&g * g.adjoint())).expect("nonzero draw"));
    }
    EbIterate::new(t, effects, preps)
}

fn dephasing_start(t: &Bipartite, basis: &CMat, rng: &mut StreamRng) -> EbIterate {
    let proj: Vec<CMat> = (0..t.d).map(|k| linalg::outer(&basis.column(k).into_owned(), &basis.column(k).into_owned())).collect();
    padded(t, proj.clone(), proj, rng)
}

/// Rounds a PPT Choi matrix of a qubit channel to measure-and-prepare form.
fn rounded_ppt(t: &Bipartite, choi: &CMat, rng: &mut StreamRng) -> Option<EbIterate> {
    let parts = separable::product_decomposition(choi);
    let mut effects = Vec::new();
    let mut preps = Vec::new();
    for (a, b) in parts {
        let nb = b.norm_squared();
        if nb < 1e-14 || a.norm_squared() < 1e-14 {
            continue;
        }
        let ac = a.map(|z| z.conj());
        effects.push(linalg::outer(&ac, &ac) * linalg::r(nb));
        preps.push(linalg::outer(&b, &b) / linalg::r(nb));
    }
    let povm = Povm::from_unnormalized(&effects).ok()?;
    Some(padded(t, povm.effects().to_vec(), preps, rng))
}

struct Relaxation {
    choi: CMat,
    upper: f64,
    residuals: Residuals,
    iterations: usize,
}

fn ppt_relaxation(t: &Bipartite, opts: &SolverOptions) -> Result<Relaxation> {
    let d = t.d;
    let prog = FidelityProgram {
        var_dims: vec![d * d, d * d],
        first: AffineHerm::fixed(t.m.clone()),
        second: AffineHerm::linear(t.d * t.db, 0, SuperOp::choi_action(&t.m, t.db, d, d, None)),
        constraints: {
            let mut c = sdp::trace_preserving(0, d, d);
            c.extend(sdp::partial_transpose_link(0, 1, &[d, d], &[1]));
            c
        },
    };
    let sol = prog.solve(opts)?;
    let upper = sol.root_fidelity.max(sol.dual_bound).clamp(0.0, 1.0).powi(2);
    Ok(Relaxation {
        choi: sol.vars[0].clone(),
        upper,
        residuals: Residuals { primal: sol.sdp.primal_residual, dual: sol.sdp.dual_residual, gap: sol.sdp.gap },
        iterations: sol.sdp.iterations,
    })
}

/// `D_F(Ā;B)` with the chosen backend. The see-saw returns a feasible
/// entanglement-breaking channel (an upper bound on `D_F`); the PPT
/// relaxation returns a lower bound, exact for a qubit `A`.
pub fn dfm(rho: &MultipartiteState, a: &[&str], b: &[&str], backend: DfmBackend, tol: f64, rng: &mut StreamRng) -> Result<DfmResult> {
    let t = Bipartite::new(rho, a, b)?;
    let opts = SolverOptions::default();
    match backend {
        DfmBackend::Seesaw => {
            let mut starts = vec![dephasing_start(&t, &linalg::identity(t.d), rng), dephasing_start(&t, &linalg::eigh(&t.rho_a()).1, rng)];
            if t.d == 2 {
                let relax = ppt_relaxation(&t, &opts)?;
                starts.extend(rounded_ppt(&t, &relax.choi, rng));
            } else {
                for _ in 0..RANDOM_STARTS {
                    let p = Povm::random(t.d, t.d * t.d, 1, rng);
                    let preps = (0..t.d * t.d)
                        .map(|_| {
                            let g = rng.ginibre(t.d, 1);
                            normalized_state(&(&g * g.adjoint())).expect("nonzero draw")
                        })
                        .collect();
                    starts.push(EbIterate::new(&t, p.effects().to_vec(), preps));
                }
            }
            let mut best: Option<(EbIterate, usize)> = None;
            let mut total = 0;
            for s in starts {
                let (it, n) = seesaw_from(&t, s, tol, DFM_MAX_ITER, &opts)?;
                total += n;
                if best.as_ref().is_none_or(|(b, _)| it.f > b.f) {
                    best = Some((it, n));
                }
            }
            let (it, _) = best.expect("at least one start");
            let f = it.f;
            let (form, ch) = it.into_form(&t)?;
            let f = f.max(t.fidelity_with(ch.choi()));
            let diag = DfmDiagnostics { iterations: total, ..Default::default() };
            Ok(DfmResult::new(f, DfmBound::UpperBoundOnD, ch, Some(form), backend.tag(), diag))
        }
        DfmBackend::PptRelax => {
            let relax = ppt_relaxation(&t, &opts)?;
            let mut diag = DfmDiagnostics { iterations: relax.iterations, residuals: relax.residuals, relaxation_value: Some(relax.upper) };
            if t.d == 2 {
                if let Some(it) = rounded_ppt(&t, &relax.choi, rng) {
                    let (form, ch) = it.into_form(&t)?;
                    let f = t.fidelity_with(ch.choi());
                    if relax.upper - f <= DFM_EXACT_TOL && relax.residuals.max() <= DFM_EXACT_TOL {
                        return Ok(DfmResult::new(f, DfmBound::ExactWithinTol, ch, Some(form), backend.tag(), diag));
                    }
                }
            }
            let ch = QuantumChannel::from_choi_projected(t.a_dims.clone(), t.a_dims.clone(), &relax.choi)?;
            diag.relaxation_value = None;
            Ok(DfmResult::new(relax.upper, DfmBound::LowerBoundOnD, ch, None, backend.tag(), diag))
        }
    }
}

/// Closed form for pure inputs: `D_F = -log₂ Tr ψ_A²`, attained by dephasing
/// in the eigenbasis of `ψ_A`.
pub fn dfm_pure(psi: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<DfmResult> {
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::NotPure { purity });
    }
    let t = Bipartite::new(psi, a, b)?;
    let rho_a = t.rho_a();
    let f = linalg::re_trace_prod(&rho_a, &rho_a);
    let basis = linalg::eigh(&rho_a).1;
    let povm = Povm::from_basis(&basis)?;
    let preps = povm.effects().to_vec();
    let ch = eb_channel(&povm, &preps, &t.a_dims)?;
    Ok(DfmResult::new(f, DfmBound::ExactWithinTol, ch, Some(EbForm { povm, preparations: preps }), "closed-form", DfmDiagnostics::default()))
}

#[derive(Debug, Clone)]
pub struct FixedPointWitness {
    pub channel: QuantumChannel,
    /// `‖ρ - E(ρ)‖₁`.
    pub trace_dist: f64,
    /// Certified upper bound on `D_F` in bits.
    pub d_value: f64,
}

/// An entanglement-breaking channel with `‖ρ - E(ρ)‖₁ ≤ 2√D_F` (natural-log
/// `D_F`), from the see-saw certificate.
pub fn approx_fixed_point_witness(rho: &MultipartiteState, a: &[&str], b: &[&str], eps_budget: f64, rng: &mut StreamRng) -> Result<FixedPointWitness> {
    let r = dfm(rho, a, b, DfmBackend::Seesaw, 1e-9, rng)?;
    if r.d_value > eps_budget + 1e-12 {
        return Err(Error::BudgetViolated(format!("D_F upper bound {:.6e} bits exceeds budget {eps_budget:.6e}", r.d_value)));
    }
    let t = Bipartite::new(rho, a, b)?;
    let dist = linalg::trace_norm(&(&t.m - t.apply(r.channel_certificate.choi())));
    let limit = 2.0 * (r.d_value * std::f64::consts::LN_2).sqrt();
    if dist > limit + 1e-5 {
        return Err(Error::BudgetViolated(format!("trace distance {dist:.6e} exceeds 2√D_F = {limit:.6e}")));
    }
    Ok(FixedPointWitness { channel: r.channel_certificate, trace_dist: dist, d_value: r.d_value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordBound {
    pub bound: f64,
    /// `‖ρ - E(ρ)‖₁`, before clamping.
    pub epsilon: f64,
    pub clamped: bool,
}

/// `4 h₂(ε) + 8 ε log₂|A|` with `ε = ‖ρ - E(ρ)‖₁`, an upper bound on the
/// discord for any entanglement-breaking `E`.
pub fn discord_upper_from_fixed_point(rho: &MultipartiteState, a: &[&str], b: &[&str], eb: &QuantumChannel) -> Result<DiscordBound> {
    let t = Bipartite::new(rho, a, b)?;
    if eb.d_in() != t.d || eb.d_out() != t.d {
        return Err(Error::DimensionMismatch(format!("channel {}→{} on a system of dimension {}", eb.d_in(), eb.d_out(), t.d)));
    }
    let epsilon = linalg::trace_norm(&(&t.m - t.apply(eb.choi())));
    let clamped = epsilon > 1.0;
    let e = epsilon.min(1.0);
    let bound = 4.0 * binary_entropy(e)? + 8.0 * e * (t.d as f64).log2();
    Ok(DiscordBound { bound, epsilon, clamped })
}
