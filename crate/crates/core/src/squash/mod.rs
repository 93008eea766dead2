//! Geometric squashed entanglement `E_F^sq(A;B) = -½ log₂ sup_ω F(A;B|E)_ω`
//! over extensions `ω_ABE` of `ρ_AB`.


use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::infoquant::check_disjoint;
use crate::linalg::{self, CMat, CVec};
use crate::qcore::state::to_labels;
use crate::qcore::MultipartiteState;
use crate::recopt::{convex_for, purification_matrix, OptResult, Tripartite};
use crate::rng::StreamRng;
use crate::sdp::{self, AffineHerm, FidelityProgram, SolverOptions, SuperOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GseBound {
    Exact,
    UpperBoundOnE,
}

impl GseBound {
    pub fn tag(&self) -> &'static str {
        match self {
            GseBound::Exact => "exact",
            GseBound::UpperBoundOnE => "upper-bound-on-E",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GseResult {
    /// Bits.
    pub e_value: f64,
    pub f_sq_value: f64,
    pub bound: GseBound,
    /// Squashing channel from the purifying system of `ρ_AB` to `E`.
    pub squashing: QuantumChannel,
    pub env_dim: usize,
    /// `ω_ABE` with labels `A, B, E`.
    pub extension: MultipartiteState,
    /// Recovery channel `E → A ⊗ E`.
    pub recovery: QuantumChannel,
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub struct GseOptions {
    /// Defaults to `|A|·|B|` when `None`.
    pub env_dim: Option<usize>,
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Stop once a sweep raises `F` by less than this.
    pub tol: f64,
    /// Extension `ω` of the input (labels `a`, `b` plus any others, which form
    /// `E`) used as restart 0 instead of the purification.
    pub warm_start: Option<MultipartiteState>,
}

impl Default for GseOptions {
    fn default() -> Self {
        GseOptions { env_dim: None, restarts: 5, sweeps: 10, seed: 0, tol: 1e-7, warm_start: None }
    }
}

fn e_of(f: f64) -> f64 {
    -0.5 * f.log2()
}

fn extension_state(m: CMat, da: usize, db: usize, de: usize) -> MultipartiteState {
    MultipartiteState::from_parts_unchecked(vec![da, db, de], to_labels(&["A", "B", "E"]), m)
}

/// `E = -log₂ ‖φ_A‖_∞` for a pure bipartite state.
pub fn gse_pure(phi: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<GseResult> {
    let purity = phi.purity();
    if purity < 1.0 - 1e-9 {
        return Err(Error::NotPure { purity });
    }
    check_disjoint(&[a, b])?;
    let (m, g) = phi.grouped_matrix(&[a, b])?;
    if g.iter().product::<usize>() != phi.dim() {
        return Err(Error::InvalidParameter("A and B must cover the state".into()));
    }
    let (da, db) = (g[0], g[1]);
    let rho_a = linalg::ptrace(&m, &[da, db], &[0]);
    let (vals, vecs) = linalg::eigh(&rho_a);
    let top = vals[0];
    let v = vecs.column(0).into_owned();
    // trivial extension, recovery prepares the top Schmidt vector
    let recovery = QuantumChannel::replacement(&[1], &linalg::outer(&v, &v), &[da, 1]);
    Ok(GseResult {
        e_value: -top.log2(),
        f_sq_value: top * top,
        bound: GseBound::Exact,
        squashing: QuantumChannel::replacement(&[1], &linalg::identity(1), &[1]),
        env_dim: 1,
        extension: extension_state(m, da, db, 1),
        recovery,
        restarts: 0,
    })
}

/// `Σ_x p(x) |ψ_x⟩⟨ψ_x|_A ⊗ |φ_x⟩⟨φ_x|_B ⊗ |x⟩⟨x|_E` together with the
/// measure-and-prepare recovery `E → A ⊗ E` that reproduces it exactly.
pub fn separable_witness_extension(decomposition: &[(f64, CVec, CVec)]) -> Result<(MultipartiteState, QuantumChannel)> {
    if decomposition.is_empty() {
        return Err(Error::InvalidParameter("empty decomposition".into()));
    }
    let total: f64 = decomposition.iter().map(|t| t.0).sum();
    if decomposition.iter().any(|t| t.0 < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("weights must form a probability vector".into()));
    }
    let (da, db) = (decomposition[0].1.len(), decomposition[0].2.len());
    for (_, a, b) in decomposition {
        if a.len() != da || b.len() != db {
            return Err(Error::DimensionMismatch("decomposition vectors differ in dimension".into()));
        }
        for v in [a, b] {
            let n = v.norm();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::BadNorm { norm: n });
            }
        }
    }
    let de = decomposition.len();
    let mut m = CMat::zeros(da * db * de, da * db * de);
    let mut kraus = Vec::with_capacity(de);
    for (x, (p, a, b)) in decomposition.iter().enumerate() {
        let col = |v: &CVec| CMat::from_column_slice(v.len(), 1, v.as_slice());
        let flag = col(&linalg::basis_vector(de, x));
        let v = linalg::kron(&linalg::kron(&col(a), &col(b)), &flag);
        m += &v * v.adjoint() * linalg::r(*p);
        // |ψ_x⟩_A |x⟩_E ⟨x|_E
        kraus.push(linalg::kron(&col(a), &flag) * flag.adjoint());
    }
    let recovery = QuantumChannel::from_kraus(&kraus, vec![de], vec![da, de])?;
    Ok((extension_state(m, da, db, de), recovery))
}

/// Squashing channel `S: E' → E` with `(id ⊗ S)(ψ) = ω` for the spectral
/// purification `ψ` of `ρ_AB = Tr_E ω`.
fn squashing_from_extension(psi: &CMat, omega: &CMat, de: usize) -> Result<QuantumChannel> {
    let n_ab = psi.nrows();
    let r = psi.ncols();
    let om = purification_matrix(omega);
    let nf = om.ncols();
    let big_omega = CMat::from_fn(n_ab, de * nf, |ab, ef| om[(ab * de + ef / nf, ef % nf)]);
    let gram = psi.adjoint() * psi;
    let pinv = linalg::hpd_inverse(&gram).ok_or_else(|| Error::InvalidParameter("degenerate purification".into()))? * psi.adjoint();
    let vt = pinv * big_omega;
    let v = vt.transpose();
    // nearest isometry absorbs the numerical mismatch of the marginals
    let svd = v.svd(true, true);
    let v = svd.u.unwrap() * svd.v_t.unwrap();
    let kraus: Vec<CMat> = (0..nf).map(|f| CMat::from_fn(de, r, |e, i| v[(e * nf + f, i)])).collect();
    QuantumChannel::from_kraus(&kraus, vec![r], vec![de])
}

struct Heuristic {
    da: usize,
    db: usize,
    de: usize,
    r: usize,
    /// `|ψ⟩⟨ψ|` on `AB ⊗ E'`.
    psi_dm: CMat,
}

impl Heuristic {
    fn n_ab(&self) -> usize {
        self.da * self.db
    }

    fn extension(&self, s: &CMat) -> CMat {
        linalg::apply_choi(s, self.r, self.de, &self.psi_dm, self.n_ab())
    }

    fn recovery_step(&self, s: &CMat, opts: &SolverOptions) -> Result<(f64, QuantumChannel)> {
        let t = Tripartite::from_matrix(self.extension(s), self.da, self.db, self.de);
        let out = convex_for(&t, opts)?;
        Ok((out.value, out.channel))
    }

    fn squash_step(&self, rec: &QuantumChannel, opts: &SolverOptions) -> Result<QuantumChannel> {
        let (da, db, de, r) = (self.da, self.db, self.de, self.r);
        let nj = r * de;
        let n = da * db * de;
        let first = SuperOp::choi_action(&self.psi_dm, self.n_ab(), r, de, None);
        let second = SuperOp::from_fn(nj, n, |e| {
            let w = linalg::apply_choi(e, r, de, &self.psi_dm, self.n_ab());
            let wbe = linalg::ptrace(&w, &[da, db, de], &[1, 2]);
            let y = linalg::apply_choi(rec.choi(), de, da * de, &wbe, db);
            linalg::permute_systems(&y, &[db, da, de], &[1, 0, 2])
        });
        let prog = FidelityProgram {
            var_dims: vec![nj],
            first: AffineHerm::linear(n, 0, first),
            second: AffineHerm::linear(n, 0, second),
            constraints: sdp::trace_preserving(0, r, de),
        };
        // both arguments vary, so strict feasibility fails for rank-deficient
        // inputs; any repaired iterate is a valid channel and gets re-scored
        let sol = prog.solve(&SolverOptions { accept_inexact: true, ..*opts })?;
        QuantumChannel::from_choi_projected(vec![r], vec![de], &sol.vars[0])
    }
}

/// Alternating recovery / squashing-channel optimization on a fixed
/// purification; the result is a lower bound on `F^sq` and hence an upper
/// bound on `E_F^sq` for the given environment dimension.
pub fn gse_heuristic(rho: &MultipartiteState, a: &[&str], b: &[&str], opts: &GseOptions) -> Result<GseResult> {
    check_disjoint(&[a, b])?;
    let (m, g) = rho.grouped_matrix(&[a, b])?;
    let (da, db) = (g[0], g[1]);
    let psi = purification_matrix(&m);
    let r = psi.ncols();
    let warm = match &opts.warm_start {
        Some(w) => {
            let rest: Vec<&str> = w.labels().iter().map(|s| s.as_str()).filter(|l| !a.contains(l) && !b.contains(l)).collect();
            let (om, wg) = w.grouped_matrix(&[a, b, &rest])?;
            if wg[0] != da || wg[1] != db {
                return Err(Error::DimensionMismatch("warm start does not extend the input".into()));
            }
            Some((om, wg[2]))
        }
        None => None,
    };
    let de = match &warm {
        Some((_, d)) => *d,
        None => opts.env_dim.unwrap_or(da * db),
    };
    if de == 0 {
        return Err(Error::InvalidParameter("environment dimension must be positive".into()));
    }
    let psi_vec = CMat::from_fn(da * db * r, 1, |k, _| psi[(k / r, k % r)]);
    let h = Heuristic { da, db, de, r, psi_dm: &psi_vec * psi_vec.adjoint() };
    let solver = SolverOptions::default();
    let mut rng = StreamRng::new(opts.seed, 0);

    let mut best: Option<(f64, QuantumChannel, QuantumChannel)> = None;
    let restarts = opts.restarts.max(1);
    for restart in 0..restarts {
        let start = if restart == 0 {
            match &warm {
                Some((om, _)) => squashing_from_extension(&psi, om, de)?,
                None if de >= r => {
                    let v = CMat::from_fn(de, r, |i, j| if i == j { linalg::ONE } else { linalg::ZERO });
                    QuantumChannel::from_kraus(&[v], vec![r], vec![de])?
                }
                None => QuantumChannel::random(&[r], &[de], r.div_ceil(de), &mut rng),
            }
        } else {
            let k = r.div_ceil(de) + rng.index(r * de);
            QuantumChannel::random(&[r], &[de], k, &mut rng)
        };
        let mut s = start;
        let (mut f, mut rec) = h.recovery_step(s.choi(), &solver)?;
        // every extension of a pure state is a product, nothing to squash
        let sweeps = if r == 1 { 0 } else { opts.sweeps };
        for _ in 0..sweeps {
            let s_new = h.squash_step(&rec, &solver)?;
            let (f_new, rec_new) = h.recovery_step(s_new.choi(), &solver)?;
            if f_new <= f {
                break;
            }
            let gain = f_new - f;
            s = s_new;
            f = f_new;
            rec = rec_new;
            if gain < opts.tol {
                break;
            }
        }
        if best.as_ref().is_none_or(|bst| f > bst.0) {
            best = Some((f, s, rec));
        }
    }
    let (f, s, rec) = best.expect("at least one restart");
    let ext = extension_state(h.extension(s.choi()), da, db, de);
    Ok(GseResult {
        e_value: e_of(f),
        f_sq_value: f,
        bound: GseBound::UpperBoundOnE,
        squashing: s,
        env_dim: de,
        extension: ext,
        recovery: rec,
        restarts,
    })
}

/// Convex `F(A;B|E)` on the extension `(id ⊗ S)(ψ)` of `ρ`, where `ψ` is the
/// spectral purification of `ρ_AB` (reference dimension = rank).
pub fn fidelity_for_extension(rho: &MultipartiteState, a: &[&str], b: &[&str], squashing: &QuantumChannel) -> Result<OptResult> {
    check_disjoint(&[a, b])?;
    let (m, g) = rho.grouped_matrix(&[a, b])?;
    let psi = purification_matrix(&m);
    let r = psi.ncols();
    if squashing.d_in() != r {
        return Err(Error::DimensionMismatch(format!(
            "squashing channel input {} differs from the purification dimension {r}",
            squashing.d_in()
        )));
    }
    let de = squashing.d_out();
    let psi_vec = CMat::from_fn(m.nrows() * r, 1, |k, _| psi[(k / r, k % r)]);
    let h = Heuristic { da: g[0], db: g[1], de, r, psi_dm: &psi_vec * psi_vec.adjoint() };
    let t = Tripartite::from_matrix(h.extension(squashing.choi()), g[0], g[1], de);
    crate::recopt::fidelity_of_tripartite(&t)
}

/// Rank of `ρ_AB`, the input dimension expected of squashing channels.
pub fn purification_dim(rho: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<usize> {
    let (m, _) = rho.grouped_matrix(&[a, b])?;
    Ok(purification_matrix(&m).ncols())
}

/// `F(AA'; BB' | E)` for a private state `γ` (labels `[A, B, A', B']`) and an
/// extension generated by `squashing`.
pub fn private_state_fidelity_cap(gamma: &MultipartiteState, labels: [&str; 4], squashing: &QuantumChannel) -> Result<f64> {
    let [a, b, a2, b2] = labels;
    fidelity_for_extension(gamma, &[a, a2], &[b, b2], squashing).map(|r| r.value)
}
