use super::Bipartite;
use crate::channels::{measurement_isometry, Isometry, Povm};
use crate::error::Result;
use crate::infoquant::{cqmi, mutual_information};
use crate::linalg::{self, CMat, CVec};
use crate::qcore::MultipartiteState;
use crate::rng::StreamRng;

const GRID_THETA: usize = 30;
const GRID_PHI: usize = 60;
const ASCENT_MAX_ITER: usize = 500;
const RANDOM_STARTS: usize = 3;

#[derive(Debug, Clone)]
pub struct DiscordResult {
    /// `I(A;B) - I(X;B)` for the best measurement found: an upper bound on
    /// the discord.
    pub value: f64,
    pub povm: Povm,
    pub mutual_information: f64,
    pub classical_information: f64,
}

fn xlnx_sum(m: &CMat) -> f64 {
    linalg::eigvalsh(m).iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum()
}

/// `I(X;B)` in nats for rank-one effects `V†|x⟩⟨x|V`, without the constant
/// `H(B)` term.
fn info_part(t: &Bipartite, effects: &[CMat]) -> f64 {
    effects
        .iter()
        .map(|e| {
            let w = t.conditional(e);
            let p = linalg::trace(&w).re;
            if p <= 0.0 {
                0.0
            } else {
                xlnx_sum(&w) - p * p.ln()
            }
        })
        .sum()
}

fn effects_of(v: &CMat) -> Vec<CMat> {
    (0..v.nrows())
        .map(|x| {
            let phi: CVec = v.row(x).adjoint();
            linalg::outer(&phi, &phi)
        })
        .collect()
}

/// Monotone ascent of the convex objective `I(X;B)` over rank-one POVMs
/// `Λ_x = V†|x⟩⟨x|V`: each step maximizes the linearization at the current
/// point, itself linearized in `V` and solved by a polar decomposition.
fn ascent(t: &Bipartite, mut v: CMat) -> (f64, CMat) {
    let mut val = info_part(t, &effects_of(&v));
    for _ in 0..ASCENT_MAX_ITER {
        let d = t.d;
        let m = v.nrows();
        let mut grads = Vec::with_capacity(m);
        for x in 0..m {
            let phi: CVec = v.row(x).adjoint();
            let w = t.conditional(&linalg::outer(&phi, &phi));
            let p = linalg::trace(&w).re;
            if p <= 1e-300 {
                grads.push(CMat::zeros(d, d));
                continue;
            }
            let l = linalg::herm_fn(&w, |e| e.max(p * 1e-30).ln() - p.ln());
            grads.push(linalg::hermitian_part(&t.conditional_adjoint(&l)));
        }
        let shift = grads.iter().map(linalg::min_eigenvalue).fold(0.0, f64::min);
        let mut k = CMat::zeros(d, m);
        for (x, g) in grads.iter().enumerate() {
            let col = (g - linalg::identity(d) * linalg::r(shift)) * v.row(x).adjoint();
            k.set_column(x, &col);
        }
        let next = linalg::polar_maximizer(&k);
        let nv = info_part(t, &effects_of(&next));
        if nv <= val + 1e-14 {
            break;
        }
        v = next;
        val = nv;
    }
    (val, v)
}

fn bloch_basis(theta: f64, phi: f64) -> CMat {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = linalg::c(0.0, phi).exp();
    // rows are ⟨φ_x|
    CMat::from_row_slice(2, 2, &[linalg::r(c), e.conj() * s, linalg::r(-s), e.conj() * c])
}

/// Compass search on the projective Bloch angles.
fn refine(t: &Bipartite, mut theta: f64, mut phi: f64) -> (f64, f64, f64) {
    let f = |th: f64, ph: f64| info_part(t, &effects_of(&bloch_basis(th, ph)));
    let mut best = f(theta, phi);
    let mut step = [std::f64::consts::PI / GRID_THETA as f64, 2.0 * std::f64::consts::PI / GRID_PHI as f64];
    while step[0] > 1e-10 {
        let mut moved = false;
        for (dt, dp) in [(step[0], 0.0), (-step[0], 0.0), (0.0, step[1]), (0.0, -step[1])] {
            let v = f(theta + dt, phi + dp);
            if v > best {
                best = v;
                theta += dt;
                phi += dp;
                moved = true;
            }
        }
        if !moved {
            step = [step[0] / 2.0, step[1] / 2.0];
        }
    }
    (best, theta, phi)
}

fn pad_rows(v: &CMat, m: usize) -> CMat {
    CMat::from_fn(m, v.ncols(), |i, j| if i < v.nrows() { v[(i, j)] } else { linalg::ZERO })
}

/// `D(Ā;B) = I(A;B) - sup I(X;B)` over rank-one POVMs with at most `|A|²`
/// outcomes. Qubits use a projective Bloch grid with refinement followed by
/// four-outcome ascents; larger systems use the ascent from several starts.
pub fn discord(rho: &MultipartiteState, a: &[&str], b: &[&str], rng: &mut StreamRng) -> Result<DiscordResult> {
    let t = Bipartite::new(rho, a, b)?;
    let d = t.d;
    let m = d * d;
    let mut candidates: Vec<CMat> = Vec::new();
    if d == 2 {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..GRID_THETA {
            let theta = std::f64::consts::PI * i as f64 / (GRID_THETA - 1) as f64;
            for j in 0..GRID_PHI {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / GRID_PHI as f64;
                let v = info_part(&t, &effects_of(&bloch_basis(theta, phi)));
                if v > best.0 {
                    best = (v, theta, phi);
                }
            }
        }
        let (_, theta, phi) = refine(&t, best.1, best.2);
        candidates.push(bloch_basis(theta, phi));
    } else {
        candidates.push(linalg::identity(d));
        candidates.push(linalg::eigh(&t.rho_a()).1.adjoint());
    }
    let mut results: Vec<(f64, CMat)> = candidates.iter().map(|v| (info_part(&t, &effects_of(v)), v.clone())).collect();
    let mut starts: Vec<CMat> = candidates.iter().map(|v| pad_rows(v, m)).collect();
    for _ in 0..RANDOM_STARTS {
        let g = rng.ginibre(m, d);
        starts.push(linalg::polar_maximizer(&g.adjoint()));
    }
    for s in starts {
        results.push(ascent(&t, s));
    }
    let (best_val, best_v) = results.into_iter().fold((f64::NEG_INFINITY, CMat::zeros(0, 0)), |acc, r| if r.0 > acc.0 { r } else { acc });
    let rho_b = linalg::ptrace(&t.m, &[t.db, d], &[0]);
    let classical = ((best_val - xlnx_sum(&rho_b)) / std::f64::consts::LN_2).max(0.0);
    let mi = mutual_information(rho, a, b)?;
    let effects: Vec<CMat> = effects_of(&best_v).into_iter().filter(|e| linalg::trace(e).re > 1e-14).collect();
    let povm = Povm::from_unnormalized(&effects)?;
    Ok(DiscordResult { value: (mi - classical).max(0.0), povm, mutual_information: mi, classical_information: classical })
}

fn fresh_label(rho: &MultipartiteState, base: &str) -> String {
    let mut l = base.to_string();
    while rho.has_label(&l) {
        l.push('\'');
    }
    l
}

/// `I(E;B|X)` on `σ_XEB = U(ρ_AB)` for the isometric extension `U` of the
/// measurement; equals `I(A;B) - I(X;B)`.
pub fn discord_as_cqmi(rho: &MultipartiteState, a: &[&str], b: &[&str], povm: &Povm) -> Result<f64> {
    let dil = measurement_isometry(povm);
    let a_dims = a.iter().map(|l| rho.dim_of(&[*l])).collect::<Result<Vec<_>>>()?;
    let u = Isometry::new(dil.isometry.matrix().clone(), a_dims, dil.isometry.out_dims().to_vec())?;
    let x = fresh_label(rho, "X");
    let e = fresh_label(rho, "E");
    let sigma = u.channel().apply_relabel(&rho.partial_trace(&[a, b].concat())?, a, &[&x, &e])?;
    cqmi(&sigma, &[&e], b, &[&x])
}
