use super::{BoundKind, Certificate, OptResult, Residuals, Tripartite};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::infoquant::{check_disjoint, root_fidelity_raw};
use crate::linalg::{self, CMat};
use crate::qcore::MultipartiteState;
use crate::rng::StreamRng;
use crate::sdp::{self, AffineHerm, FidelityProgram, SolverOptions, SuperOp};

#[derive(Debug, Clone)]
pub struct MultipartiteOptions {
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop a restart once a sweep improves `F` by less than this.
    pub tol: f64,
}

impl Default for MultipartiteOptions {
    fn default() -> Self {
        MultipartiteOptions { sweeps: 20, restarts: 5, seed: 0, tol: 1e-7 }
    }
}

struct Chain {
    /// `A_1 … A_l C`
    full: CMat,
    /// `A_l C`
    last: CMat,
    part_dims: Vec<usize>,
    dc: usize,
}

impl Chain {
    fn l(&self) -> usize {
        self.part_dims.len()
    }

    /// `R^1 ∘ … ∘ R^{l-1}(ρ_{A_l C})` on `A_1 … A_l C`, where map `j`
    /// recovers part `j` from `C`.
    fn output(&self, chois: &[CMat]) -> CMat {
        let l = self.l();
        let mut x = self.last.clone();
        let mut d_rest = self.part_dims[l - 1];
        for j in (0..l - 1).rev() {
            let dj = self.part_dims[j];
            let y = linalg::apply_choi(&chois[j], self.dc, dj * self.dc, &x, d_rest);
            x = linalg::permute_systems(&y, &[d_rest, dj, self.dc], &[1, 0, 2]);
            d_rest *= dj;
        }
        x
    }

    fn fidelity(&self, chois: &[CMat]) -> f64 {
        let rf = root_fidelity_raw(&self.full, &self.output(chois));
        rf * rf
    }

    fn step(&self, chois: &[CMat], k: usize, opts: &SolverOptions) -> Result<(CMat, Residuals)> {
        let dk = self.part_dims[k];
        let nj = self.dc * dk * self.dc;
        let n = self.full.nrows();
        let mut work = chois.to_vec();
        let op = SuperOp::from_fn(nj, n, |e| {
            work[k] = e.clone();
            self.output(&work)
        });
        let prog = FidelityProgram {
            var_dims: vec![nj],
            first: AffineHerm::fixed(self.full.clone()),
            second: AffineHerm::linear(n, 0, op),
            constraints: sdp::trace_preserving(0, self.dc, dk * self.dc),
        };
        let sol = prog.solve(opts)?;
        let ch = QuantumChannel::from_choi_projected(vec![self.dc], vec![dk, self.dc], &sol.vars[0])?;
        Ok((ch.choi().clone(), Residuals::of(&sol.sdp)))
    }
}

/// `F(A_1; …; A_l | C)` by cyclic see-saw over the recovery maps, each step
/// an exact convex solve; restart 0 starts from Petz maps of `ρ_{A_j C}`.
pub fn multipartite_for(s: &MultipartiteState, parts: &[&[&str]], c: &[&str], opts: &MultipartiteOptions) -> Result<OptResult> {
    if parts.len() < 2 {
        return Err(Error::InvalidParameter("at least two parts are required".into()));
    }
    let mut groups: Vec<&[&str]> = parts.to_vec();
    groups.push(c);
    check_disjoint(&groups)?;
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidParameter("parts must be nonempty".into()));
    }
    let (full, gd) = s.grouped_matrix(&groups)?;
    let l = parts.len();
    let dc = gd[l];
    let part_dims = gd[..l].to_vec();
    let last = linalg::ptrace(&full, &gd, &[l - 1, l]);
    let chain = Chain { full, last, part_dims: part_dims.clone(), dc };
    let solver = SolverOptions::default();
    let mut rng = StreamRng::new(opts.seed, 0);

    let mut best: Option<(f64, Vec<CMat>, usize, Residuals)> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut chois: Vec<CMat> = (0..l - 1)
            .map(|j| {
                let dj = part_dims[j];
                if restart == 0 {
                    let keep = [j, l];
                    let m = linalg::ptrace(&chain.full, &gd, &keep);
                    let t = Tripartite::from_matrix(m, dj, 1, dc);
                    t.petz().map(|p| p.choi().clone())
                } else {
                    let kc = 1 + rng.index(dc * dj);
                    Ok(QuantumChannel::random(&[dc], &[dj, dc], kc.max(1), &mut rng).choi().clone())
                }
            })
            .collect::<Result<_>>()?;
        let mut value = chain.fidelity(&chois);
        let mut iterations = 0;
        let mut residuals = Residuals::default();
        for _ in 0..opts.sweeps {
            let before = value;
            for k in 0..l - 1 {
                let (j, res) = chain.step(&chois, k, &solver)?;
                iterations += 1;
                let mut trial = chois.clone();
                trial[k] = j;
                let v = chain.fidelity(&trial);
                if v >= value {
                    value = v;
                    chois = trial;
                    residuals = res;
                }
            }
            if value - before <= opts.tol {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, chois, iterations, residuals));
        }
    }
    let (value, chois, iterations, residuals) = best.expect("at least one restart");
    let c_dims: Vec<usize> = c.iter().map(|lb| s.dims()[s.index_of(lb).unwrap()]).collect();
    let channels = chois
        .into_iter()
        .enumerate()
        .map(|(j, choi)| {
            let mut out: Vec<usize> = parts[j].iter().map(|lb| s.dims()[s.index_of(lb).unwrap()]).collect();
            out.extend(&c_dims);
            QuantumChannel::from_choi_unchecked(c_dims.clone(), out, choi)
        })
        .collect();
    Ok(OptResult {
        value,
        bound: BoundKind::LowerBound,
        certificate: Some(Certificate::Channels(channels)),
        iterations,
        residuals,
        backend: "seesaw",
    })
}
