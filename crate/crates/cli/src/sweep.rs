//! Randomized inequality sweeps.
//!
//! Each sample draws from its own stream `(seed, index)`, so records do not
//! depend on the number of worker threads.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;
use recoverlib::channels::dephasing_channel;
use recoverlib::infoquant::{conditional_renyi_entropy, cqmi, digest_matrices, fidelity, renyi_cqmi};
use recoverlib::linalg::{self, CMat};
use recoverlib::measrec::{approx_fixed_point_witness, dfm, discord, discord_upper_from_fixed_point, DfmBackend};
use recoverlib::qcore::{random_density, random_pure, MultipartiteState};
use recoverlib::recopt::{fidelity_of_recovery, Backend, SEESAW_TOL};
use recoverlib::StreamRng;
use serde::Serialize;

use crate::make::cq_state;

pub const TAGS: &[&str] = &[
    "fr-inequality",
    "duality",
    "weak-chain",
    "renyi-mono",
    "ssa",
    "petz-dominance",
    "classical-cond",
    "halpha-cq",
    "dfm-bracket",
    "approx-faithful",
];

/// Orders used for the conditional Rényi entropy check on cq states.
pub const HALPHA_GRID: [f64; 6] = [0.0, 0.5, 0.9, 1.1, 1.5, 2.0];

pub fn default_tol(tag: &str) -> f64 {
    match tag {
        "fr-inequality" | "dfm-bracket" => 1e-5,
        "duality" => 5e-6,
        "weak-chain" | "classical-cond" => 2e-6,
        "approx-faithful" => 1e-4,
        _ => 1e-7,
    }
}

fn default_dims(tag: &str) -> Vec<usize> {
    match tag {
        "duality" | "weak-chain" => vec![2, 2, 2, 2],
        "halpha-cq" | "dfm-bracket" | "approx-faithful" => vec![2, 2],
        _ => vec![2, 2, 2],
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub tag: String,
    pub dims: Option<Vec<usize>>,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    /// Worker threads; `None` reads `RECOVERLIB_THREADS`.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub digest: String,
    pub values: BTreeMap<String, f64>,
    /// Nonnegative when the inequality holds.
    pub margin: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub tag: String,
    pub seed: u64,
    pub samples: usize,
    pub dims: Vec<usize>,
    pub tol: f64,
    pub min_margin: Option<f64>,
    pub violations: usize,
    pub failures: usize,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub records: Vec<SampleRecord>,
    pub aggregate: Aggregate,
}

impl SweepReport {
    /// One line per sample followed by the aggregate line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&serde_json::json!({ "aggregate": self.aggregate })).expect("aggregate"));
        out.push('\n');
        out
    }

    pub fn margins(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter_map(|r| r.margin)
    }
}

/// Thread count from `RECOVERLIB_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("RECOVERLIB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

struct Sample {
    state: MultipartiteState,
    values: BTreeMap<String, f64>,
    margin: f64,
}

fn letters(n: usize) -> Vec<&'static str> {
    ["A", "B", "C", "D", "E", "F"][..n].to_vec()
}

fn random_mixed(dims: &[usize], rng: &mut StreamRng) -> Result<MultipartiteState> {
    let n: usize = dims.iter().product();
    let rank = 1 + rng.index(n);
    Ok(random_density(dims, &letters(dims.len()), rank, rng)?)
}

fn convex_for(s: &MultipartiteState, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    Ok(fidelity_of_recovery(s, a, b, c, Backend::Convex, SEESAW_TOL)?.value)
}

fn need(dims: &[usize], n: usize, tag: &str) -> Result<()> {
    if dims.len() != n {
        bail!("{tag} needs {n} dimensions, got {dims:?}");
    }
    if dims.contains(&0) {
        bail!("dimensions must be positive");
    }
    Ok(())
}

/// `Σ_x p(x) |x⟩⟨x| ⊗ ρ_B^x` blended with white noise of weight `noise`.
pub fn near_cq(dims: &[usize], noise: f64, rng: &mut StreamRng) -> Result<MultipartiteState> {
    let cq = cq_state(dims[0], dims[1], rng)?;
    let n = cq.dim();
    let m = cq.matrix() * linalg::r(1.0 - noise) + linalg::identity(n) * linalg::r(noise / n as f64);
    Ok(MultipartiteState::from_strs(dims, &["A", "B"], m)?)
}

fn run_one(tag: &str, dims: &[usize], rng: &mut StreamRng) -> Result<Sample> {
    let mut values = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        values.insert(k.to_string(), v);
    };
    let (state, margin) = match tag {
        "fr-inequality" => {
            need(dims, 3, tag)?;
            let s = random_mixed(dims, rng)?;
            let i = cqmi(&s, &["A"], &["B"], &["C"])?;
            let f = convex_for(&s, &["A"], &["B"], &["C"])?;
            put("cqmi", i);
            put("fidelity_of_recovery", f);
            put("surprisal", -f.log2());
            (s, i + f.log2())
        }
        "duality" => {
            need(dims, 4, tag)?;
            let s = MultipartiteState::from_pure(&random_pure(dims, &letters(4), rng)?);
            let fc = convex_for(&s.partial_trace(&["A", "B", "C"])?, &["A"], &["B"], &["C"])?;
            let fd = convex_for(&s.partial_trace(&["A", "B", "D"])?, &["A"], &["B"], &["D"])?;
            put("f_given_c", fc);
            put("f_given_d", fd);
            (s, -(fc - fd).abs())
        }
        "weak-chain" => {
            need(dims, 4, tag)?;
            let rank = 1 + rng.index(3);
            let s = random_density(dims, &letters(4), rank, rng)?;
            let lhs = convex_for(&s, &["A", "C"], &["B"], &["D"])?;
            let rhs = convex_for(&s, &["A"], &["B"], &["C", "D"])?;
            put("f_ac_b_given_d", lhs);
            put("f_a_b_given_cd", rhs);
            (s, rhs - lhs)
        }
        "renyi-mono" => {
            need(dims, 3, tag)?;
            let s = random_mixed(dims, rng)?;
            let i = cqmi(&s, &["A"], &["B"], &["C"])?;
            let r = renyi_cqmi(&s, &["A"], &["B"], &["C"], 0.5)?;
            put("cqmi", i);
            put("renyi_half", r.value);
            put("pseudo_inverse_used", f64::from(u8::from(r.pseudo_inverse_used)));
            (s, i - r.value)
        }
        "ssa" => {
            need(dims, 3, tag)?;
            let s = random_mixed(dims, rng)?;
            let i = cqmi(&s, &["A"], &["B"], &["C"])?;
            put("cqmi", i);
            (s, i)
        }
        "petz-dominance" => {
            need(dims, 3, tag)?;
            let s = random_mixed(dims, rng)?;
            let (a, b, c) = (["A"], ["B"], ["C"]);
            let petz = fidelity_of_recovery(&s, &a, &b, &c, Backend::Petz, SEESAW_TOL)?.value;
            let seesaw = fidelity_of_recovery(&s, &a, &b, &c, Backend::Seesaw, SEESAW_TOL)?.value;
            let convex = fidelity_of_recovery(&s, &a, &b, &c, Backend::Convex, SEESAW_TOL)?;
            put("petz", petz);
            put("seesaw", seesaw);
            put("convex", convex.value);
            put("convex_residual", convex.residuals.max());
            (s, (seesaw - petz).min(convex.value - seesaw))
        }
        "classical-cond" => {
            need(dims, 3, tag)?;
            let p = rng.simplex(2);
            let n: usize = dims.iter().product();
            let mut m = CMat::zeros(2 * n, 2 * n);
            let mut rhs = 0.0;
            for (x, &px) in p.iter().enumerate() {
                let w = random_mixed(dims, rng)?;
                rhs += px * convex_for(&w, &["A"], &["B"], &["C"])?.sqrt();
                m += linalg::kron(w.matrix(), &flag(2, x)) * linalg::r(px);
            }
            let mut full = dims.to_vec();
            full.push(2);
            let s = MultipartiteState::from_strs(&full, &["A", "B", "C", "X"], m)?;
            let lhs = convex_for(&s, &["A"], &["B"], &["C", "X"])?.sqrt();
            put("root_f_conditioned", lhs);
            put("average_root_f", rhs);
            (s, lhs - rhs)
        }
        "halpha-cq" => {
            need(dims, 2, tag)?;
            let s = cq_state(dims[0], dims[1], rng)?;
            let mut least = f64::INFINITY;
            for alpha in HALPHA_GRID {
                let h = conditional_renyi_entropy(&s, &["X"], &["B"], alpha)?.as_f64();
                put(&format!("h_{alpha}"), h);
                least = least.min(h);
            }
            (s, least)
        }
        "dfm-bracket" => {
            need(dims, 2, tag)?;
            let s = random_mixed(dims, rng)?;
            let seesaw = dfm(&s, &["A"], &["B"], DfmBackend::Seesaw, 1e-9, rng)?;
            let ppt = dfm(&s, &["A"], &["B"], DfmBackend::PptRelax, 1e-9, rng)?;
            let deph = dephasing_channel(dims[0], None)?.apply(&s, &["A"])?;
            let f_deph = fidelity(s.matrix(), deph.matrix())?;
            put("seesaw_f", seesaw.f_value);
            put("ppt_f", ppt.f_value);
            put("dephasing_f", f_deph);
            put("seesaw_d", seesaw.d_value);
            put("ppt_exact", f64::from(u8::from(ppt.bound.tag() == "exact-within-tol")));
            let agree = -(seesaw.f_value - ppt.f_value).abs();
            let feasible = seesaw.f_value - f_deph;
            let dim_bound = (dims[0] as f64).log2() - seesaw.d_value;
            (s, agree.min(feasible).min(dim_bound))
        }
        "approx-faithful" => {
            need(dims, 2, tag)?;
            let noise = 10f64.powf(rng.uniform_range(-4.0, -2.0));
            let s = near_cq(dims, noise, rng)?;
            let w = approx_fixed_point_witness(&s, &["A"], &["B"], f64::INFINITY, rng)?;
            let chain = 2.0 * (w.d_value * std::f64::consts::LN_2).sqrt() - w.trace_dist;
            let bound = discord_upper_from_fixed_point(&s, &["A"], &["B"], &w.channel)?;
            let d = discord(&s, &["A"], &["B"], rng)?;
            put("noise", noise);
            put("d_f", w.d_value);
            put("trace_dist", w.trace_dist);
            put("discord", d.value);
            put("discord_bound", bound.bound);
            (s, chain.min(bound.bound - d.value))
        }
        other => bail!("unknown sweep tag `{other}`; expected one of {}", TAGS.join(", ")),
    };
    Ok(Sample { state, values, margin })
}

fn flag(d: usize, x: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(x, x)] = linalg::ONE;
    m
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if !TAGS.contains(&cfg.tag.as_str()) {
        bail!("unknown sweep tag `{}`; expected one of {}", cfg.tag, TAGS.join(", "));
    }
    if cfg.samples == 0 {
        bail!("samples must be at least 1");
    }
    let dims = cfg.dims.clone().unwrap_or_else(|| default_dims(&cfg.tag));
    let tol = cfg.tol.unwrap_or_else(|| default_tol(&cfg.tag));
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads.or_else(env_threads) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let records: Vec<SampleRecord> = pool.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|index| {
                let mut rng = StreamRng::new(cfg.seed, index as u64);
                match run_one(&cfg.tag, &dims, &mut rng) {
                    Ok(s) => SampleRecord {
                        index,
                        digest: digest_matrices(&[s.state.matrix()]),
                        values: s.values,
                        margin: Some(s.margin),
                        error: None,
                    },
                    Err(e) => SampleRecord { index, digest: String::new(), values: BTreeMap::new(), margin: None, error: Some(format!("{e:#}")) },
                }
            })
            .collect()
    });
    let min_margin = records.iter().filter_map(|r| r.margin).reduce(f64::min);
    let violations = records.iter().filter(|r| r.margin.is_some_and(|m| m < -tol)).count();
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    let aggregate = Aggregate {
        tag: cfg.tag.clone(),
        seed: cfg.seed,
        samples: cfg.samples,
        dims,
        tol,
        min_margin,
        violations,
        failures,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok(SweepReport { records, aggregate })
}
