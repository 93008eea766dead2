//! Single-quantity commands producing one JSON record each.

use std::time::Instant;

use anyhow::{bail, Result};
use recoverlib::infoquant::{cqmi, renyi_cqmi};
use recoverlib::measrec::{dfm, dfm_pure, discord, DfmBackend};
use recoverlib::qcore::MultipartiteState;
use recoverlib::recopt::{fidelity_of_recovery, multipartite_for, surprisal_of_recovery, Backend, MultipartiteOptions, OptResult, Residuals, SEESAW_TOL};
use recoverlib::squash::{gse_heuristic, gse_pure, GseOptions, GseResult};
use recoverlib::StreamRng;
use serde_json::{json, Value};

pub const COMMANDS: &[&str] = &["for", "ifr", "cqmi", "renyi-cqmi", "gse", "gse-pure", "dfm", "dfm-pure", "discord", "mfor"];

#[derive(Debug, Clone)]
pub struct ComputeOptions {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    /// Parties for `mfor`.
    pub parts: Vec<Vec<String>>,
    pub backend: Option<String>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub env_dim: Option<usize>,
    pub restarts: Option<usize>,
    pub alpha: f64,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        ComputeOptions {
            a: vec!["A".into()],
            b: vec!["B".into()],
            c: vec!["C".into()],
            parts: Vec::new(),
            backend: None,
            tol: None,
            seed: 0,
            env_dim: None,
            restarts: None,
            alpha: 0.5,
        }
    }
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn residuals(r: &Residuals) -> Value {
    json!({ "primal": r.primal, "dual": r.dual, "gap": r.gap })
}

struct Outcome {
    value: f64,
    bound: String,
    backend: String,
    residuals: Value,
    iterations: usize,
    extra: Value,
}

fn from_opt(r: OptResult) -> Outcome {
    Outcome {
        value: r.value,
        bound: r.bound.tag().into(),
        backend: r.backend.into(),
        residuals: residuals(&r.residuals),
        iterations: r.iterations,
        extra: Value::Null,
    }
}

fn from_gse(r: GseResult) -> Outcome {
    Outcome {
        value: r.e_value,
        bound: r.bound.tag().into(),
        backend: "heuristic".into(),
        residuals: Value::Null,
        iterations: 0,
        extra: json!({ "f_sq": r.f_sq_value, "env_dim": r.env_dim, "restarts": r.restarts }),
    }
}

fn exact(value: f64, backend: &str) -> Outcome {
    Outcome { value, bound: "exact".into(), backend: backend.into(), residuals: Value::Null, iterations: 0, extra: Value::Null }
}

/// Runs `command` and returns the report record.
pub fn compute(command: &str, state: &MultipartiteState, o: &ComputeOptions, warnings: &[String]) -> Result<Value> {
    let start = Instant::now();
    let (a, b, c) = (strs(&o.a), strs(&o.b), strs(&o.c));
    let recovery_backend = || -> Result<Backend> { Ok(o.backend.as_deref().unwrap_or("convex").parse()?) };
    let tol = o.tol.unwrap_or(SEESAW_TOL);
    let mut rng = StreamRng::new(o.seed, 0);
    let out = match command {
        "for" => from_opt(fidelity_of_recovery(state, &a, &b, &c, recovery_backend()?, tol)?),
        "ifr" => from_opt(surprisal_of_recovery(state, &a, &b, &c, recovery_backend()?, tol)?),
        "cqmi" => exact(cqmi(state, &a, &b, &c)?, "spectral"),
        "renyi-cqmi" => {
            let r = renyi_cqmi(state, &a, &b, &c, o.alpha)?;
            let mut out = exact(r.value, "spectral");
            out.extra = json!({ "alpha": o.alpha, "pseudo_inverse_used": r.pseudo_inverse_used });
            out
        }
        "gse" => {
            let mut opts = GseOptions { env_dim: o.env_dim, seed: o.seed, ..Default::default() };
            if let Some(r) = o.restarts {
                opts.restarts = r;
            }
            if let Some(t) = o.tol {
                opts.tol = t;
            }
            from_gse(gse_heuristic(state, &a, &b, &opts)?)
        }
        "gse-pure" => from_gse(gse_pure(state, &a, &b)?),
        "dfm" => {
            let backend: DfmBackend = o.backend.as_deref().unwrap_or("seesaw").parse()?;
            let r = dfm(state, &a, &b, backend, o.tol.unwrap_or(1e-9), &mut rng)?;
            Outcome {
                value: r.d_value,
                bound: r.bound.tag().into(),
                backend: r.backend.into(),
                residuals: residuals(&r.diagnostics.residuals),
                iterations: r.diagnostics.iterations,
                extra: json!({ "f_value": r.f_value, "relaxation_value": r.diagnostics.relaxation_value }),
            }
        }
        "dfm-pure" => {
            let r = dfm_pure(state, &a, &b)?;
            let mut out = exact(r.d_value, r.backend);
            out.extra = json!({ "f_value": r.f_value });
            out
        }
        "discord" => {
            let r = discord(state, &a, &b, &mut rng)?;
            Outcome {
                value: r.value,
                bound: "upper-bound".into(),
                backend: "rank-one-ascent".into(),
                residuals: Value::Null,
                iterations: 0,
                extra: json!({
                    "mutual_information": r.mutual_information,
                    "classical_information": r.classical_information,
                    "outcomes": r.povm.len(),
                }),
            }
        }
        "mfor" => {
            if o.parts.len() < 2 {
                bail!("mfor needs at least two parties (--parts A1,A2;A3)");
            }
            let parts: Vec<Vec<&str>> = o.parts.iter().map(|p| strs(p)).collect();
            let refs: Vec<&[&str]> = parts.iter().map(Vec::as_slice).collect();
            let mut opts = MultipartiteOptions { seed: o.seed, ..Default::default() };
            if let Some(r) = o.restarts {
                opts.restarts = r;
            }
            if let Some(t) = o.tol {
                opts.tol = t;
            }
            from_opt(multipartite_for(state, &refs, &c, &opts)?)
        }
        other => bail!("unknown command `{other}`; expected one of {}", COMMANDS.join(", ")),
    };
    Ok(json!({
        "command": command,
        "value": out.value,
        "bound": out.bound,
        "backend": out.backend,
        "residuals": out.residuals,
        "iterations": out.iterations,
        "runtime_s": start.elapsed().as_secs_f64(),
        "warnings": warnings,
        "extra": out.extra,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use recoverlib::qcore::maximally_entangled;

    #[test]
    fn records_carry_value_and_bound() {
        let bell = maximally_entangled(2, ["A", "B"]).unwrap();
        let r = compute("gse-pure", &bell, &ComputeOptions::default(), &[]).unwrap();
        assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r["bound"], "exact");
        let o = ComputeOptions { c: vec![], ..Default::default() };
        let r = compute("cqmi", &bell, &o, &[]).unwrap();
        assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
        assert!(compute("bogus", &bell, &o, &[]).is_err());
    }
}
