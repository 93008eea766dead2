//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use recoverlib::channels::{Isometry, QuantumChannel};
use recoverlib::infoquant::{cqmi, fidelity, renyi_cqmi, sandwiched_renyi, state_fidelity};
use recoverlib::linalg::{self, CMat, CVec};
use recoverlib::qcore::{classical_copy, maximally_entangled, random_density, random_isometry, MultipartiteState, PureStateVector};
use recoverlib::recopt::{fidelity_of_recovery, Backend, SEESAW_TOL};
use recoverlib::squash::{private_state_fidelity_cap, purification_dim, separable_witness_extension};
use recoverlib::StreamRng;
use recoverlib_cli::compute::{compute, ComputeOptions};
use recoverlib_cli::make::{make_state, markov_chain, private, MakeParams};
use recoverlib_cli::sweep::{run_sweep, SweepConfig, SweepReport};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sweep(tag: &str, samples: usize, seed: u64, dims: Option<Vec<usize>>) -> Result<SweepReport, String> {
    run_sweep(&SweepConfig { tag: tag.into(), dims, samples, seed, tol: None, threads: None }).map_err(|e| format!("{e:#}"))
}

fn value(r: &SweepReport, i: usize, key: &str) -> f64 {
    r.records[i].values[key]
}

fn no_failures(r: &SweepReport) -> Result<(), String> {
    let a = &r.aggregate;
    ensure(a.failures == 0, || format!("{}: {} samples failed", a.tag, a.failures))?;
    ensure(a.violations == 0, || format!("{}: {} violations, min margin {:?}", a.tag, a.violations, a.min_margin))
}

fn within_time(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("{what} took {t:.1?}, limit {limit:?}"))
}

fn record(cmd: &str, s: &MultipartiteState, o: &ComputeOptions) -> Result<f64, String> {
    let start = Instant::now();
    let r = compute(cmd, s, o, &[]).map_err(|e| format!("{cmd}: {e:#}"))?;
    within_time(start, Duration::from_secs(5), cmd)?;
    Ok(r["value"].as_f64().expect("numeric value"))
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got}, expected {want} ± {tol:e}"))
}

fn schmidt(p: f64) -> MultipartiteState {
    let v = CVec::from_vec(vec![linalg::r(p.sqrt()), linalg::ZERO, linalg::ZERO, linalg::r((1.0 - p).sqrt())]);
    MultipartiteState::from_pure(&PureStateVector::from_strs(&[2, 2], &["A", "B"], v).unwrap())
}

fn closed_forms() -> Check {
    let mut rng = StreamRng::new(1, 0);
    let abc = ComputeOptions::default();
    let sigma = random_density(&[2], &["C"], 2, &mut rng).unwrap();
    let phi = maximally_entangled(2, ["A", "B"]).unwrap().tensor(&sigma).unwrap();
    close(record("for", &phi, &abc)?, 0.25, 1e-5, "F on Φ⊗σ")?;
    close(record("ifr", &phi, &abc)?, 2.0, 1e-5, "I_F on Φ⊗σ")?;
    let copy = classical_copy(2, ["A", "B"]).unwrap().tensor(&sigma).unwrap();
    close(record("for", &copy, &abc)?, 0.5, 1e-5, "F on Φ̄⊗σ")?;
    for _ in 0..3 {
        let mc = markov_chain(2, 2, 2, &mut rng).unwrap();
        close(record("for", &mc, &abc)?, 1.0, 1e-5, "F on Markov chain")?;
    }
    let bell = make_state("bell", &MakeParams::default(), &mut rng).unwrap();
    close(record("gse-pure", &bell, &abc)?, 1.0, 1e-5, "E_F^sq(Bell)")?;
    let s75 = schmidt(0.75);
    let g = record("gse-pure", &s75, &abc)?;
    close(g, 0.415, 1e-3, "E_F^sq(Schmidt 0.75)")?;
    close(g, -(0.75f64).log2(), 1e-5, "E_F^sq(Schmidt 0.75) vs top Schmidt weight")?;
    let dfm_opts = ComputeOptions { backend: Some("ppt-relax".into()), ..Default::default() };
    close(record("dfm", &bell, &dfm_opts)?, 1.0, 1e-5, "D_F(Bell)")?;
    let d = record("dfm", &s75, &dfm_opts)?;
    close(d, 0.678, 1e-3, "D_F(Schmidt 0.75)")?;
    close(d, -(0.75f64.powi(2) + 0.25f64.powi(2)).log2(), 1e-5, "D_F(Schmidt 0.75) vs purity")?;
    let cq = make_state("cq", &MakeParams::default(), &mut rng).unwrap();
    let cq_opts = ComputeOptions { a: vec!["X".into()], ..dfm_opts };
    close(record("dfm", &cq, &cq_opts)?, 0.0, 1e-5, "D_F(cq)")?;
    Ok("Φ⊗σ, Φ̄⊗σ, Markov chains, Bell, Schmidt 0.75, cq".into())
}

fn fr_sweep() -> Check {
    let start = Instant::now();
    let r = sweep("fr-inequality", 200, 2, None)?;
    no_failures(&r)?;
    within_time(start, Duration::from_secs(600), "fr sweep")?;
    Ok(format!("200 samples, min margin {:.3e}, {:.1?}", r.aggregate.min_margin.unwrap(), start.elapsed()))
}

fn duality() -> Check {
    let start = Instant::now();
    let r = sweep("duality", 30, 3, None)?;
    no_failures(&r)?;
    within_time(start, Duration::from_secs(300), "duality sweep")?;
    let worst = r.margins().fold(0.0f64, |m, x| m.max(-x));
    ensure(worst <= 5e-6, || format!("max gap {worst:e}"))?;
    Ok(format!("30 samples, max |gap| {worst:.3e}"))
}

fn sandwich() -> Check {
    let r = sweep("petz-dominance", 40, 4, None)?;
    ensure(r.aggregate.failures == 0, || "solver failures".into())?;
    let mut worst_res = 0.0f64;
    for i in 0..r.records.len() {
        let (p, s, c) = (value(&r, i, "petz"), value(&r, i, "seesaw"), value(&r, i, "convex"));
        ensure(p <= s + 1e-7 && s <= c + 1e-7, || format!("sample {i}: petz {p}, seesaw {s}, convex {c}"))?;
        worst_res = worst_res.max(value(&r, i, "convex_residual"));
    }
    ensure(worst_res <= 1e-6, || format!("convex residual {worst_res:e}"))?;
    Ok(format!("40 samples, worst convex residual {worst_res:.2e}"))
}

fn abc(rng: &mut StreamRng) -> MultipartiteState {
    let rank = 1 + rng.index(8);
    random_density(&[2, 2, 2], &["A", "B", "C"], rank, rng).unwrap()
}

fn for_convex(s: &MultipartiteState) -> f64 {
    fidelity_of_recovery(s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap().value
}

fn property_suites() -> Check {
    let mut rng = StreamRng::new(5, 0);
    for i in 0..30 {
        let s = abc(&mut rng);
        let n = QuantumChannel::random(&[2], &[2], 1 + rng.index(4), &mut rng);
        let m = QuantumChannel::random(&[2], &[2], 1 + rng.index(4), &mut rng);
        let t = m.apply(&n.apply(&s, &["A"]).unwrap(), &["B"]).unwrap();
        let (f, g) = (for_convex(&s), for_convex(&t));
        ensure(g >= f - 2e-6, || format!("monotonicity draw {i}: {g} < {f}"))?;
    }
    for i in 0..30 {
        let s = abc(&mut rng);
        let mut t = s.clone();
        for label in ["A", "B", "C"] {
            let v = Isometry::new(random_isometry(3, 2, &mut rng), vec![2], vec![3]).unwrap();
            t = v.channel().apply(&t, &[label]).unwrap();
        }
        let (f, g) = (for_convex(&s), for_convex(&t));
        ensure((f - g).abs() <= 2e-6, || format!("isometric invariance draw {i}: {f} vs {g}"))?;
    }
    for i in 0..30 {
        let rho = abc(&mut rng);
        let tau = random_density(&[2, 2, 2], &["A", "B", "C"], 8, &mut rng).unwrap();
        let delta = [1e-4, 1e-3, 1e-2][i % 3];
        let m = rho.matrix() * linalg::r(1.0 - delta) + tau.matrix() * linalg::r(delta);
        let sigma = MultipartiteState::from_strs(&[2, 2, 2], &["A", "B", "C"], m).unwrap();
        let eps = (1.0 - state_fidelity(&rho, &sigma).unwrap()).max(0.0);
        let (f, g) = (for_convex(&rho), for_convex(&sigma));
        ensure((f - g).abs() <= 8.0 * eps.sqrt() + 1e-6, || format!("continuity draw {i}: {f} vs {g}, ε = {eps:e}"))?;
    }
    no_failures(&sweep("weak-chain", 30, 5, None)?)?;
    no_failures(&sweep("classical-cond", 30, 5, None)?)?;
    Ok("monotonicity, isometric invariance, continuity, weak chain, classical conditioning: 30 draws each".into())
}

fn renyi_suite() -> Check {
    let mut rng = StreamRng::new(6, 0);
    let grid = [0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.0];
    for i in 0..50 {
        let rho = random_density(&[2, 2], &["A", "B"], 1 + rng.index(4), &mut rng).unwrap();
        let sigma = random_density(&[2, 2], &["A", "B"], 4, &mut rng).unwrap();
        let vals: Vec<f64> = grid.iter().map(|&a| sandwiched_renyi(rho.matrix(), sigma.matrix(), a).unwrap().as_f64()).collect();
        ensure(vals.windows(2).all(|w| w[1] >= w[0] - 1e-7), || format!("sandwiched draw {i} not monotone: {vals:?}"))?;
    }
    let r = sweep("renyi-mono", 200, 6, None)?;
    no_failures(&r)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random_density(&[2, 2, 2], &["A", "B", "C"], 8, &mut rng).unwrap();
        let i = cqmi(&s, &["A"], &["B"], &["C"]).unwrap();
        let lo = renyi_cqmi(&s, &["A"], &["B"], &["C"], 1.0 - 1e-4).unwrap().value;
        let hi = renyi_cqmi(&s, &["A"], &["B"], &["C"], 1.0 + 1e-4).unwrap().value;
        worst = worst.max((lo - i).abs()).max((hi - i).abs());
    }
    ensure(worst <= 1e-3, || format!("α→1 deviation {worst:e}"))?;
    no_failures(&sweep("halpha-cq", 100, 6, None)?)?;
    Ok(format!(
        "α grid monotone on 50 pairs; Ĩ_1/2 ≤ I on 200 (min margin {:.3e}); α→1 within {worst:.1e}; H_α(X|B) ≥ 0 on 100",
        r.aggregate.min_margin.unwrap()
    ))
}

fn dfm_bracket() -> Check {
    let r = sweep("dfm-bracket", 50, 7, None)?;
    ensure(r.aggregate.failures == 0, || "solver failures".into())?;
    let mut worst = 0.0f64;
    for i in 0..r.records.len() {
        let (s, p, deph, d) = (value(&r, i, "seesaw_f"), value(&r, i, "ppt_f"), value(&r, i, "dephasing_f"), value(&r, i, "seesaw_d"));
        worst = worst.max((s - p).abs());
        ensure((s - p).abs() <= 1e-5, || format!("sample {i}: seesaw {s} vs ppt {p}"))?;
        ensure(s >= deph - 1e-7, || format!("sample {i}: {s} below dephasing {deph}"))?;
        ensure(d <= 1.0 + 1e-5, || format!("sample {i}: D_F = {d}"))?;
    }
    Ok(format!("50 qubit-A states, max |seesaw - ppt| {worst:.2e}"))
}

fn approx_faithful() -> Check {
    let r = sweep("approx-faithful", 20, 8, None)?;
    ensure(r.aggregate.failures == 0, || "solver failures".into())?;
    for i in 0..r.records.len() {
        let (d, dist) = (value(&r, i, "d_f"), value(&r, i, "trace_dist"));
        let chain = 2.0 * (d * std::f64::consts::LN_2).sqrt();
        ensure(dist <= chain + 1e-5, || format!("sample {i}: ‖ρ - E(ρ)‖₁ = {dist} > {chain}"))?;
        let (disc, bound) = (value(&r, i, "discord"), value(&r, i, "discord_bound"));
        ensure(disc <= bound + 1e-4, || format!("sample {i}: discord {disc} > {bound}"))?;
    }
    Ok("20 near-cq states".into())
}

fn private_cap() -> Check {
    let mut rng = StreamRng::new(9, 0);
    let mut worst = 0.0f64;
    for twisting in ["none", "swap", "random", "random"] {
        let gamma = private(2, twisting, &mut rng).map_err(|e| format!("{e:#}"))?;
        let r = purification_dim(&gamma, &["A", "A'"], &["B", "B'"]).unwrap();
        for _ in 0..5 {
            let de = 1 + rng.index(3);
            let squash = QuantumChannel::random(&[r], &[de], 1 + rng.index(3), &mut rng);
            let f = private_state_fidelity_cap(&gamma, ["A", "B", "A'", "B'"], &squash).map_err(|e| format!("{e:#}"))?;
            worst = worst.max(f);
            ensure(f <= 0.25 + 1e-5, || format!("{twisting} twisting: F = {f}"))?;
        }
    }
    Ok(format!("4 private states × 5 extensions, max F {worst:.6}"))
}

fn unit_qubit(rng: &mut StreamRng) -> CVec {
    let g = rng.ginibre(2, 1);
    let v: CVec = g.column(0).into_owned();
    let n = v.norm();
    v / linalg::r(n)
}

fn separable_witnesses() -> Check {
    let mut rng = StreamRng::new(10, 0);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let k = 1 + rng.index(4);
        let p = rng.simplex(k);
        let terms: Vec<(f64, CVec, CVec)> = p.iter().map(|&w| (w, unit_qubit(&mut rng), unit_qubit(&mut rng))).collect();
        let (omega, recovery) = separable_witness_extension(&terms).map_err(|e| format!("{e:#}"))?;
        let target: CMat = terms.iter().fold(CMat::zeros(4, 4), |acc, (w, a, b)| {
            acc + linalg::kron(&linalg::outer(a, a), &linalg::outer(b, b)) * linalg::r(*w)
        });
        let marginal = omega.partial_trace(&["A", "B"]).unwrap();
        ensure((marginal.matrix() - &target).norm() <= 1e-9, || format!("draw {i}: extension marginal differs"))?;
        let rebuilt = recovery.apply_relabel(&omega.partial_trace(&["B", "E"]).unwrap(), &["E"], &["A", "E"]).unwrap();
        let rebuilt = rebuilt.permute(&["A", "B", "E"]).unwrap();
        let f_witness = fidelity(omega.matrix(), rebuilt.matrix()).unwrap();
        let f_opt = fidelity_of_recovery(&omega, &["A"], &["B"], &["E"], Backend::Convex, SEESAW_TOL).unwrap().value;
        let f = f_witness.max(f_opt);
        let e = -0.5 * f.log2();
        worst = worst.max(e);
        ensure(f_witness >= 1.0 - 1e-5, || format!("draw {i}: witness fidelity {f_witness}"))?;
        ensure(e <= 1e-5, || format!("draw {i}: E bound {e}"))?;
    }
    Ok(format!("20 separable states, max E bound {worst:.2e} bits"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("closed-form values", closed_forms),
        ("recoverability below CQMI, 200 states", fr_sweep),
        ("duality, 30 pure states", duality),
        ("backend ordering and convex residuals", sandwich),
        ("recoverability property suites", property_suites),
        ("Rényi suite", renyi_suite),
        ("measurement recoverability brackets", dfm_bracket),
        ("approximate faithfulness", approx_faithful),
        ("private-state cap", private_cap),
        ("separable witnesses", separable_witnesses),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{t:.1} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{t:.1} s]", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed in {:.1} s", 10 - failed, total.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
