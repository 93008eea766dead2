use super::*;
use crate::infoquant::{cqmi, fidelity};
use crate::qcore::{classical_copy, ghz, maximally_entangled, random_density, random_pure, single};
use crate::rng::StreamRng;

fn bell_sigma() -> MultipartiteState {
    let sigma = CMat::from_fn(2, 2, |i, j| linalg::r(if i == j { 0.5 + 0.2 * (i as f64) - 0.1 } else { 0.1 }));
    maximally_entangled(2, ["A", "B"]).unwrap().tensor(&single("C", sigma).unwrap()).unwrap()
}

fn markov_chain(rng: &mut StreamRng) -> MultipartiteState {
    // Σ_x p(x) ρ_A^x ⊗ ρ_B^x ⊗ |x⟩⟨x|_C
    let p = rng.simplex(2);
    let mut m = CMat::zeros(8, 8);
    for (x, px) in p.iter().enumerate() {
        let ra = random_density(&[2], &["A"], 2, rng).unwrap();
        let rb = random_density(&[2], &["B"], 2, rng).unwrap();
        let rc = MultipartiteState::basis_state(&[2], &["C"], x).unwrap();
        let t = ra.tensor(&rb).unwrap().tensor(&rc).unwrap();
        m += t.matrix() * linalg::r(*px);
    }
    MultipartiteState::from_strs(&[2, 2, 2], &["A", "B", "C"], m).unwrap()
}

const ALL: [Backend; 3] = [Backend::Petz, Backend::Seesaw, Backend::Convex];

#[test]
fn markov_chain_is_recoverable() {
    let mut rng = StreamRng::new(11, 0);
    let s = markov_chain(&mut rng);
    assert!(cqmi(&s, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-7);
    for b in ALL {
        let r = fidelity_of_recovery(&s, &["A"], &["B"], &["C"], b, SEESAW_TOL).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{b}: {}", r.value);
    }
    let i = surprisal_of_recovery(&s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!(i.value.abs() < 1e-5);
}

#[test]
fn maximally_entangled_saturates_dimension_bound() {
    let s = bell_sigma();
    let r = fidelity_of_recovery(&s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((r.value - 0.25).abs() < 1e-6, "{}", r.value);
    assert_eq!(r.bound, BoundKind::ExactWithinTol);
    let i = surprisal_of_recovery(&s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((i.value - 2.0).abs() < 1e-5);
    assert_eq!(i.bound, BoundKind::ExactWithinTol);
}

#[test]
fn classical_copy_gives_inverse_dimension() {
    let sigma = CMat::from_fn(2, 2, |i, j| linalg::r(if i == j { 0.5 } else { 0.2 }));
    let s = classical_copy(2, ["X", "B"]).unwrap().tensor(&single("C", sigma).unwrap()).unwrap();
    let r = fidelity_of_recovery(&s, &["X"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((r.value - 0.5).abs() < 1e-6, "{}", r.value);
}

#[test]
fn backends_are_ordered_and_certificates_reevaluate() {
    let mut rng = StreamRng::new(12, 0);
    for _ in 0..4 {
        let s = random_density(&[2, 2, 2], &["A", "B", "C"], 8, &mut rng).unwrap();
        let vals: Vec<OptResult> =
            ALL.iter().map(|&b| fidelity_of_recovery(&s, &["A"], &["B"], &["C"], b, SEESAW_TOL).unwrap()).collect();
        assert!(vals[0].value <= vals[1].value + 1e-7);
        assert!(vals[1].value <= vals[2].value + 1e-7, "{} > {}", vals[1].value, vals[2].value);
        assert!(vals[2].value >= 0.25 - 1e-7 && vals[2].value <= 1.0 + 1e-7);
        assert!(vals[2].residuals.max() <= 1e-6);
        for r in &vals {
            let Some(Certificate::Channel(ch)) = &r.certificate else { panic!() };
            let t = Tripartite::new(&s, &["A"], &["B"], &["C"]).unwrap();
            assert!((t.fidelity_with(ch.choi()) - r.value).abs() < 1e-6);
            assert!(ch.tp_defect() < 1e-8);
        }
    }
}

#[test]
fn product_conditioning_matches_fidelity_ab() {
    let mut rng = StreamRng::new(13, 0);
    let sab = random_density(&[2, 2], &["A", "B"], 3, &mut rng).unwrap();
    let omega = random_density(&[2], &["C"], 2, &mut rng).unwrap();
    let s = sab.tensor(&omega).unwrap();
    let f = fidelity_of_recovery(&s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    let g = fidelity_ab(&sab, &["A"], &["B"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((f.value - g.value).abs() < 2e-6, "{} vs {}", f.value, g.value);
    let Some(Certificate::State(tau)) = &g.certificate else { panic!() };
    let sb = sab.partial_trace(&["B"]).unwrap();
    let achieved = fidelity(sab.matrix(), &linalg::kron(tau, sb.matrix())).unwrap();
    assert!((achieved - g.value).abs() < 1e-6);
}

#[test]
fn fidelity_ab_examples() {
    let mut rng = StreamRng::new(14, 0);
    let pa = random_density(&[2], &["A"], 2, &mut rng).unwrap();
    let pb = random_density(&[3], &["B"], 2, &mut rng).unwrap();
    let r = fidelity_ab(&pa.tensor(&pb).unwrap(), &["A"], &["B"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6);

    let phi = maximally_entangled(2, ["A", "B"]).unwrap();
    let r = fidelity_ab(&phi, &["A"], &["B"], Backend::Convex, SEESAW_TOL).unwrap();
    // brute force over a grid of qubit states τ: F(Φ, τ ⊗ π) = Tr(τ²)/4... maximized by pure τ
    let pi = linalg::identity(2) / linalg::r(2.0);
    let mut best: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..=20 {
            let th = std::f64::consts::PI * i as f64 / 20.0;
            let ph = 2.0 * std::f64::consts::PI * j as f64 / 20.0;
            let v = nalgebra::DVector::from_vec(vec![linalg::r((th / 2.0).cos()), linalg::c(0.0, ph).exp() * (th / 2.0).sin()]);
            let tau = &v * v.adjoint();
            best = best.max(fidelity(phi.matrix(), &linalg::kron(&tau, &pi)).unwrap());
        }
    }
    assert!((best - 0.25).abs() < 1e-9);
    assert!((r.value - best).abs() < 1e-6);

    let psi = random_pure(&[2, 3], &["A", "B"], &mut rng).unwrap();
    let rho = MultipartiteState::from_pure(&psi);
    let r = fidelity_ab(&rho, &["A"], &["B"], Backend::Convex, SEESAW_TOL).unwrap();
    let top = rho.partial_trace(&["A"]).unwrap().eigenvalues()[0];
    assert!((r.value - top * top).abs() < 1e-6, "{} vs {}", r.value, top * top);
}

#[test]
fn multipartite_reduces_to_bipartite() {
    let mut rng = StreamRng::new(15, 0);
    let s = random_density(&[2, 2, 2], &["A", "B", "C"], 4, &mut rng).unwrap();
    let m = multipartite_for(&s, &[&["A"], &["B"]], &["C"], &MultipartiteOptions::default()).unwrap();
    let f = fidelity_of_recovery(&s, &["A"], &["B"], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!((m.value - f.value).abs() < 1e-6, "{} vs {}", m.value, f.value);
}

#[test]
fn multipartite_product_is_one() {
    let mut rng = StreamRng::new(16, 0);
    let a1 = random_density(&[2], &["A1"], 2, &mut rng).unwrap();
    let a2 = random_density(&[2], &["A2"], 2, &mut rng).unwrap();
    let a3c = random_density(&[2, 2], &["A3", "C"], 3, &mut rng).unwrap();
    let s = a1.tensor(&a2).unwrap().tensor(&a3c).unwrap();
    let opts = MultipartiteOptions { restarts: 1, ..Default::default() };
    let m = multipartite_for(&s, &[&["A1"], &["A2"], &["A3"]], &["C"], &opts).unwrap();
    assert!((m.value - 1.0).abs() < 1e-6, "{}", m.value);
}

#[test]
fn multipartite_ghz_below_merged_recovery() {
    let s = ghz(&["A1", "A2", "C"]).unwrap();
    let opts = MultipartiteOptions { restarts: 2, ..Default::default() };
    let m = multipartite_for(&s, &[&["A1"], &["A2"]], &["C"], &opts).unwrap();
    let merged = fidelity_of_recovery(&s, &["A1", "A2"], &[], &["C"], Backend::Convex, SEESAW_TOL).unwrap();
    assert!(m.value <= merged.value + 1e-6);
    assert!(m.value >= 0.0 && m.value <= 1.0 + 1e-7);
}
