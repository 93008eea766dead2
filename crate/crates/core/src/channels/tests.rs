use super::*;
use crate::infoquant::state_fidelity;
use crate::linalg::{c, r, CVec, ZERO};
use crate::qcore::{classical_copy, maximally_entangled, random_density, random_unitary};
use proptest::prelude::*;

fn kraus_sum(kraus: &[CMat], rho: &CMat) -> CMat {
    let mut out = CMat::zeros(kraus[0].nrows(), kraus[0].nrows());
    for k in kraus {
        out += k * rho * k.adjoint();
    }
    out
}

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn basis_ops(d: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = linalg::ONE;
            out.push(e);
        }
    }
    out
}

#[test]
fn identity_and_depolarizing_actions() {
    let mut rng = StreamRng::new(1, 0);
    let s = random_density(&[2, 3], &["A", "B"], 6, &mut rng).unwrap();
    let out = QuantumChannel::identity(&[2]).apply(&s, &["A"]).unwrap();
    assert!(out.max_abs_diff(&s) < 1e-12);
    let dep = QuantumChannel::depolarizing(&[2]).apply(&s, &["A"]).unwrap();
    let expect = linalg::kron(&(linalg::identity(2) * r(0.5)), s.partial_trace(&["B"]).unwrap().matrix());
    assert!(max_diff(dep.matrix(), &expect) < 1e-12);
}

#[test]
fn choi_contraction_matches_kraus_sum() {
    let mut rng = StreamRng::new(2, 0);
    let ch = QuantumChannel::random(&[2], &[2], 3, &mut rng);
    let kraus = ch.kraus();
    let rho = random_density(&[2], &["A"], 2, &mut rng).unwrap();
    let direct = kraus_sum(&kraus, rho.matrix());
    assert!(max_diff(&ch.apply_matrix(rho.matrix()), &direct) < 1e-10);
}

#[test]
fn apply_on_middle_system_keeps_order() {
    let mut rng = StreamRng::new(3, 0);
    let s = random_density(&[2, 2, 3], &["A", "B", "C"], 4, &mut rng).unwrap();
    let ch = QuantumChannel::random(&[2], &[3], 2, &mut rng);
    let out = ch.apply_relabel(&s, &["B"], &["B2"]).unwrap();
    assert_eq!(out.labels(), &["A", "B2", "C"]);
    assert_eq!(out.dims(), &[2, 3, 3]);
    // oracle: Kraus operators embedded as I ⊗ K ⊗ I
    let mut expect = CMat::zeros(18, 18);
    for k in ch.kraus() {
        let big = linalg::kron(&linalg::kron(&linalg::identity(2), &k), &linalg::identity(3));
        expect += &big * s.matrix() * big.adjoint();
    }
    assert!(max_diff(out.matrix(), &expect) < 1e-10);
    assert!(ch.apply_relabel(&s, &["C"], &["X"]).is_err());
}

#[test]
fn kraus_closed_forms() {
    let mut rng = StreamRng::new(4, 0);
    let u = random_unitary(2, &mut rng);
    let ch = QuantumChannel::unitary(&u, &[2]).unwrap();
    let mut v = CVec::zeros(4);
    v[0] = linalg::ONE;
    v[3] = linalg::ONE;
    let conj = linalg::kron(&linalg::identity(2), &u);
    let expect = &conj * linalg::outer(&v, &v) * conj.adjoint();
    assert!(max_diff(ch.choi(), &expect) < 1e-12);

    let mut k0 = CMat::zeros(2, 2);
    k0[(0, 0)] = linalg::ONE;
    let mut k1 = CMat::zeros(2, 2);
    k1[(1, 1)] = linalg::ONE;
    let deph = QuantumChannel::from_kraus(&[k0, k1], vec![2], vec![2]).unwrap();
    let diag = CMat::from_diagonal(&CVec::from_vec(vec![r(1.0), ZERO, ZERO, r(1.0)]));
    assert!(max_diff(deph.choi(), &diag) < 1e-15);

    let bad = vec![linalg::identity(2) * r(0.9)];
    assert!(matches!(QuantumChannel::from_kraus(&bad, vec![2], vec![2]), Err(Error::NotTracePreserving(_))));
}

#[test]
fn kraus_round_trip() {
    let mut rng = StreamRng::new(5, 0);
    let ch = QuantumChannel::random(&[2], &[2], 3, &mut rng);
    let kraus = ch.kraus();
    assert_eq!(kraus.len(), 3);
    let back = QuantumChannel::from_kraus(&kraus, vec![2], vec![2]).unwrap();
    for e in basis_ops(2) {
        assert!(max_diff(&ch.apply_matrix(&e), &back.apply_matrix(&e)) < 1e-8);
    }
}

#[test]
fn petz_product_case() {
    let mut rng = StreamRng::new(6, 0);
    let ra = random_density(&[2], &["A"], 2, &mut rng).unwrap();
    let rc = random_density(&[2], &["C"], 2, &mut rng).unwrap();
    let rac = ra.tensor(&rc).unwrap();
    let p = petz_recovery(&rac, &["A"], &["C"]).unwrap();
    let out = p.apply_relabel(&rc, &["C"], &["A", "C"]).unwrap();
    assert!(out.max_abs_diff(&rac) < 1e-9);
}

#[test]
fn petz_recovers_classical_markov_chain() {
    let mut rng = StreamRng::new(7, 0);
    let px = [0.3, 0.7];
    let mut m = CMat::zeros(8, 8);
    for (x, &p) in px.iter().enumerate() {
        let a = random_density(&[2], &["A"], 2, &mut rng).unwrap();
        let b = random_density(&[2], &["B"], 2, &mut rng).unwrap();
        let mut flag = CMat::zeros(2, 2);
        flag[(x, x)] = linalg::ONE;
        m += linalg::kron(&linalg::kron(a.matrix(), b.matrix()), &flag) * r(p);
    }
    let s = MultipartiteState::from_strs(&[2, 2, 2], &["A", "B", "C"], m).unwrap();
    let p = petz_recovery(&s.partial_trace(&["A", "C"]).unwrap(), &["A"], &["C"]).unwrap();
    let rbc = s.partial_trace(&["B", "C"]).unwrap();
    let out = p.apply_relabel(&rbc, &["C"], &["A", "C"]).unwrap().permute(&["A", "B", "C"]).unwrap();
    assert!((state_fidelity(&s, &out).unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn petz_choi_matches_direct_formula() {
    let mut rng = StreamRng::new(8, 0);
    let rac = random_density(&[2, 2], &["A", "C"], 4, &mut rng).unwrap();
    let ch = petz_recovery(&rac, &["A"], &["C"]).unwrap();
    let rc = rac.partial_trace(&["C"]).unwrap();
    // oracle: inverse square root by eigendecomposition, J = Σ |i⟩⟨j| ⊗ R(E_ij)
    let (vals, vecs) = linalg::eigh(rc.matrix());
    let d = CMat::from_diagonal(&CVec::from_iterator(2, vals.iter().map(|v| r(1.0 / v.sqrt()))));
    let inv = &vecs * d * vecs.adjoint();
    let s = linalg::psd_sqrt(rac.matrix());
    let mut expect = CMat::zeros(8, 8);
    for i in 0..2 {
        for j in 0..2 {
            let mut e = CMat::zeros(2, 2);
            e[(i, j)] = linalg::ONE;
            let mid = linalg::kron(&linalg::identity(2), &(&inv * e * &inv));
            let blk = &s * mid * &s;
            expect.view_mut((i * 4, j * 4), (4, 4)).copy_from(&blk);
        }
    }
    assert!(max_diff(ch.choi(), &expect) < 1e-8);
}

#[test]
fn petz_on_singular_marginal_is_trace_preserving() {
    let s = classical_copy(2, ["A", "C"]).unwrap();
    let mut m = s.matrix().clone();
    m[(3, 3)] = ZERO;
    m[(0, 0)] = linalg::ONE;
    let s = MultipartiteState::from_strs(&[2, 2], &["A", "C"], m).unwrap();
    let ch = petz_recovery(&s, &["A"], &["C"]).unwrap();
    assert!(ch.tp_defect() < 1e-8);
}

#[test]
fn isometry_inverse_cases() {
    let mut rng = StreamRng::new(9, 0);
    let tau = random_density(&[2], &["A"], 2, &mut rng).unwrap();
    let id = Isometry::new(linalg::identity(2), vec![2], vec![2]).unwrap();
    let t = isometry_inverse_channel(&id, &tau).unwrap();
    assert!(max_diff(t.choi(), QuantumChannel::identity(&[2]).choi()) < 1e-12);

    let v = Isometry::new(random_unitary(3, &mut rng).columns(0, 2).into_owned(), vec![2], vec![3]).unwrap();
    let t = isometry_inverse_channel(&v, &tau).unwrap();
    for _ in 0..50 {
        let rho = random_density(&[2], &["A"], 2, &mut rng).unwrap();
        let up = v.matrix() * rho.matrix() * v.matrix().adjoint();
        assert!(max_diff(&t.apply_matrix(&up), rho.matrix()) < 1e-10);
    }
    let composed = v.channel().then(&t).unwrap();
    assert!(max_diff(composed.choi(), QuantumChannel::identity(&[2]).choi()) < 1e-9);
    // a state orthogonal to the range of V goes to τ
    let w = linalg::identity(3) - v.matrix() * v.matrix().adjoint();
    let (_, vecs) = linalg::eigh(&w);
    let perp = linalg::outer(&vecs.column(0).into_owned(), &vecs.column(0).into_owned());
    assert!(max_diff(&t.apply_matrix(&perp), tau.matrix()) < 1e-10);
}

#[test]
fn measurement_channel_cases() {
    let m = measurement_channel(&Povm::computational(2));
    let zero = MultipartiteState::basis_state(&[2], &["A"], 0).unwrap();
    assert!(max_diff(&m.apply_matrix(zero.matrix()), zero.matrix()) < 1e-15);
    let t = measurement_channel(&Povm::trivial(2));
    assert_eq!(t.d_out(), 1);
    assert!((t.apply_matrix(zero.matrix())[(0, 0)] - linalg::ONE).norm() < 1e-15);

    let mut rng = StreamRng::new(10, 0);
    let p = Povm::random(2, 3, 1, &mut rng);
    let rho = random_density(&[2], &["A"], 2, &mut rng).unwrap();
    let out = measurement_channel(&p).apply_matrix(rho.matrix());
    for (x, e) in p.effects().iter().enumerate() {
        let mut tr = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                tr += e[(i, j)] * rho.matrix()[(j, i)];
            }
        }
        assert!((out[(x, x)] - tr).norm() < 1e-12);
    }
    assert!(out[(0, 1)].norm() < 1e-15);
}

#[test]
fn measurement_isometry_cases() {
    let d = measurement_isometry(&Povm::computational(2));
    assert_eq!(d.pairs, vec![(0, 0), (1, 0)]);
    let mut rng = StreamRng::new(11, 0);
    for _ in 0..10 {
        let p = Povm::random(2, 3, 2, &mut rng);
        let dil = measurement_isometry(&p);
        let u = dil.isometry.matrix();
        assert!(max_diff(&(u.adjoint() * u), &linalg::identity(2)) < 1e-10);
        let s = random_density(&[2, 2], &["A", "B"], 4, &mut rng).unwrap();
        let full = dil.isometry.channel().apply_relabel(&s, &["A"], &["X", "E"]).unwrap();
        let xb = full.partial_trace(&["X", "B"]).unwrap();
        let direct = measurement_channel(&p).apply_relabel(&s, &["A"], &["X"]).unwrap();
        assert!(xb.max_abs_diff(&direct) < 1e-9);
    }
}

#[test]
fn eb_channel_cases() {
    let p = Povm::computational(2);
    let e = eb_channel(&p, &p.effects().to_vec(), &[2]).unwrap();
    assert!(max_diff(e.choi(), dephasing_channel(2, None).unwrap().choi()) < 1e-15);

    let mut rng = StreamRng::new(12, 0);
    let tau = random_density(&[3], &["B"], 3, &mut rng).unwrap();
    let c = eb_channel(&Povm::trivial(2), &[tau.matrix().clone()], &[3]).unwrap();
    assert!(max_diff(c.choi(), QuantumChannel::replacement(&[2], tau.matrix(), &[3]).choi()) < 1e-15);

    let p = Povm::random(2, 3, 1, &mut rng);
    let preps: Vec<CMat> = (0..3).map(|_| random_density(&[2], &["A"], 2, &mut rng).unwrap().into_matrix()).collect();
    let e = eb_channel(&p, &preps, &[2]).unwrap();
    for _ in 0..20 {
        let rho = random_density(&[2], &["A"], 2, &mut rng).unwrap();
        let probs = p.probabilities(rho.matrix());
        let mut two_step = CMat::zeros(2, 2);
        for (q, s) in probs.iter().zip(&preps) {
            two_step += s * r(*q);
        }
        assert!(max_diff(&e.apply_matrix(rho.matrix()), &two_step) < 1e-10);
    }
    assert!(eb_channel(&p, &preps[..2], &[2]).is_err());
}

#[test]
fn dephasing_cases() {
    let d = dephasing_channel(2, None).unwrap();
    let diag = CMat::from_diagonal(&CVec::from_vec(vec![r(0.3), r(0.7)]));
    assert!(max_diff(&d.apply_matrix(&diag), &diag) < 1e-15);
    let plus = CMat::from_element(2, 2, r(0.5));
    assert!(max_diff(&d.apply_matrix(&plus), &(linalg::identity(2) * r(0.5))) < 1e-15);
    let mut rng = StreamRng::new(13, 0);
    let rho = random_density(&[3], &["A"], 3, &mut rng).unwrap();
    let out = dephasing_channel(3, None).unwrap().apply_matrix(rho.matrix());
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { rho.matrix()[(i, j)] } else { ZERO };
            assert!((out[(i, j)] - e).norm() < 1e-14);
        }
    }
    let u = random_unitary(3, &mut rng);
    let du = dephasing_channel(3, Some(&u)).unwrap();
    let once = du.apply_matrix(rho.matrix());
    assert!(max_diff(&du.apply_matrix(&once), &once) < 1e-10);
    let skew = CMat::from_element(3, 3, r(1.0));
    assert!(dephasing_channel(3, Some(&skew)).is_err());
}

fn swap4() -> CMat {
    let mut s = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            s[(b * 2 + a, a * 2 + b)] = linalg::ONE;
        }
    }
    s
}

#[test]
fn private_state_cases() {
    let labels = ["A", "B", "A'", "B'"];
    let sigma = MultipartiteState::maximally_mixed(&[2, 2], &["A'", "B'"]).unwrap();
    let untwisted = private_state(2, [2, 2], &[linalg::identity(4), linalg::identity(4)], &sigma, labels).unwrap();
    let phi = maximally_entangled(2, ["A", "B"]).unwrap();
    assert!(untwisted.max_abs_diff(&phi.tensor(&sigma).unwrap()) < 1e-14);
    assert!(untwisted.partial_trace(&["A", "B"]).unwrap().max_abs_diff(&phi) < 1e-14);

    let twisted = private_state(2, [2, 2], &[linalg::identity(4), swap4()], &sigma, labels).unwrap();
    let key = twisted.partial_trace(&["A", "B"]).unwrap();
    // computational-basis statistics on A and B: perfectly correlated uniform bits
    let probs: Vec<f64> = (0..4).map(|k| key.matrix()[(k, k)].re).collect();
    for (k, expect) in [0.5, 0.0, 0.0, 0.5].iter().enumerate() {
        assert!((probs[k] - expect).abs() < 1e-12);
    }
    assert!(private_state(2, [2, 2], &[linalg::identity(4)], &sigma, labels).is_err());
}

#[test]
fn stinespring_cases() {
    let mut rng = StreamRng::new(14, 0);
    let u = random_unitary(2, &mut rng);
    let iso = stinespring(&QuantumChannel::unitary(&u, &[2]).unwrap());
    assert_eq!(iso.out_dims(), &[2, 1]);
    // equal up to a global phase
    let overlap = (u.adjoint() * iso.matrix()).trace() / r(2.0);
    assert!((overlap.norm() - 1.0).abs() < 1e-10);

    let iso = stinespring(&dephasing_channel(2, None).unwrap());
    assert_eq!(iso.out_dims(), &[2, 2]);

    let ch = QuantumChannel::random(&[2], &[3], 2, &mut rng);
    let iso = stinespring(&ch);
    for e in basis_ops(2) {
        let full = iso.matrix() * &e * iso.matrix().adjoint();
        let red = linalg::ptrace(&full, &[3, iso.out_dims()[1]], &[0]);
        assert!(max_diff(&red, &ch.apply_matrix(&e)) < 1e-8);
    }
}

#[test]
fn projected_choi_fixes_trace() {
    let mut rng = StreamRng::new(15, 0);
    let ch = QuantumChannel::random(&[2], &[2], 2, &mut rng);
    let noisy = ch.choi() * r(1.01) + CMat::from_fn(4, 4, |i, j| if i == j { c(1e-4, 0.0) } else { ZERO });
    let fixed = QuantumChannel::from_choi_projected(vec![2], vec![2], &noisy).unwrap();
    assert!(fixed.tp_defect() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_constructions_are_valid_channels(seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed, 0);
        let kr = 1 + rng.index(4);
        let ch = QuantumChannel::random(&[2], &[3], kr, &mut rng);
        prop_assert!(QuantumChannel::new(vec![2], vec![3], ch.choi().clone()).is_ok());
        let rac = random_density(&[2, 2], &["A", "C"], 1 + rng.index(4), &mut rng).unwrap();
        let p = petz_recovery(&rac, &["A"], &["C"]).unwrap();
        prop_assert!(p.tp_defect() < 1e-8 && linalg::min_eigenvalue(p.choi()) > -1e-8);
        let povm = Povm::random(2, 2 + rng.index(3), 1, &mut rng);
        let preps: Vec<CMat> = (0..povm.len()).map(|_| random_density(&[2], &["B"], 2, &mut rng).unwrap().into_matrix()).collect();
        let eb = eb_channel(&povm, &preps, &[2]).unwrap();
        prop_assert!(eb.choi_is_ppt(1e-9));
        prop_assert!(measurement_channel(&povm).tp_defect() < 1e-8);
    }

    #[test]
    fn petz_reproduces_product_states(seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed, 1);
        let a = random_density(&[2], &["A"], 2, &mut rng).unwrap();
        let b = random_density(&[2], &["B"], 2, &mut rng).unwrap();
        let cc = random_density(&[2], &["C"], 2, &mut rng).unwrap();
        let abc = a.tensor(&b).unwrap().tensor(&cc).unwrap();
        let p = petz_recovery(&abc, &["A"], &["C"]).unwrap();
        let out = p.apply_relabel(&abc.partial_trace(&["B", "C"]).unwrap(), &["C"], &["A", "C"]).unwrap()
            .permute(&["A", "B", "C"]).unwrap();
        prop_assert!(out.max_abs_diff(&abc) < 1e-9);
    }

    #[test]
    fn measurement_dilation_marginal(seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed, 2);
        let p = Povm::random(2, 2 + rng.index(3), 1 + rng.index(2), &mut rng);
        let rho = random_density(&[2], &["A"], 2, &mut rng).unwrap();
        let dil = measurement_isometry(&p);
        let ne = dil.isometry.out_dims()[1];
        let full = dil.isometry.matrix() * rho.matrix() * dil.isometry.matrix().adjoint();
        let x = linalg::ptrace(&full, &[p.len(), ne], &[0]);
        prop_assert!(max_diff(&x, &measurement_channel(&p).apply_matrix(rho.matrix())) < 1e-9);
    }
}
