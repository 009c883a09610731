use bellslice_core::quantum::{
    born_table, concurrence, detection_efficiency, efficiency_terms, expectation, kron, maximally_entangled,
    npa_upper_bound, quantum_value, random_model, random_unitary, resistance_to_noise, seesaw, seesaw_trace,
    with_white_noise, CMatrix, NpaLevel, QuantumModel, SeesawOptions, C64,
};
use bellslice_core::scenario::{expand_functional, party_strategies, signalling_residual};
use bellslice_core::{Inequality, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sc(x: usize, y: usize, a: usize, b: usize) -> Scenario {
    Scenario::new(x, y, a, b).unwrap()
}

fn random_inequality(s: Scenario, rng: &mut ChaCha8Rng) -> Inequality {
    let coeffs: Vec<i64> = (0..s.cg_dimension()).map(|_| rng.gen_range(-2..=2)).collect();
    let v = bellslice_core::scenario::enumerate_vertices(&s, 1 << 16).unwrap();
    let l = v.iter().map(|p| coeffs.iter().zip(p).map(|(a, b)| a * b).sum::<i64>()).max().unwrap();
    Inequality::new(s, coeffs, l).unwrap()
}

/// Bell value by summing coefficient times probability over the full table.
fn value_by_summation(ineq: &Inequality, m: &QuantumModel) -> f64 {
    let s = ineq.scenario();
    let c = expand_functional(&s, ineq.coeffs());
    let p = born_table(m);
    let mut t = 0.0;
    for x in 0..s.inputs_a() {
        for y in 0..s.inputs_b() {
            for a in 0..s.outputs_a() {
                for b in 0..s.outputs_b() {
                    t += *c.get(x, y, a, b) as f64 * p.get(x, y, a, b);
                }
            }
        }
    }
    t
}

#[test]
fn born_behaviors_are_no_signalling_and_match_the_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let scenarios = [sc(2, 2, 2, 2), sc(3, 3, 2, 2), sc(2, 2, 3, 3), sc(2, 3, 4, 2)];
    for k in 0..20 {
        let s = scenarios[k % scenarios.len()];
        let d = 2 + k % 3;
        let m = random_model(&s, d, &mut rng);
        m.validate().unwrap();
        assert!(signalling_residual(&born_table(&m)) <= 1e-10);
        let ineq = random_inequality(s, &mut rng);
        assert!((quantum_value(&ineq, &m).unwrap() - value_by_summation(&ineq, &m)).abs() <= 1e-10);
    }
}

#[test]
fn efficiency_identity_at_full_detection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in [sc(2, 2, 2, 2), sc(2, 2, 3, 3), sc(3, 2, 2, 2)] {
        let ineq = random_inequality(s, &mut rng);
        let m = random_model(&s, 3, &mut rng);
        let q = quantum_value(&ineq, &m).unwrap();
        for sa in party_strategies(s.inputs_a(), s.outputs_a()).iter().take(5) {
            for sb in party_strategies(s.inputs_b(), s.outputs_b()).iter().take(5) {
                let t = efficiency_terms(&ineq, &m, sa, sb).unwrap();
                assert!((t.value(1.0) - q).abs() <= 1e-9);
                // at zero efficiency both sides output their failure values
                let v: Vec<i64> = bellslice_core::DeterministicStrategy { alice: sa.clone(), bob: sb.clone() }.vertex(&s);
                assert!((t.value(0.0) - ineq.value(&v) as f64).abs() <= 1e-12);
            }
        }
    }
}

fn chsh() -> Inequality {
    Inequality::new(sc(2, 2, 2, 2), vec![1, 1, 1, -1, -1, 0, -1, 0], 0).unwrap()
}

#[test]
fn noise_threshold_lands_on_the_local_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let i3322 = Inequality::new(sc(3, 3, 2, 2), vec![1, 1, 1, 1, 1, -1, 1, -1, 0, -1, 0, 0, -2, -1, 0], 0).unwrap();
    for ineq in [chsh(), i3322] {
        let r = seesaw(&ineq, 2, &SeesawOptions { restarts: 5, seed: rng.gen(), ..Default::default() }).unwrap();
        let n = resistance_to_noise(&ineq, &r.model).unwrap();
        assert!(n.violated);
        let mixed = QuantumModel { state: with_white_noise(&r.model.state, n.lambda), ..r.model.clone() };
        let v = quantum_value(&ineq, &mixed).unwrap();
        assert!((v - ineq.bound() as f64).abs() <= 1e-9, "{v}");
    }
}

#[test]
fn detection_threshold_lands_on_the_local_bound() {
    let r = seesaw(&chsh(), 2, &SeesawOptions { restarts: 3, ..Default::default() }).unwrap();
    let e = detection_efficiency(&chsh(), &r.model).unwrap();
    let t = efficiency_terms(&chsh(), &r.model, &e.alice_strategy, &e.bob_strategy).unwrap();
    assert!((t.value(e.eta) - 0.0).abs() <= 1e-9);
    assert!(e.eta > 0.0 && e.eta <= 1.0);
}

fn local_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    kron(&random_unitary(2, rng), &random_unitary(2, rng))
}

#[test]
fn concurrence_is_local_unitary_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..10 {
        let psi = random_model(&sc(2, 2, 2, 2), 2, &mut rng).state;
        let rho = with_white_noise(&psi, 0.1 * k as f64);
        let c = concurrence(&rho).unwrap();
        assert!((0.0..=1.0).contains(&c));
        let u = local_unitary(&mut rng);
        let rotated = &u * &rho * u.adjoint();
        assert!((concurrence(&rotated).unwrap() - c).abs() <= 1e-9);
    }
    assert!((concurrence(&maximally_entangled(2)).unwrap() - 1.0).abs() <= 1e-9);
    // Werner states: C = max(0, (3p - 1) / 2)
    for p in [0.2, 0.5, 0.9] {
        let c = concurrence(&with_white_noise(&maximally_entangled(2), p)).unwrap();
        assert!((c - f64::max(0.0, (3.0 * p - 1.0) / 2.0)).abs() <= 1e-9);
    }
}

#[test]
fn seesaw_is_monotone_within_a_restart() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cglmp = Inequality::new(
        sc(2, 2, 3, 3),
        vec![1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 1, -1, -1, -1, 0, -1, -1, 0, 0, -1, -1, 0, 0],
        0,
    )
    .unwrap();
    for (ineq, d) in [(chsh(), 2), (cglmp, 3)] {
        for _ in 0..3 {
            let m = random_model(&ineq.scenario(), d, &mut rng);
            let trace = seesaw_trace(&ineq, &m, &SeesawOptions::default()).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{trace:?}");
            }
        }
    }
}

#[test]
fn npa_dominates_seesaw() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for s in [sc(2, 2, 2, 2), sc(2, 2, 3, 3), sc(3, 2, 2, 2)] {
        for _ in 0..3 {
            let ineq = random_inequality(s, &mut rng);
            let npa = npa_upper_bound(&ineq, NpaLevel::OneAB, 1e-6).unwrap().value;
            let q = seesaw(&ineq, 2, &SeesawOptions { restarts: 3, seed: rng.gen(), ..Default::default() }).unwrap().value;
            assert!(q <= npa + 1e-6, "{q} > {npa}");
            assert!(q >= ineq.bound() as f64 - 1e-9);
        }
    }
}

#[test]
fn bell_state_expectation_of_swap_is_one() {
    // sanity of the state convention: SWAP |Φ⁺> = |Φ⁺>
    let d = 3;
    let swap = CMatrix::from_fn(d * d, d * d, |r, c| if r == (c % d) * d + c / d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    assert!((expectation(&maximally_entangled(d), &swap) - 1.0).abs() < 1e-12);
}
