use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdb_core::channel::{
    analytic_single_error, exact_distortion, placement_mass, simulate, Channel, EmpiricalPmf,
    SimulationOptions, UpsetModel, ValueSource,
};
use vdb_core::codegen::{
    constraint_lhs, solve_iid, solve_perbit, CodeTable, SolveOptions, TailConstraint,
};
use vdb_core::setgen::sets_fast;

fn random_table(rng: &mut ChaCha8Rng, max_l: u32) -> CodeTable {
    let l = rng.gen_range(1..=max_l);
    let k = rng.gen_range(1..=l);
    let p = (0..l).map(|_| rng.gen_range(0.0..0.5)).collect();
    CodeTable::per_bit(l, k, p).unwrap()
}

fn vacuous(l: u32, k: u32) -> TailConstraint {
    let m_max = ((1u64 << (l - k)) * ((1u64 << k) - 1)) as usize;
    TailConstraint::new(l, k, vec![1.0; m_max], true).unwrap()
}

#[test]
fn reachable_placement_mass_equals_constraint_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t = random_table(&mut rng, 8);
        let sets = sets_fast(t.word_length(), t.max_errors()).unwrap();
        let mass = placement_mass(t.probabilities(), t.max_errors()).unwrap();
        for (m, masks) in sets.iter() {
            let lhs = constraint_lhs(masks, t.probabilities());
            assert!((mass[m as usize] - lhs).abs() <= 1e-12, "m = {m}");
        }
    }
}

#[test]
fn weight_restricted_distortion_never_exceeds_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let t = random_table(&mut rng, 8);
        let (l, k) = (t.word_length(), t.max_errors());
        let sets = sets_fast(l, k).unwrap();
        let capped = exact_distortion(&Channel::flip_capped(&t), &ValueSource::Uniform).unwrap();
        // undo the renormalization to get the unconditional weight <= k mass
        let z: f64 = (0..1u32 << l)
            .filter(|e| e.count_ones() <= k)
            .map(|e| vdb_core::codegen::placement_probability(e, t.probabilities()))
            .sum();
        for (m, masks) in sets.iter() {
            let restricted = capped.mass[m as usize] * z;
            assert!(restricted <= constraint_lhs(masks, t.probabilities()) + 1e-12);
        }
    }
}

#[test]
fn split_placement_counterexample() {
    // 011 on L = 3 reaches m = 1 from half the carriers and m = 3 from the rest
    let p = [0.5, 0.5, 0.0];
    let t = CodeTable::per_bit(3, 2, p.to_vec()).unwrap();
    let sets = sets_fast(3, 2).unwrap();
    let capped = exact_distortion(&Channel::flip_capped(&t), &ValueSource::Uniform).unwrap();
    let lhs1 = constraint_lhs(sets.masks(1), &p);
    assert!((lhs1 - 0.5).abs() < 1e-15);
    assert!((capped.mass[1] - 0.375).abs() < 1e-15);
}

/// A solver output for a random nonincreasing constraint.
fn solved_table(rng: &mut ChaCha8Rng, max_l: u32) -> CodeTable {
    let l = rng.gen_range(1..=max_l);
    let k = rng.gen_range(1..=l);
    let m_max = ((1u64 << (l - k)) * ((1u64 << k) - 1)) as usize;
    let mut b: Vec<f64> = (0..m_max).map(|_| rng.gen_range(0.01..1.0)).collect();
    b.sort_by(|x, y| y.total_cmp(x));
    let c = TailConstraint::new(l, k, b, true).unwrap();
    let sets = sets_fast(l, k).unwrap();
    let opts = SolveOptions::default();
    if rng.gen_bool(0.5) {
        solve_iid(&sets, &c, &opts).unwrap()
    } else {
        solve_perbit(&sets, &c, &opts).unwrap()
    }
}

#[test]
fn simulation_tracks_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..6u64 {
        let t = solved_table(&mut rng, 10);
        let c = vacuous(t.word_length(), t.max_errors());
        let opts = SimulationOptions {
            trials: 100_000,
            seed: case,
            cap_weight: false,
        };
        let sim = simulate(&t, &c, &opts, &ValueSource::Uniform).unwrap();
        let exact = exact_distortion(&Channel::flip(&t), &ValueSource::Uniform).unwrap();
        for (m, &f) in exact.mass.iter().enumerate() {
            let tol = 4.0 * (f * (1.0 - f) / 100_000.0).sqrt();
            let got = sim.distribution.mass_at(m as u64);
            assert!(
                (got - f).abs() <= tol,
                "case {case} m = {m}: {got} against {f}"
            );
        }
    }
}

#[test]
fn simulation_independent_of_worker_count() {
    let t = CodeTable::per_bit(5, 2, vec![0.1, 0.2, 0.05, 0.3, 0.15]).unwrap();
    let c = vacuous(5, 2);
    let opts = SimulationOptions {
        trials: 50_000,
        seed: 99,
        cap_weight: true,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&t, &c, &opts, &ValueSource::Uniform).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn reciprocal_monte_carlo_runs_pass() {
    let c = TailConstraint::reciprocal(3, 3).unwrap();
    let opts = SimulationOptions {
        trials: 10_000,
        seed: 0,
        cap_weight: false,
    };
    for t in [
        CodeTable::iid(3, 3, 0.29).unwrap(),
        CodeTable::per_bit(3, 3, vec![0.25, 0.44, 0.31]).unwrap(),
    ] {
        let r = simulate(&t, &c, &opts, &ValueSource::Uniform).unwrap();
        assert!(r.pass, "{:?}", r.failures().collect::<Vec<_>>());
    }
}

#[test]
fn empirical_values_are_sampled() {
    let pmf = EmpiricalPmf::point(4, 9).unwrap();
    let t = CodeTable::iid(4, 1, 0.0).unwrap();
    let r = simulate(
        &t,
        &vacuous(4, 1),
        &SimulationOptions::default(),
        &ValueSource::Empirical(pmf),
    )
    .unwrap();
    assert_eq!(r.distribution.mass[0], 1.0);
}

#[test]
fn single_upset_point_masses_agree() {
    for v in 0..8 {
        let f_v = EmpiricalPmf::point(3, v).unwrap();
        let f_t = UpsetModel::new(vec![0.05, 0.1, 0.02], vec![0.03, 0.0, 0.2]).unwrap();
        let r = analytic_single_error(&f_v, &f_t).unwrap();
        assert!(r.agrees, "v = {v}: {}", r.max_divergence);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_distribution_is_normalized(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_table(&mut rng, 8);
        for ch in [Channel::flip(&t), Channel::flip_capped(&t)] {
            let d = exact_distortion(&ch, &ValueSource::Uniform).unwrap();
            prop_assert!((d.total() - 1.0).abs() < 1e-12);
            let tail = d.tail();
            prop_assert!((tail[0] - (1.0 - d.mass[0])).abs() < 1e-12);
            prop_assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            prop_assert_eq!(*tail.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn seeded_runs_repeat(seed in any::<u64>(), trials in 1u64..20_000) {
        let t = CodeTable::iid(4, 2, 0.2).unwrap();
        let c = vacuous(4, 2);
        let opts = SimulationOptions { trials, seed, cap_weight: false };
        let a = simulate(&t, &c, &opts, &ValueSource::Uniform).unwrap();
        let b = simulate(&t, &c, &opts, &ValueSource::Uniform).unwrap();
        prop_assert_eq!(a.distribution.mass, b.distribution.mass);
    }

    #[test]
    fn forced_upsets_never_exceed_flips(seed in any::<u64>()) {
        // forcing bit i to a random value flips it only half the time
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..0.5)).collect();
        let half: Vec<f64> = q.iter().map(|v| v / 2.0).collect();
        let forced = Channel::Forced(UpsetModel::new(half.clone(), half).unwrap());
        let flip = Channel::Flip { probabilities: q.iter().map(|v| v / 2.0).collect(), cap_weight: None };
        let a = exact_distortion(&forced, &ValueSource::Uniform).unwrap();
        let b = exact_distortion(&flip, &ValueSource::Uniform).unwrap();
        for (x, y) in a.mass.iter().zip(&b.mass) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
