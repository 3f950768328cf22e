use junta_core::boolean::{
    dist_to_junta_on_bool, dist_to_k_junta_bool, embed_unitary, influence_set, BooleanFunction,
};
use junta_core::exec::{map_range, ExecMode};
use junta_core::extractors::{coordinate_extractor, coordinate_extractor_local, ExtractorConfig};
use junta_core::generators::{perturbed_junta_boolean, perturbed_junta_unitary, random_k_junta_unitary};
use junta_core::linalg::haar_random_unitary;
use junta_core::oracles::{exact_influence_profile_unitary, heavy_coordinates};
use junta_core::pauli::{dist_to_junta_on, dist_to_k_junta, pauli_spectrum};
use junta_core::samplers::{influence_sample_exact_distribution, GateSet, QueryLedger, RandomSource};
use junta_core::subset::Subset;
use junta_core::testers::{tolerant_boolean_junta_tester, tolerant_junta_tester, TesterKind};
use rand::Rng;

const TOL: f64 = 1e-9;

fn random_boolean(n: usize, rng: &mut RandomSource) -> BooleanFunction {
    BooleanFunction::new(n, (0..1usize << n).map(|_| if rng.random() { -1 } else { 1 }).collect())
        .unwrap()
}

/// `dist(f, J_T)` by majority vote inside each cell of the restriction to `T`.
fn brute_dist_on(f: &BooleanFunction, t: Subset) -> f64 {
    let n = f.num_vars();
    let mask = t.basis_mask(n);
    let mut cells = std::collections::HashMap::<usize, (u32, u32)>::new();
    for x in 0..1usize << n {
        let e = cells.entry(x & mask).or_default();
        if f.value(x) == 1 {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    let wrong: u32 = cells.values().map(|&(a, b)| a.min(b)).sum();
    wrong as f64 / (1u64 << n) as f64
}

#[test]
fn boolean_distance_matches_majority_vote() {
    let mut rng = RandomSource::new(11);
    for n in 1..=6 {
        let f = random_boolean(n, &mut rng);
        for t in 0..1u32 << n {
            let t = Subset::from_bits(t);
            let (d, g) = dist_to_junta_on_bool(&f, t).unwrap();
            assert!((d - brute_dist_on(&f, t)).abs() < TOL);
            assert!(influence_set(&g, t.complement(n)) < TOL);
        }
    }
}

#[test]
fn boolean_influence_brackets_distance() {
    let mut rng = RandomSource::new(12);
    for i in 0..60 {
        let n = 2 + i % 5;
        let f = if i % 2 == 0 {
            random_boolean(n, &mut rng)
        } else {
            perturbed_junta_boolean(n, 1 + i % (n - 1), 0.1, &mut rng).unwrap().function
        };
        for t in 0..1u32 << n {
            let t = Subset::from_bits(t);
            let inf = influence_set(&f, t.complement(n));
            let d = dist_to_junta_on_bool(&f, t).unwrap().0;
            assert!(inf <= 4.0 * d + TOL, "n={n} T={t:?}: Inf {inf} vs 4·dist {d}");
            assert!(inf + TOL >= d, "n={n} T={t:?}: Inf {inf} vs dist {d}");
        }
    }
}

#[test]
fn unitary_influence_brackets_distance() {
    let mut rng = RandomSource::new(13);
    for i in 0..40 {
        let n = 2 + i % 3;
        let u = if i % 2 == 0 {
            haar_random_unitary(1 << n, &mut rng).unwrap()
        } else {
            perturbed_junta_unitary(n, 1, 0.2, &mut rng).unwrap().unitary
        };
        let spectrum = pauli_spectrum(&u).unwrap();
        for t in 0..1u32 << n {
            let t = Subset::from_bits(t);
            let inf = spectrum.influence_set(t.complement(n));
            let d = dist_to_junta_on(&u, t).unwrap();
            assert!(inf <= 2.0 * d * d + TOL);
            assert!(inf + TOL >= d * d / 4.0);
        }
    }
}

#[test]
fn embedded_distance_is_bounded_by_boolean_distance() {
    let mut rng = RandomSource::new(14);
    for i in 0..30 {
        let n = 2 + i % 3;
        let k = 1 + i % (n - 1);
        let f = random_boolean(n, &mut rng);
        let (db, _) = dist_to_k_junta_bool(&f, k, None).unwrap();
        let (du, _) = dist_to_k_junta(&embed_unitary(&f).unwrap(), k, None).unwrap();
        assert!(du <= (2.0 * db).sqrt() + TOL, "{du} > √(2·{db})");
    }
}

#[test]
fn extractor_contains_heavy_coordinates() {
    let (k, tau) = (2, 0.5);
    let config = ExtractorConfig::new(k, tau).unwrap();
    let results = map_range(200, ExecMode::Parallel, |i| {
        let mut rng = RandomSource::for_trial(15, i as u64);
        let u = perturbed_junta_unitary(5, k, 0.3, &mut rng).unwrap().unitary;
        let heavy = heavy_coordinates(&exact_influence_profile_unitary(&u, k).unwrap(), k, tau);
        let mut ledger = QueryLedger::new();
        let s = coordinate_extractor(&u, k, tau, &mut rng, &mut ledger).unwrap();
        assert!(s.len() as f64 <= config.max_set_size());
        heavy.is_subset_of(s)
    });
    let hits = results.iter().filter(|&&ok| ok).count();
    assert!(hits >= 194, "containment in {hits}/200 trials");
}

#[test]
fn local_extractor_contains_frequent_coordinates() {
    let (n, k, tau) = (4, 1, 0.5);
    let results = map_range(200, ExecMode::Parallel, |i| {
        let mut rng = RandomSource::for_trial(16, i as u64);
        let (u, _) = random_k_junta_unitary(n, k + 1, &mut rng).unwrap();
        let law = influence_sample_exact_distribution(&u, GateSet::Full).unwrap();
        let p: Vec<f64> = (0..n)
            .map(|q| {
                law.iter()
                    .enumerate()
                    .map(|(x, &w)| (Subset::from_bits(x as u32), w))
                    .filter(|(x, _)| x.len() <= k && x.contains(q))
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        let frequent = Subset::from_indices((0..n).filter(|&q| p[q] >= tau * tau / k as f64));
        let mut ledger = QueryLedger::new();
        let s = coordinate_extractor_local(&u, k, tau, &mut rng, &mut ledger).unwrap();
        frequent.is_subset_of(s)
    });
    let hits = results.iter().filter(|&&ok| ok).count();
    assert!(hits >= 194, "containment in {hits}/200 trials");
}

#[test]
fn thresholds_separate_promise_classes() {
    let cases = [(0.05, 0.9), (0.1, 0.8), (0.01, 0.5)];
    for (e1, e2) in cases {
        for kind in [TesterKind::Alg3, TesterKind::Alg7] {
            if kind.check_gap(e1, e2).is_err() {
                continue;
            }
            let delta = kind.delta(e1, e2);
            let yes_bound = 2.0 * e1 * e1 + delta;
            let no_bound = match kind {
                TesterKind::Alg3 => e2 * e2 / 4.0,
                _ => e2 * e2 / 6.0,
            };
            let bar = kind.threshold(e1, e2);
            assert!(yes_bound + delta <= bar + TOL);
            assert!(bar + delta < no_bound + TOL);
        }
    }
    assert!(TesterKind::Alg3.check_gap(0.1, 0.25).is_err());
    assert!(TesterKind::Alg7.check_gap(0.1, 0.3).is_err());
    assert!(TesterKind::Alg3Bool.check_gap(0.1, 0.4).is_err());
    assert!(TesterKind::Alg7Bool.check_gap(0.1, 0.6).is_err());
}

#[test]
fn verdicts_are_deterministic_per_seed() {
    let mut rng = RandomSource::new(17);
    let u = perturbed_junta_unitary(4, 1, 0.05, &mut rng).unwrap().unitary;
    let f = perturbed_junta_boolean(6, 2, 0.05, &mut rng).unwrap().function;
    let run = |mode| {
        map_range(8, mode, |i| {
            let a = tolerant_junta_tester(&u, 1, 0.05, 0.9, &mut RandomSource::for_trial(18, i as u64))
                .unwrap();
            let b = tolerant_boolean_junta_tester(&f, 2, 0.05, 0.4, &mut RandomSource::for_trial(19, i as u64))
                .unwrap();
            (a.verdict, a.statistic, a.queries, b.verdict, b.statistic, b.queries)
        })
    };
    let seq = run(ExecMode::Sequential);
    assert_eq!(seq, run(ExecMode::Parallel));
    assert_eq!(seq, run(ExecMode::Sequential));
}
