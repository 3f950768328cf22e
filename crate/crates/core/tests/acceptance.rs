//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use junta_core::boolean::{
    degree_k_influence as bool_degree_k_influence, dist_boolean, dist_to_k_junta_bool,
    embed_unitary, BooleanFunction,
};
use junta_core::exec::{map_range, ExecMode};
use junta_core::extractors::ExtractorConfig;
use junta_core::generators::{
    far_instance_boolean, far_instance_unitary, perturbed_junta_boolean, perturbed_junta_unitary,
    random_k_junta_boolean, random_k_junta_unitary, sample_dyes_dno, HardSide,
};
use junta_core::linalg::{ginibre, haar_random_unitary, nuclear_norm, ComplexMatrix};
use junta_core::oracles::Classification;
use junta_core::pauli::{dist_to_junta_on, dist_to_k_junta, pauli_spectrum, PauliString};
use junta_core::pauli::dist_unitary;
use junta_core::samplers::{
    influence_sample_exact_distribution, FourierSampler, GateSet, QueryLedger, RandomSource,
};
use junta_core::subset::{binomial, combinations, Subset};
use junta_core::testers::{
    gapless_tolerant_junta_tester, tolerant_boolean_junta_tester,
    tolerant_boolean_junta_tester_local, tolerant_junta_tester, tolerant_junta_tester_local,
    warmup_estimator, TesterKind, TesterVerdict, Verdict,
};
use junta_core::{Unitary, C64};
use rand::Rng;

const TOL: f64 = 1e-9;
const MODE: ExecMode = ExecMode::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// `|Û(x)|²` straight from `Tr(σ_x† U)/N`.
fn brute_pauli_weights(u: &Unitary) -> Vec<f64> {
    let n = u.num_qubits();
    let dim = u.dim() as f64;
    (0..1usize << (2 * n))
        .map(|idx| {
            let p = PauliString::from_index(n, idx).unwrap().matrix().unwrap();
            (p.adjoint().matmul(u.matrix()).unwrap().trace() / dim).norm_sqr()
        })
        .collect()
}

/// `f̂(S) = E_x[f(x) χ_S(x)]` by direct summation.
fn brute_fourier(f: &BooleanFunction, s: Subset) -> f64 {
    let n = f.num_vars();
    let mask = s.basis_mask(n);
    let sum: i64 = (0..1usize << n)
        .map(|x| {
            let chi = if (x & mask).count_ones() % 2 == 1 { -1 } else { 1 };
            (f.value(x) * chi) as i64
        })
        .sum();
    sum as f64 / (1u64 << n) as f64
}

fn criterion_fourier_law() -> Outcome {
    let draws = 100_000;
    let tvs = map_range(20, MODE, |i| {
        let mut rng = RandomSource::for_trial(0xC1, i as u64);
        let u = haar_random_unitary(16, &mut rng).unwrap();
        let exact = brute_pauli_weights(&u);
        let sampler = FourierSampler::from_unitary(&u).unwrap();
        let mut ledger = QueryLedger::new();
        let mut counts = vec![0u64; exact.len()];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng, &mut ledger).index()] += 1;
        }
        counts
            .iter()
            .zip(&exact)
            .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
            .sum::<f64>()
            / 2.0
    });
    let worst = tvs.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 0.02, format!("max TV over 20 unitaries = {worst:.4} (bound 0.02)"))
}

fn criterion_parseval_and_embedding() -> Outcome {
    let mut rng = RandomSource::new(0xC2);
    let mut worst_parseval: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 6;
        let u = haar_random_unitary(1 << n, &mut rng).unwrap();
        let total = pauli_spectrum(&u).unwrap().total_weight();
        worst_parseval = worst_parseval.max((total - 1.0).abs());
    }

    let mut worst_coeff: f64 = 0.0;
    let mut worst_inf: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 8;
        let table = (0..1usize << n).map(|_| if rng.random() { -1 } else { 1 }).collect();
        let f = BooleanFunction::new(n, table).unwrap();
        let uf = embed_unitary(&f).unwrap();
        let spectrum = pauli_spectrum(&uf).unwrap();
        for idx in 0..1usize << (2 * n) {
            let x = PauliString::from_index(n, idx).unwrap();
            let c = spectrum.coefficient(&x);
            let expected = if x.word().iter().all(|&s| s == 0 || s == 3) {
                brute_fourier(&f, x.support())
            } else {
                0.0
            };
            worst_coeff = worst_coeff.max((c - C64::new(expected, 0.0)).norm());
        }
        for q in 0..n {
            for k in 1..=n {
                let a = bool_degree_k_influence(&f, q, k).unwrap();
                let b = spectrum.degree_k_influence(q, k).unwrap();
                worst_inf = worst_inf.max((a - b).abs());
            }
        }
    }

    // pairs with dist(f, g) ≤ 1/2, where the identity is stated without the phase flip
    let mut worst_dist: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 8;
        let k = 1 + i % n;
        let (g, _) = random_k_junta_boolean(n, k, &mut rng).unwrap();
        let flips = rng.random_range(0..=(1usize << n) / 2);
        let picks = rand::seq::index::sample(&mut rng, 1 << n, flips).into_vec();
        let f = g.with_flipped(&picks);
        let lhs = dist_unitary(&embed_unitary(&f).unwrap(), &embed_unitary(&g).unwrap()).unwrap();
        let rhs = (2.0 * dist_boolean(&f, &g).unwrap()).sqrt();
        worst_dist = worst_dist.max((lhs - rhs).abs());
    }
    let pass = worst_parseval <= TOL && worst_coeff <= TOL && worst_inf <= TOL && worst_dist <= TOL;
    outcome(
        pass,
        format!(
            "max deviations: Parseval {worst_parseval:.1e}, embedded coefficients {worst_coeff:.1e}, \
             degree-k influences {worst_inf:.1e}, embedded distances {worst_dist:.1e}"
        ),
    )
}

fn criterion_influence_sandwich() -> Outcome {
    let mut rng = RandomSource::new(0xC3);
    let mut violations = 0;
    let mut checks = 0;
    let mut tightest_full: f64 = 0.0;
    let mut tightest_no_r: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 4;
        let u = haar_random_unitary(1 << n, &mut rng).unwrap();
        let spectrum = pauli_spectrum(&u).unwrap();
        let full = influence_sample_exact_distribution(&u, GateSet::Full).unwrap();
        let no_r = influence_sample_exact_distribution(&u, GateSet::WithoutR).unwrap();
        for t in 0..1u32 << n {
            let t = Subset::from_bits(t);
            let inf = spectrum.influence_set(t);
            let hit = |law: &[f64]| -> f64 {
                law.iter()
                    .enumerate()
                    .filter(|(x, _)| Subset::from_bits(*x as u32).intersects(t))
                    .map(|(_, p)| p)
                    .sum()
            };
            let (p, q) = (hit(&full), hit(&no_r));
            checks += 1;
            if p > inf + TOL || inf > 1.5 * p + TOL || q > inf + TOL || inf > 2.0 * q + TOL {
                violations += 1;
            }
            if p > 0.0 {
                tightest_full = tightest_full.max(inf / p);
            }
            if q > 0.0 {
                tightest_no_r = tightest_no_r.max(inf / q);
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{violations} violations over {checks} (U, T) pairs; largest Inf/Pr ratio \
             {tightest_full:.4} (bound 1.5), without R {tightest_no_r:.4} (bound 2)"
        ),
    )
}

/// All supersets of `base` inside `[n]`.
fn supersets(base: Subset, n: usize) -> impl Iterator<Item = Subset> {
    (0..1u32 << n)
        .map(Subset::from_bits)
        .filter(move |s| base.is_subset_of(*s))
}

fn criterion_approximation_lemmas() -> Outcome {
    let mut rng = RandomSource::new(0xC4);
    let grid = [0.01, 0.05, 0.1, 0.2, 0.5, 1.0];
    let mut checks = 0u64;
    let mut violations = 0u64;
    for i in 0..50 {
        let n = 2 + i % 3;
        let u = if i % 2 == 0 {
            haar_random_unitary(1 << n, &mut rng).unwrap()
        } else {
            let eps = rng.random_range(0.05..0.6);
            perturbed_junta_unitary(n, 1 + i % (n - 1), eps, &mut rng)
                .unwrap()
                .unitary
        };
        let spectrum = pauli_spectrum(&u).unwrap();
        let full = Subset::full(n);
        let dist_on: Vec<f64> = (0..1u32 << n)
            .map(|s| dist_to_junta_on(&u, Subset::from_bits(s)).unwrap())
            .collect();
        let d = |s: Subset| dist_on[s.bits() as usize];
        for k in 1..n {
            let low: Vec<f64> = (0..n).map(|q| spectrum.degree_k_influence(q, k).unwrap()).collect();
            let heavy = |pool: Subset, bar: f64| {
                Subset::from_indices(pool.iter().filter(|&q| low[q] >= bar))
            };
            let mut check = |ok: bool| {
                checks += 1;
                violations += (!ok) as u64;
            };
            // adding one coordinate to a large set costs at most its degree-k influence
            for t in (0..1u32 << n).map(Subset::from_bits).filter(|t| t.len() + k >= n) {
                for q in (0..n).filter(|&q| !t.contains(q)) {
                    check(spectrum.influence_set(t.with(q)) <= spectrum.influence_set(t) + low[q] + TOL);
                }
            }
            for &delta in &grid {
                // influence approximation for every |T| ≤ k
                for t in (0..1u32 << n).map(Subset::from_bits).filter(|t| t.len() <= k) {
                    for s in supersets(heavy(t, delta / k as f64), n) {
                        let lhs = spectrum.influence_set(s.complement(n));
                        check(lhs <= spectrum.influence_set(t.complement(n)) + delta + TOL);
                    }
                }
                // distance approximation with τ = delta
                let tau = delta;
                for t in combinations(full, k) {
                    for s in supersets(heavy(t, tau * tau / k as f64), n) {
                        check(d(s) <= d(t) + tau.sqrt() + TOL);
                    }
                }
                let (best, _) = dist_to_k_junta(&u, k, None).unwrap();
                for s in supersets(heavy(full, tau * tau / k as f64), n) {
                    let (restricted, _) = dist_to_k_junta(&u, k, Some(s)).unwrap();
                    check(restricted <= best + tau.sqrt() + TOL);
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {checks} exhaustive inequality checks"),
    )
}

fn criterion_nuclear_perturbation() -> Outcome {
    let mut rng = RandomSource::new(0xC5);
    let sizes = [2usize, 4, 8, 16];
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for i in 0..500 {
        let m = sizes[i % 4];
        let a = ginibre(m, m, &mut rng);
        let tau = rng.random_range(1e-3..1.0);
        let e: Vec<C64> = (0..m * m)
            .map(|_| {
                let r = tau * rng.random::<f64>();
                C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let e = ComplexMatrix::from_vec(m, m, e).unwrap();
        let gap = (nuclear_norm(&a.add(&e).unwrap()).unwrap() - nuclear_norm(&a).unwrap()).abs();
        let bound = (m as f64).powf(1.5) * tau;
        worst_ratio = worst_ratio.max(gap / bound);
        if gap > bound {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over 500 pairs; largest |Δ‖·‖_*| / (m^1.5 τ) = {worst_ratio:.4}"),
    )
}

#[derive(Clone, Copy)]
enum Side {
    Yes,
    No,
}

fn run_trial(kind: TesterKind, n: usize, k: usize, e1: f64, e2: f64, side: Side, rng: &mut RandomSource) -> TesterVerdict {
    if kind.is_boolean() {
        let f = match side {
            Side::Yes => perturbed_junta_boolean(n, k, e1, rng).unwrap(),
            Side::No => far_instance_boolean(n, k, e2, rng).unwrap(),
        };
        let expected = match side {
            Side::Yes => Classification::Yes,
            Side::No => Classification::No,
        };
        assert_eq!(f.certificate.class, expected);
        match kind {
            TesterKind::Alg3Bool => tolerant_boolean_junta_tester(&f.function, k, e1, e2, rng),
            _ => tolerant_boolean_junta_tester_local(&f.function, k, e1, e2, rng),
        }
        .unwrap()
    } else {
        let u = match side {
            Side::Yes => perturbed_junta_unitary(n, k, e1, rng).unwrap(),
            Side::No => far_instance_unitary(n, k, e2, rng).unwrap(),
        };
        match side {
            Side::Yes => assert!(u.certificate.distance <= e1),
            Side::No => assert!(u.certificate.distance >= e2),
        }
        match kind {
            TesterKind::Alg3 => tolerant_junta_tester(&u.unitary, k, e1, e2, rng),
            TesterKind::Alg7 => tolerant_junta_tester_local(&u.unitary, k, e1, e2, rng),
            _ => gapless_tolerant_junta_tester(&u.unitary, k, e1, e2, rng),
        }
        .unwrap()
    }
}

fn success_count(kind: TesterKind, n: usize, k: usize, e1: f64, e2: f64, side: Side, trials: usize, seed: u64) -> usize {
    let want = match side {
        Side::Yes => Verdict::Yes,
        Side::No => Verdict::No,
    };
    map_range(trials, MODE, |i| {
        let mut rng = RandomSource::for_trial(seed, i as u64);
        run_trial(kind, n, k, e1, e2, side, &mut rng).verdict == want
    })
    .into_iter()
    .filter(|&ok| ok)
    .count()
}

fn criterion_tester_success() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let plan = [
        (TesterKind::Alg3, [(6, 1), (6, 2)], 0.05, 0.9),
        (TesterKind::Alg7, [(6, 1), (6, 2)], 0.05, 0.9),
        (TesterKind::Alg3Bool, [(8, 1), (8, 2)], 0.05, 0.4),
        (TesterKind::Alg7Bool, [(8, 1), (8, 2)], 0.05, 0.4),
    ];
    for (idx, (kind, sizes, e1, e2)) in plan.into_iter().enumerate() {
        for (j, (n, k)) in sizes.into_iter().enumerate() {
            let seed = 0xC600 + (idx * 16 + j * 4) as u64;
            let yes = success_count(kind, n, k, e1, e2, Side::Yes, 50, seed);
            let no = success_count(kind, n, k, e1, e2, Side::No, 50, seed + 1);
            pass &= yes >= 42 && no >= 42;
            parts.push(format!("{kind} n={n} k={k}: yes {yes}/50, no {no}/50"));
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_warmup_accuracy() -> Outcome {
    let (tau, delta) = (0.02, 0.05);
    let results = map_range(30, MODE, |i| {
        let mut rng = RandomSource::for_trial(0xC7, i as u64);
        let k = 1 + i % 2;
        let u = if i % 3 == 2 {
            perturbed_junta_unitary(4, k, 0.3, &mut rng).unwrap().unitary
        } else {
            haar_random_unitary(16, &mut rng).unwrap()
        };
        let t = junta_core::generators::random_subset(4, k, &mut rng);
        let exact = dist_to_junta_on(&u, t).unwrap();
        let mut ledger = QueryLedger::new();
        let est = warmup_estimator(&u, t, tau, delta, &mut rng, &mut ledger).unwrap();
        (est - exact).abs()
    });
    let good = results.iter().filter(|&&e| e <= tau.sqrt()).count();
    let worst = results.iter().cloned().fold(0.0, f64::max);
    outcome(
        good >= 27,
        format!("{good}/30 within √τ = {:.4}; largest error {worst:.4}", tau.sqrt()),
    )
}

fn criterion_gapless() -> Outcome {
    let (e1, e2) = (0.3, 0.6);
    let yes = success_count(TesterKind::Alg8, 4, 1, e1, e2, Side::Yes, 30, 0xC8);
    let no = success_count(TesterKind::Alg8, 4, 1, e1, e2, Side::No, 30, 0xC9);
    outcome(yes >= 26 && no >= 26, format!("yes {yes}/30, no {no}/30"))
}

/// Closed-form counts computed here, independently of the library's sizing helpers.
fn extraction_rounds(k: usize, tau: f64) -> u64 {
    let k = k as f64;
    (2.0 * k / (0.25 * tau * tau) * (k * k / (0.01 * tau * tau)).ln()).ceil() as u64
}

fn criterion_query_counts() -> Outcome {
    let mut mismatches = Vec::new();
    let mut rng = RandomSource::new(0xCA);
    for run in 0..10u64 {
        // extraction alone
        let (u, _) = random_k_junta_unitary(5, 2, &mut rng).unwrap();
        let tau = 0.3 + 0.05 * run as f64;
        let mut ledger = QueryLedger::new();
        junta_core::extractors::coordinate_extractor(&u, 2, tau, &mut rng, &mut ledger).unwrap();
        if ledger.fourier_sample_calls != extraction_rounds(2, tau) {
            mismatches.push(format!("extractor run {run}"));
        }
        assert_eq!(ExtractorConfig::new(2, tau).unwrap().t_rounds().unwrap(), extraction_rounds(2, tau));

        // constant-gap tester: T + M Fourier samples
        let k = 1 + (run % 2) as usize;
        let out = tolerant_junta_tester(&u, k, 0.05, 0.9, &mut rng).unwrap();
        let delta = (0.9f64 * 0.9 / 4.0 - 2.0 * 0.05 * 0.05) / 3.0;
        let subsets = binomial(out.extracted.len() as u64, k as u64) as f64;
        let m = ((200.0 * (subsets + 1.0)).ln() / (2.0 * delta * delta)).ceil() as u64;
        let t = extraction_rounds(k, delta.sqrt());
        if out.queries.fourier_sample_calls != t + m || out.queries.controlled_u_applications != 0 {
            mismatches.push(format!("tester run {run}"));
        }

        // warmup estimator: M·4^k·2·m_shot controlled applications
        let small = haar_random_unitary(16, &mut rng).unwrap();
        let kt = 1 + (run % 2) as usize;
        let t = Subset::from_indices(0..kt);
        let (tau, delta) = (0.05, 0.05);
        let mut ledger = QueryLedger::new();
        warmup_estimator(&small, t, tau, delta, &mut rng, &mut ledger).unwrap();
        let rounds = ((1u64 << (kt + 1)) as f64 / (tau * tau) * (4.0 / delta).ln()).ceil() as u64;
        let entries = 1u64 << (2 * kt);
        let precision = tau / 2f64.powf(kt as f64 / 2.0 + 1.0);
        let failure = delta / (2.0 * rounds as f64 * entries as f64);
        let shots = (4.0 * (4.0 / failure).ln() / (precision * precision)).ceil() as u64;
        if ledger.controlled_u_applications != rounds * entries * 2 * shots {
            mismatches.push(format!("warmup run {run}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "extractor, constant-gap tester and warmup ledgers match closed forms on 10 runs each".to_string()
        } else {
            format!("mismatches: {}", mismatches.join(", "))
        },
    )
}

fn criterion_hard_instances() -> Outcome {
    let (k, a) = (5, 5);
    let c1 = 0.005 * (k as f64).sqrt();
    let bound = 2.0 * c1 / (a as f64).sqrt();
    let yes = map_range(100, MODE, |i| {
        let mut rng = RandomSource::for_trial(0xCB, i as u64);
        let s = sample_dyes_dno(k, a, c1, HardSide::Yes, &mut rng).unwrap();
        dist_to_k_junta_bool(&s.function, k, None).unwrap().0
    });
    let no = map_range(100, MODE, |i| {
        let mut rng = RandomSource::for_trial(0xCC, i as u64);
        let s = sample_dyes_dno(k, a, c1, HardSide::No, &mut rng).unwrap();
        dist_to_k_junta_bool(&s.function, k, None).unwrap().0
    });
    let worst_yes = yes.iter().cloned().fold(0.0, f64::max);
    let far = no.iter().filter(|&&d| d >= 0.2).count();
    let min_no = no.iter().cloned().fold(1.0, f64::min);
    outcome(
        worst_yes <= bound,
        format!(
            "yes draws: max distance {worst_yes:.4} (bound {bound:.4}); no draws: {far}/100 \
             at least 0.2-far (reported), min distance {min_no:.4}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Fourier-sample law", criterion_fourier_law),
        ("Parseval and embedding identities", criterion_parseval_and_embedding),
        ("Influence-sample sandwich", criterion_influence_sandwich),
        ("influence and distance approximation", criterion_approximation_lemmas),
        ("nuclear-norm perturbation", criterion_nuclear_perturbation),
        ("constant-gap tester success rates", criterion_tester_success),
        ("warmup estimator accuracy", criterion_warmup_accuracy),
        ("gapless tester", criterion_gapless),
        ("query-count exactness", criterion_query_counts),
        ("hard Boolean instances", criterion_hard_instances),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failures += (!result.pass) as usize;
        println!(
            "criterion {:>2} {} | {name}: {} [{:.1}s]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
