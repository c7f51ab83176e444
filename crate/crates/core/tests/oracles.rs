//! Dense and closed-form reference checks plus property tests.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spamsep::analysis::{benchmark_circuit_2q, benchmark_circuit_4q, fidelity, hellinger, ideal_distribution_2q};
use spamsep::characterize::{zne_extrapolate, ZnePoint};
use spamsep::characterize::{build_characterization_plan, run_characterization, Protocol, SimulatedDevice};
use spamsep::mitigate::{
    apply_inverse, first_order_sp, mitigate_sp_exact, nearest_distribution, project_to_simplex, sprm_pipeline,
    MitigationInputs,
};
use spamsep::sim::{exact_distribution, sample_counts, simulate_ideal, Mode};
use spamsep::{AssignmentMatrix, CountsRecord, Distribution, ErrorRates, NoiseModel, QuasiDistribution};

use common::{brute_force_simplex, dense_kron, dist2, random_dist, random_factor};

fn dist_strategy(n: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.001f64..1.0, 1 << n).prop_map(move |v| {
        let s: f64 = v.iter().sum();
        Distribution::new(n, v.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

fn rates_strategy() -> impl Strategy<Value = ErrorRates> {
    (0.0f64..0.2, 0.0f64..0.2, 0.0f64..0.2).prop_map(|(s, a, b)| ErrorRates::new(s, a, b).unwrap())
}

#[test]
fn factored_inverse_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=5 {
        for _ in 0..10 {
            let factors: Vec<_> = (0..n).map(|_| random_factor(&mut rng, 0.4)).collect();
            let a = AssignmentMatrix::new(factors.clone()).unwrap();
            let p = Distribution::new(n, random_dist(&mut rng, 1 << n)).unwrap();
            let dense = dense_kron(&factors);
            let solved = dense.clone().lu().solve(&DVector::from_column_slice(p.probs())).unwrap();
            let fast = apply_inverse(&a, &p).unwrap();
            for (x, y) in fast.values().iter().zip(solved.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            let forward = dense * DVector::from_column_slice(p.probs());
            for (x, y) in a.apply(p.probs()).unwrap().iter().zip(forward.iter()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn exact_sp_mitigation_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=4usize {
        let dim = 1 << n;
        let deltas: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.3)).collect();
        let by_prep: BTreeMap<usize, Distribution> =
            (0..dim).map(|s| (s, Distribution::new(n, random_dist(&mut rng, dim)).unwrap())).collect();
        let q = dense_kron(&deltas.iter().map(|&d| [[1.0 - d, d], [d, 1.0 - d]]).collect::<Vec<_>>());
        let m = DMatrix::from_fn(dim, dim, |i, s| by_prep[&s].probs()[i]);
        let p_hat = m * q.try_inverse().unwrap();
        let got = mitigate_sp_exact(&by_prep, &deltas).unwrap();
        for (i, v) in got.values().iter().enumerate() {
            assert!((v - p_hat[(i, 0)]).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_sp_mitigation_recovers_noiseless_circuit() {
    let theta = 0.7;
    let c = benchmark_circuit_4q(theta);
    let deltas = [0.03, 0.01, 0.05, 0.02];
    let noise = NoiseModel::from_rates(deltas.iter().map(|&d| ErrorRates::new(d, 0.0, 0.0).unwrap()).collect());
    let by_prep: BTreeMap<usize, Distribution> = (0..16usize)
        .map(|s| {
            let flips: Vec<usize> = (0..4).filter(|j| (s >> j) & 1 == 1).collect();
            (s, exact_distribution(&c.with_initial_x(&flips).unwrap(), &noise, 1).unwrap())
        })
        .collect();
    let got = mitigate_sp_exact(&by_prep, &deltas).unwrap();
    let ideal = simulate_ideal(&c).unwrap();
    for (x, y) in got.values().iter().zip(ideal.probs()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn simplex_projection_beats_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for dim in [2usize, 3, 4] {
        for _ in 0..20 {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..1.0)).collect();
            let p = project_to_simplex(&v);
            let g = brute_force_simplex(&v, 60);
            assert!(dist2(&p, &v) <= dist2(&g, &v) + 1e-12);
            assert!(dist2(&p, &g) <= 2.0 / 60.0);
        }
    }
}

#[test]
fn counts_round_trip_through_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for n in 1..=4 {
        let dense: Vec<u64> = (0..1 << n).map(|_| rng.random_range(0..1000)).collect();
        if dense.iter().sum::<u64>() == 0 {
            continue;
        }
        let c = CountsRecord::from_dense(n, &dense).unwrap();
        let d = c.to_distribution().unwrap();
        let total = c.shots() as f64;
        for (k, &x) in dense.iter().enumerate() {
            assert!((d.probs()[k] * total - x as f64).abs() < 1e-9);
        }
        assert_eq!(c.dense(), dense);
    }
}

#[test]
fn fidelity_and_hellinger_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let p = Distribution::new(n, random_dist(&mut rng, 1 << n)).unwrap();
        let q = Distribution::new(n, random_dist(&mut rng, 1 << n)).unwrap();
        let f = fidelity(&p, &q).unwrap();
        let h = hellinger(&p, &q).unwrap();
        assert!((f.sqrt() - (1.0 - h * h)).abs() < 1e-12);
        assert!((f - fidelity(&q, &p).unwrap()).abs() < 1e-15);
        assert!((0.0..=1.0 + 1e-12).contains(&f));
        assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_qubit_closed_form_matches_simulator() {
    for k in 0..20 {
        let theta = k as f64 * PI / 19.0;
        let sim = simulate_ideal(&benchmark_circuit_2q(theta)).unwrap();
        let closed = ideal_distribution_2q(theta);
        for (a, b) in sim.probs().iter().zip(closed.probs()) {
            assert!((a - b).abs() < 1e-12, "theta {theta}");
        }
    }
}

#[test]
fn noiseless_simulation_equals_ideal() {
    let c = benchmark_circuit_4q(1.1);
    let noisy = exact_distribution(&c, &NoiseModel::noiseless(4), 1).unwrap();
    let ideal = simulate_ideal(&c).unwrap();
    for (a, b) in noisy.probs().iter().zip(ideal.probs()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn characterization_recovers_random_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let rates: Vec<ErrorRates> = (0..2)
            .map(|_| {
                ErrorRates::new(rng.random_range(0.0..0.2), rng.random_range(0.0..0.2), rng.random_range(0.0..0.2))
                    .unwrap()
            })
            .collect();
        let noise = NoiseModel::from_rates(rates.clone());
        let plan = build_characterization_plan(&[(0, 1), (1, 0)], &Protocol::Plain, None).unwrap();
        let report = run_characterization(&plan, &Protocol::Plain, &SimulatedDevice::new(noise, Mode::Exact)).unwrap();
        for row in &report.qubits {
            let r = rates[row.qubit];
            assert!((row.delta_sp.value - r.delta_sp).abs() < 1e-10);
            assert!((row.delta_m0.value - r.delta_m0).abs() < 1e-10);
            assert!((row.delta_m1.value - r.delta_m1).abs() < 1e-10);
        }
    }
}

#[test]
fn sampled_estimates_cover_truth() {
    let noise = NoiseModel::from_rates(vec![
        ErrorRates::new(0.02, 0.01, 0.04).unwrap(),
        ErrorRates::new(0.015, 0.02, 0.03).unwrap(),
    ]);
    let plan = build_characterization_plan(&[(0, 1)], &Protocol::Plain, None).unwrap();
    let trials = 200;
    let mut covered = 0;
    for seed in 0..trials {
        let dev = SimulatedDevice::new(noise.clone(), Mode::Shots { shots: 100_000, seed });
        let row = run_characterization(&plan, &Protocol::Plain, &dev).unwrap().qubits.remove(0);
        covered += ((row.delta_sp.value - 0.02).abs() <= 4.0 * row.delta_sp.se) as usize;
    }
    assert!(covered as f64 >= 0.99 * trials as f64, "{covered}/{trials}");
}

#[test]
fn sampling_converges_in_total_variation() {
    let exact = exact_distribution(
        &benchmark_circuit_4q(0.9),
        &NoiseModel::uniform(4, ErrorRates::new(0.03, 0.02, 0.05).unwrap()),
        1,
    )
    .unwrap();
    let sampled = sample_counts(&exact, 1_000_000, 3).unwrap().to_distribution().unwrap();
    let tv: f64 = exact.probs().iter().zip(sampled.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.005, "tv {tv}");
}

#[test]
fn first_order_residual_is_quadratic() {
    let theta = PI / 5.0;
    let c = benchmark_circuit_2q(theta);
    let ideal = ideal_distribution_2q(theta);
    let residual = |d: f64| {
        let noise = NoiseModel::uniform(2, ErrorRates::new(d, 0.0, 0.0).unwrap());
        let raw = exact_distribution(&c, &noise, 1).unwrap();
        let flipped: Vec<Distribution> = (0..2)
            .map(|q| exact_distribution(&c.with_initial_x(&[q]).unwrap(), &noise, 1).unwrap())
            .collect();
        let q = first_order_sp(&raw, &flipped, &[d, d]).unwrap();
        q.values().iter().zip(ideal.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>()
    };
    for d in [0.005, 0.01, 0.02] {
        let ratio = residual(2.0 * d) / residual(d);
        assert!((3.5..=4.5).contains(&ratio), "d {d}: ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn readout_inverse_undoes_forward(
        rates in prop::collection::vec(rates_strategy(), 3),
        p in dist_strategy(3),
    ) {
        let a = AssignmentMatrix::from_readout(&rates).unwrap();
        let observed = a.apply(p.probs()).unwrap();
        let back = apply_inverse(&a, &QuasiDistribution::new(3, observed).unwrap()).unwrap();
        for (x, y) in back.values().iter().zip(p.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_a_distribution_and_idempotent(mut v in prop::collection::vec(-1.0f64..2.0, 8)) {
        let shift = (1.0 - v.iter().sum::<f64>()) / 8.0;
        v.iter_mut().for_each(|x| *x += shift);
        let q = QuasiDistribution::new(3, v).unwrap();
        let p = nearest_distribution(&q).unwrap();
        prop_assert!(p.probs().iter().all(|&x| x >= 0.0));
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let again = nearest_distribution(&p.to_quasi()).unwrap();
        for (x, y) in again.probs().iter().zip(p.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sprm_order_of_corrections_commutes(
        rates in prop::collection::vec(rates_strategy(), 2),
        raw in dist_strategy(2),
        f0 in dist_strategy(2),
        f1 in dist_strategy(2),
    ) {
        let inputs = MitigationInputs { p_raw: raw.clone(), p_flipped: vec![f0.clone(), f1.clone()], rates: rates.clone() };
        let pipeline = sprm_pipeline(&inputs).unwrap();
        let deltas: Vec<f64> = rates.iter().map(|r| r.delta_sp).collect();
        let sp_first = first_order_sp(&raw, &[f0, f1], &deltas).unwrap();
        let a_m = AssignmentMatrix::from_readout(&rates).unwrap();
        let swapped = apply_inverse(&a_m, &sp_first).unwrap();
        for (x, y) in swapped.values().iter().zip(pipeline.quasi.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sp_correction_grows_with_delta(p in dist_strategy(2), f in dist_strategy(2), d in 0.0f64..0.2) {
        let shift = |d: f64| {
            let q = first_order_sp(&p, std::slice::from_ref(&f), &[d]).unwrap();
            q.values().iter().zip(p.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>()
        };
        prop_assert!(shift(d + 0.05) >= shift(d) - 1e-15);
    }

    #[test]
    fn zne_fit_ignores_point_order(
        values in prop::collection::vec(0.0f64..0.3, 3),
        ses in prop::collection::vec(0.001f64..0.01, 3),
    ) {
        let pts: Vec<ZnePoint> = [1u32, 3, 5]
            .iter()
            .zip(values.iter().zip(&ses))
            .map(|(&m, (&value, &se))| ZnePoint { m, value, se })
            .collect();
        let a = zne_extrapolate(&pts).unwrap();
        let reversed: Vec<ZnePoint> = pts.iter().rev().copied().collect();
        let b = zne_extrapolate(&reversed).unwrap();
        prop_assert!((a.intercept.value - b.intercept.value).abs() < 1e-12);
        prop_assert!((a.intercept.se - b.intercept.se).abs() < 1e-12);
        prop_assert!((a.slope - b.slope).abs() < 1e-12);
    }

    #[test]
    fn sampled_counts_sum_to_shots(p in dist_strategy(3), shots in 1u64..100_000, seed in any::<u64>()) {
        let c = sample_counts(&p, shots, seed).unwrap();
        prop_assert_eq!(c.shots(), shots);
        prop_assert_eq!(c, sample_counts(&p, shots, seed).unwrap());
    }
}
