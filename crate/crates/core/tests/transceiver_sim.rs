mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rsma_mobility::channel::{ChannelState, CommonPrecoderMode, ScenarioConfig};
use rsma_mobility::special::{sample_complex_gaussian_vector, RandomStream};
use rsma_mobility::transceiver::*;

fn matrix(rows: usize, cols: usize, seed: u64, idx: u64) -> DMatrix<Complex64> {
    let mut rng = RandomStream::new(seed, idx);
    let v = sample_complex_gaussian_vector(rows * cols, &mut rng);
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn estimates_are_reproducible_and_seed_dependent() {
    let mut cfg = ScenarioConfig::with_epsilon(4, 4, 20.0, 0.5);
    cfg.trials = 3000;
    cfg.seed = 3;
    let a = monte_carlo_sum_rate(&cfg, 0.6).unwrap();
    let b = monte_carlo_sum_rate(&cfg, 0.6).unwrap();
    assert_eq!(a, b);
    cfg.seed = 4;
    assert_ne!(monte_carlo_sum_rate(&cfg, 0.6).unwrap().mean, a.mean);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let mut cfg = ScenarioConfig::with_epsilon(8, 4, 25.0, 0.7);
    cfg.trials = 2500;
    cfg.common_precoder_mode = CommonPrecoderMode::DominantEigenvector;
    let ts = [0.1, 0.5, 1.0];
    let one = in_pool(1, || monte_carlo_sum_rate_curve(&cfg, &ts).unwrap());
    let many = in_pool(5, || monte_carlo_sum_rate_curve(&cfg, &ts).unwrap());
    assert_eq!(one, many);
}

#[test]
fn curve_points_match_single_estimates() {
    let mut cfg = ScenarioConfig::with_epsilon(4, 2, 15.0, 0.3);
    cfg.trials = 1000;
    let curve = monte_carlo_sum_rate_curve(&cfg, &[0.2, 0.9]).unwrap();
    assert_eq!(curve[1], monte_carlo_sum_rate(&cfg, 0.9).unwrap());
}

#[test]
fn perfect_csit_private_streams_scale_with_degrees_of_freedom() {
    // with eps = 1 and no common stream each user gets an interference-free
    // link, so +10 dB adds close to K log2(10) bits at high SNR
    let k = 4;
    let rate = |snr: f64| {
        let mut cfg = ScenarioConfig::with_epsilon(8, k, snr, 1.0);
        cfg.trials = 4000;
        monte_carlo_sum_rate(&cfg, 1.0).unwrap().mean
    };
    let gain = rate(50.0) - rate(40.0);
    let dof = k as f64 * 10f64.log2();
    assert!((gain / dof - 1.0).abs() < 0.01, "gain {gain} vs {dof}");
}

#[test]
fn per_stream_means_add_up() {
    let mut cfg = ScenarioConfig::with_epsilon(4, 3, 20.0, 0.5);
    cfg.trials = 1500;
    let e = monte_carlo_sum_rate(&cfg, 0.4).unwrap();
    assert_eq!(e.per_stream_means.len(), 4);
    let total: f64 = e.per_stream_means.iter().sum();
    assert!((total - e.mean).abs() < 1e-9);
    assert!(e.half_width_95 > 0.0);
    assert_eq!(e.trials, 1500);
}

#[test]
fn full_private_split_has_no_common_contribution() {
    let mut cfg = ScenarioConfig::with_epsilon(4, 4, 20.0, 0.5);
    cfg.trials = 800;
    let e = monte_carlo_sum_rate(&cfg, 1.0).unwrap();
    assert_eq!(e.per_stream_means[0], 0.0);
}

#[test]
fn invalid_split_is_rejected() {
    let cfg = ScenarioConfig::with_epsilon(4, 4, 20.0, 0.5);
    assert!(monte_carlo_sum_rate(&cfg, 0.0).is_err());
    assert!(monte_carlo_sum_rate(&cfg, 1.01).is_err());
}

fn parts(nt: usize, k: usize, seed: u64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    (matrix(nt, k, seed, 0), matrix(nt, k, seed, 1))
}

fn realization(nt: usize, k: usize, eps: f64, seed: u64) -> ChannelState {
    let (csit, innov) = parts(nt, k, seed);
    ChannelState::evolve(csit, &innov, eps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sum_rate_is_invariant_to_user_order(seed in 0u64..10_000, eps in 0.0f64..1.0, t in 0.05f64..1.0) {
        let (nt, k) = (5, 3);
        let (csit, innov) = parts(nt, k, seed);
        let perm = [2usize, 0, 1];
        let pick = |m: &DMatrix<Complex64>| DMatrix::from_fn(nt, k, |r, c| m[(r, perm[c])]);
        let sp = ChannelState::evolve(pick(&csit), &pick(&innov), eps).unwrap();
        let s = ChannelState::evolve(csit, &innov, eps).unwrap();
        let common = matrix(nt, 1, seed, 2).column(0).normalize();
        let a = PrecoderSet::new(common.clone(), zf_precoders(s.csit()).unwrap(), t).unwrap();
        let b = PrecoderSet::new(common, zf_precoders(sp.csit()).unwrap(), t).unwrap();
        let ra = instantaneous_rates(&s, &a, 300.0).unwrap();
        let rb = instantaneous_rates(&sp, &b, 300.0).unwrap();
        prop_assert!((ra.sum - rb.sum).abs() < 1e-8 * ra.sum.max(1.0));
        for (c, &p) in perm.iter().enumerate() {
            prop_assert!((rb.private_rates[c] - ra.private_rates[p]).abs() < 1e-8);
        }
    }

    #[test]
    fn rates_grow_with_power(seed in 0u64..10_000, eps in 0.0f64..1.0, t in 0.05f64..1.0) {
        let s = realization(4, 4, eps, seed);
        let mut rng = RandomStream::new(seed, 5);
        let pre = build_precoders(s.csit(), CommonPrecoderMode::DominantEigenvector, t, &mut rng).unwrap();
        let lo = instantaneous_rates(&s, &pre, 100.0).unwrap();
        let hi = instantaneous_rates(&s, &pre, 200.0).unwrap();
        prop_assert!(hi.common_rate >= lo.common_rate);
        for (a, b) in lo.private_rates.iter().zip(&hi.private_rates) {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn zf_nulls_leakage_on_csit(seed in 0u64..10_000, k in 1usize..6, extra in 0usize..4) {
        let h = matrix(k + extra, k, seed, 0);
        let p = zf_precoders(&h).unwrap();
        let g = h.adjoint() * &p;
        for r in 0..k {
            for c in 0..k {
                if r != c {
                    prop_assert!(g[(r, c)].norm() < 1e-10);
                }
            }
            prop_assert!((p.column(r).norm() - 1.0).abs() < 1e-12);
        }
    }
}
