//! Monte Carlo ergodic sum-rate against the power split.
//!
//! Pass a scenario JSON to override the built-in one:
//! `cargo run --release --example ergodic_sum_rate -- crates/core/configs/mobile_4x4_30kmh.json`

use rsma_mobility::channel::{CommonPrecoderMode, ScenarioConfig};
use rsma_mobility::transceiver::Realizations;

fn main() {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ScenarioConfig::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap(),
        None => {
            let mut c = ScenarioConfig::with_mobility(4, 4, 30.0, 30.0);
            c.common_precoder_mode = CommonPrecoderMode::DominantEigenvector;
            c.trials = 5000;
            c
        }
    };
    cfg.validate().unwrap();
    println!(
        "n_t={} K={} {} dB eps={:.4} trials={}",
        cfg.n_t,
        cfg.users,
        cfg.snr_db,
        cfg.epsilon().unwrap(),
        cfg.trials
    );

    let real = Realizations::draw(&cfg).unwrap();
    let ts: Vec<f64> = [1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 0.6, 1.0].to_vec();
    for e in real.estimate_curve(&ts).unwrap() {
        println!(
            "t = {:<7} sum {:7.3} +/- {:.3}   common {:6.3}",
            e.t, e.mean, e.half_width_95, e.per_stream_means[0]
        );
    }
    if real.degenerate_redraws() > 0 {
        println!("{} rank-deficient draws were redrawn", real.degenerate_redraws());
    }
}
