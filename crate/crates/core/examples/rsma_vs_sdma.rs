//! Sum-rate against SNR for RSMA with the closed-form split and for SDMA,
//! with the users moving at 30 km/h.
//!
//! `cargo run --release --example rsma_vs_sdma -- out.csv` also writes the CSV.

use rsma_mobility::channel::{CommonPrecoderMode, ScenarioConfig};
use rsma_mobility::sweep::*;

fn main() {
    let mut base = ScenarioConfig::with_mobility(4, 4, 0.0, 30.0);
    base.common_precoder_mode = CommonPrecoderMode::DominantEigenvector;
    base.trials = 4000;
    let spec = SweepSpec {
        base,
        sweep_axis: SweepAxis::SnrDb,
        values: (0..=8).map(|i| 5.0 * i as f64).collect(),
        schemes: vec![Scheme::RsmaClosedForm, Scheme::RsmaExhaustiveMc, Scheme::Sdma],
    };
    let options = SweepOptions {
        granularity: 0.01,
        fixed_t: None,
    };
    let rows = run_sweep(&spec, &options).unwrap();

    println!("eps = {:.4}", rows[0].epsilon);
    println!("{:>5}  {:>22}  {:>22}  {:>8}", "dB", "rsma closed form", "rsma best t on grid", "sdma");
    for chunk in rows.chunks(spec.schemes.len()) {
        println!(
            "{:>5}  {:>8.3} (t={:<9.3e})  {:>8.3} (t={:<9.3e})  {:>8.3}",
            chunk[0].axis_value,
            chunk[0].sum_rate,
            chunk[0].t_used,
            chunk[1].sum_rate,
            chunk[1].t_used,
            chunk[2].sum_rate
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        emit_csv(&rows, std::path::Path::new(&path)).unwrap();
        println!("wrote {path}");
    }
}
