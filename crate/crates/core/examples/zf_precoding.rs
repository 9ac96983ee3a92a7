//! One channel realization through the transmitter: ZF private precoders
//! from outdated CSIT, the common precoder, and the resulting leakage on
//! the channel the users actually see.

use nalgebra::DMatrix;
use rsma_mobility::channel::{draw_channel_pair_with, CommonPrecoderMode};
use rsma_mobility::special::RandomStream;
use rsma_mobility::transceiver::{build_precoders, instantaneous_rates, LinkGains};

fn print_gains(label: &str, g: &DMatrix<f64>) {
    println!("{label}");
    for r in 0..g.nrows() {
        let row: Vec<String> = g.row(r).iter().map(|v| format!("{v:9.2e}")).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() {
    let (n_t, users, eps) = (6, 4, 0.7);
    let mut rng = RandomStream::new(2024, 0);
    let state = draw_channel_pair_with(n_t, users, eps, &mut rng).unwrap();
    let pre = build_precoders(state.csit(), CommonPrecoderMode::DominantEigenvector, 0.3, &mut rng).unwrap();

    let on_csit = (state.csit().adjoint() * pre.privates()).map(|z| z.norm_sqr());
    print_gains("|h_k^H p_j|^2 on the CSIT (rows k, columns j)", &on_csit);
    let on_truth = LinkGains::measure(&state, &pre);
    print_gains("same on the true channel", &on_truth.private);
    println!("common precoder gains {:?}", on_truth.common.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>());

    for snr_db in [10.0, 20.0, 30.0] {
        let r = instantaneous_rates(&state, &pre, 10f64.powf(snr_db / 10.0)).unwrap();
        println!(
            "{snr_db:>4} dB: common {:.3}  private {:?}  sum {:.3}",
            r.common_rate,
            r.private_rates.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
            r.sum
        );
    }
}
