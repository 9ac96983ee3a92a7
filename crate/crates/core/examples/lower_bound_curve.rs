//! The analytical lower bound next to a Monte Carlo estimate of the
//! approximated sum-rate it bounds.

use rsma_mobility::bound::{aesr_monte_carlo_curve, LowerBound};

fn main() {
    let (users, n_t, eps) = (4, 8, 0.5);
    for snr_db in [20.0, 30.0, 40.0] {
        let p = 10f64.powf(snr_db / 10.0);
        let bound = LowerBound::new(p, users, n_t, eps).unwrap();
        let terms = bound.terms(0.5).unwrap();
        println!(
            "{snr_db} dB: D = {:.4}, theta = {:.4}, round(DK) = {}, mu = {:.4}, rho = {:?}",
            terms.d_hat, terms.theta_hat, terms.dk_rounded, terms.mu, terms.rho
        );
        let ts: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
        let mc = aesr_monte_carlo_curve(&ts, p, users, n_t, eps, 20_000, 1).unwrap();
        println!("   t    private   common    bound     approx. rate (MC)");
        for e in mc {
            println!(
                "  {:.1}  {:8.4}  {:8.4}  {:8.4}   {:8.4} +/- {:.4}",
                e.t,
                bound.private(e.t).unwrap(),
                bound.common(e.t).unwrap(),
                bound.value(e.t).unwrap(),
                e.mean,
                e.half_width_95
            );
        }
    }
}
