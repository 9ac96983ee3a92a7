//! CSIT quality against user speed under the Jakes model.
//!
//! `cargo run --example jakes_correlation -- 3.5e9 2.5e-3`

use rsma_mobility::channel::time_correlation;

fn main() {
    let mut args = std::env::args().skip(1);
    let carrier: f64 = args.next().map_or(3.5e9, |s| s.parse().expect("carrier in Hz"));
    let delay: f64 = args.next().map_or(2.5e-3, |s| s.parse().expect("delay in s"));

    println!("carrier {:.3} GHz, delay {} ms", carrier / 1e9, delay * 1e3);
    println!("{:>8}  {:>9}  {:>9}", "km/h", "eps", "eps^2");
    for v in [0.0, 1.0, 3.0, 5.0, 10.0, 20.0, 30.0, 40.0, 47.0, 60.0, 90.0, 120.0] {
        let eps = time_correlation(v, carrier, delay).unwrap();
        println!("{v:>8.1}  {eps:>9.5}  {:>9.5}", eps * eps);
    }
}
