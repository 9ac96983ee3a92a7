use rsma_mobility::allocation::*;

fn main() {
    let cases = [(4usize, 4usize, 0.5), (4, 8, 0.5), (8, 32, 0.5), (8, 32, 0.3), (2, 2, 0.0), (4, 4, 1.0)];
    println!("  K  n_t   eps   dB   closed-form t   branch         bound    grid t   bound");
    for (k, nt, eps) in cases {
        for snr_db in [10.0, 20.0, 30.0, 40.0] {
            let p = 10f64.powf(snr_db / 10.0);
            let cf = t_opt_closed_form(p, k, nt, eps).unwrap();
            let ex = t_opt_exhaustive(p, k, nt, eps, SearchObjective::LowerBound, DEFAULT_GRANULARITY, None).unwrap();
            println!(
                "{k:>3} {nt:>4} {eps:>5.2} {snr_db:>4}   {:<14.6e}  {:<13} {:>6.3}   {:<7} {:>6.3}",
                cf.t_opt,
                cf.branch.as_str(),
                cf.objective_at_t,
                ex.t_opt,
                ex.objective_at_t
            );
        }
    }

    // the simple two-user form
    for p in [15.0, 100.0, 1000.0] {
        println!(
            "two users, outdated CSIT, P = {p}: closed form {:.6}, 2/(P - 8.62) = {:.6}",
            t_opt_closed_form(p, 2, 2, 0.0).unwrap().t_opt,
            t_opt_asymptotic(p, 2, AsymptoticCase::Eps0K2).unwrap()
        );
    }
}
