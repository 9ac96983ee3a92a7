use rsma_mobility::special::*;

fn main() {
    println!("J0");
    for x in [0.0, 0.5, 1.0, 1.52716, 2.404826, 5.520078, 10.0] {
        println!("  J0({x}) = {:.12}", bessel_j0(x).unwrap());
    }

    println!("digamma");
    for x in [0.5, 1.0, 2.0, 4.5676, 10.0, 100.0] {
        println!("  psi({x}) = {:.12}", digamma(x).unwrap());
    }

    // e^x E_m(x) stays O(1/x) even where e^x alone overflows
    println!("scaled exponential integrals e^x E_m(x)");
    for x in [1e-3, 0.1, 1.0, 10.0, 800.0] {
        let row: Vec<String> = [1u64, 2, 5, 18]
            .iter()
            .map(|&m| format!("{:.6e}", scaled_exp_integral_em(m, x).unwrap()))
            .collect();
        println!("  x = {x:<6} m = 1, 2, 5, 18: {}", row.join("  "));
    }
    println!(
        "  sum_(m=1..18) at x = 0.05: {:.10}",
        scaled_exp_integral_sum(18, 0.05).unwrap()
    );
}
