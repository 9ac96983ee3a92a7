//! Independent numerical oracles for the integration tests. Nothing here
//! calls into the library's special functions.

#![allow(dead_code)]

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = K15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kron += K15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7, 15): bisects the interval with the
/// largest error estimate until the total estimate drops below
/// `max(abs_tol, 1e-15 |I|)` or the interval budget runs out.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(f, a, b))];
    for _ in 0..4000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= abs_tol.max(1e-15 * total.abs()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(f, lo, mid)));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// Integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    adaptive(&f, a, b, tol)
}

/// Integral over consecutive breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> f64 {
    points
        .windows(2)
        .map(|w| adaptive(&f, w[0], w[1], tol / points.len() as f64))
        .sum()
}

/// `e^x E_m(x) = (1/x) int_0^inf e^{-u} (1 + u/x)^{-m} du`.
pub fn scaled_em_quadrature(m: u32, x: f64) -> f64 {
    let f = |u: f64| (-u).exp() * (1.0 + u / x).powi(-(m as i32));
    let mut cuts = vec![0.0];
    for c in [x * 1e-3, x * 1e-2, x * 0.1, x, 1.0, 4.0, 16.0] {
        if c > *cuts.last().unwrap() && c < 80.0 {
            cuts.push(c);
        }
    }
    cuts.push(80.0);
    integrate_pieces(f, &cuts, 1e-17) / x
}

/// `E_m(x)` by quadrature.
pub fn em_quadrature(m: u32, x: f64) -> f64 {
    (-x).exp() * scaled_em_quadrature(m, x)
}

/// Power series of `J0`, fine for `|x| <= 12` in double precision.
pub fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J0(x) = (1/pi) int_0^pi cos(x sin theta) d theta`.
pub fn j0_integral(x: f64) -> f64 {
    let pieces: Vec<f64> = (0..=64).map(|i| std::f64::consts::PI * i as f64 / 64.0).collect();
    integrate_pieces(|th| (x * th.sin()).cos(), &pieces, 1e-15) / std::f64::consts::PI
}

/// First zero of `J0` by bisection on the power series.
pub fn j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if j0_series(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `psi(x)` from Richardson-extrapolated central differences of `ln Gamma`,
/// taken at `x + n >= 5` and shifted back with `psi(x) = psi(x+1) - 1/x`.
pub fn digamma_oracle(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    while y < 5.0 {
        shift += 1.0 / y;
        y += 1.0;
    }
    let d = |h: f64| (libm::lgamma(y + h) - libm::lgamma(y - h)) / (2.0 * h);
    let h = 0.1;
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0 - shift
}

/// `E[ln X]` for `X ~ Gamma(shape, scale)` by quadrature of `ln x` against
/// the density, in the variable `v = ln x`.
pub fn gamma_log_mean_quadrature(shape: f64, scale: f64) -> f64 {
    let norm = libm::lgamma(shape) + shape * scale.ln();
    let f = |v: f64| {
        let x = v.exp();
        v * (shape * v - x / scale - norm).exp()
    };
    let centre = (shape * scale).ln();
    let pieces: Vec<f64> = (-80..=20).map(|i| centre + i as f64 * 0.5).collect();
    integrate_pieces(f, &pieces, 1e-14)
}

/// `E[ln Y]` where `P(Y > y) = e^{-K y} / (1 + s y)^{e}`, `s = P theta t / K`,
/// via `E[ln Y] = -int_0^1 F(y)/y dy + int_1^inf (1 - F(y))/y dy`.
pub fn expected_log_y_quadrature(p: f64, t: f64, k: usize, theta: f64, exponent: f64) -> f64 {
    let kf = k as f64;
    let s = p * theta * t / kf;
    let tail = |y: f64| (-kf * y - exponent * (s * y).ln_1p()).exp();
    // below 1 work in v = ln y so the 1/y factor is harmless
    let low = |v: f64| {
        let y = v.exp();
        -(1.0 - tail(y))
    };
    let lows: Vec<f64> = (-120..=0).map(|i| i as f64 * 0.5).collect();
    let high = |y: f64| tail(y) / y;
    let highs = [1.0, 2.0, 4.0, 8.0, 16.0, 40.0, 100.0];
    integrate_pieces(low, &lows, 1e-15) + integrate_pieces(high, &highs, 1e-15)
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
