//! Special functions and random samplers used by the channel model and the
//! analytical bound.
//!
//! Everything here is a pure function of its arguments. The random samplers
//! draw from a [`RandomStream`], a counter-based ChaCha stream addressed by a
//! `(master_seed, stream_index)` pair, so that trial `i` of any Monte Carlo
//! loop sees the same numbers no matter which thread evaluates it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// A reproducible, splittable random number stream.
///
/// Two streams built from the same `(master_seed, stream_index)` produce the
/// same sequence on every platform. Distinct indices select disjoint ChaCha
/// streams of the same key.
#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Mixes a tag into a seed (splitmix64 finalizer) so that independent
/// experiments sharing one user-facing seed do not share streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bessel function of the first kind, order zero.
///
/// Power series for `|x| < 1`, Miller's backward recurrence normalised by
/// `J0 + 2 sum J_2k = 1` otherwise.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_j0", format!("non-finite argument {x}")));
    }
    let ax = x.abs();
    if ax < 1.0 {
        let q = -0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            term *= q / (kf * kf);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        return Ok(sum);
    }

    let start = {
        let n = (ax + 30.0 + 6.0 * ax.sqrt()) as usize;
        n + n % 2
    };
    let two_over_x = 2.0 / ax;
    let mut j_next = 0.0; // J_{n+1}
    let mut j_cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let j_prev = n as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{n-1}
        if (n - 1) % 2 == 0 && n > 1 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
        if n == 1 {
            j0 = j_cur;
        }
    }
    norm += j0;
    Ok(j0 / norm)
}

/// Digamma function `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("digamma", format!("need finite x > 0, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_2k / (2k) for k = 1..7
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut series = 0.0;
    let mut pow = inv2;
    for c in COEFFS {
        series += c * pow;
        pow *= inv2;
    }
    Ok(shift + x.ln() - 0.5 / x - series)
}

fn check_exp_integral_arg(func: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(func, format!("need finite x > 0, got {x}")));
    }
    Ok(())
}

/// `E_1(x)` by its convergent power series, valid for `0 < x <= 1`.
fn exp_integral_e1_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -x / kf;
        let delta = term / kf;
        sum += delta;
        if delta.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `e^x E_m(x)` by the modified Lentz continued fraction, for `x > 1`, `m >= 1`.
fn scaled_exp_integral_cf(m: u64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mf = m as f64;
    let mut b = x + mf;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000u64 {
        let fi = i as f64;
        let a = -fi * (mf - 1.0 + fi);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Scaled generalized exponential integral `e^x E_m(x)`.
///
/// `E_m(x)` itself under- or overflows long before this product does, which
/// matters where the two appear together (e.g. `e^{K^2/(P theta t)}` for
/// small `t`).
pub fn scaled_exp_integral_em(m: u64, x: f64) -> Result<f64> {
    check_exp_integral_arg("scaled_exp_integral_em", x)?;
    if m == 0 {
        return Ok(1.0 / x);
    }
    if x > 1.0 {
        return Ok(scaled_exp_integral_cf(m, x));
    }
    // upward recurrence is stable here: each step damps errors by x / k <= 1
    let mut s = x.exp() * exp_integral_e1_series(x);
    for k in 1..m {
        s = (1.0 - x * s) / k as f64;
    }
    Ok(s)
}

/// Generalized exponential integral `E_m(x) = int_1^inf e^{-xt} / t^m dt`.
pub fn exp_integral_em(m: u64, x: f64) -> Result<f64> {
    check_exp_integral_arg("exp_integral_em", x)?;
    if m == 0 {
        return Ok((-x).exp() / x);
    }
    if x > 1.0 {
        return Ok(scaled_exp_integral_cf(m, x) * (-x).exp());
    }
    let mut e = exp_integral_e1_series(x);
    let emx = (-x).exp();
    for k in 1..m {
        e = (emx - x * e) / k as f64;
    }
    Ok(e)
}

/// `sum_{m=1}^{n} e^x E_m(x)`, sharing one recurrence pass when `x <= 1`.
pub fn scaled_exp_integral_sum(n: u64, x: f64) -> Result<f64> {
    check_exp_integral_arg("scaled_exp_integral_sum", x)?;
    if n == 0 {
        return Ok(0.0);
    }
    if x > 1.0 {
        return Ok((1..=n).map(|m| scaled_exp_integral_cf(m, x)).sum());
    }
    let mut s = x.exp() * exp_integral_e1_series(x);
    let mut total = s;
    for k in 1..n {
        s = (1.0 - x * s) / k as f64;
        total += s;
    }
    Ok(total)
}

/// `Gamma(n, -x) / (e^x Gamma(n))` for integer `n >= 1`, i.e. the truncated
/// exponential series `sum_{k=0}^{n-1} (-x)^k / k!`.
pub fn upper_gamma_neg_ratio(n: u64, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("upper_gamma_neg_ratio", "order must be >= 1"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= -x / k as f64;
        sum += term;
    }
    Ok(sum)
}

/// `floor(n! e) / n! = sum_{k=0}^{n} 1/k!` (exact for `n >= 1`).
pub fn truncated_e(n: u64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        term /= k as f64;
        sum += term;
    }
    sum
}

/// Draws `n` i.i.d. `CN(0, 1)` entries (real and imaginary parts each `N(0, 1/2)`).
pub fn sample_complex_gaussian_vector(n: usize, rng: &mut RandomStream) -> DVector<Complex64> {
    DVector::from_iterator(n, (0..n).map(|_| sample_complex_gaussian(rng)))
}

pub(crate) fn sample_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Reusable `Gamma(shape, scale)` sampler; density
/// `x^{shape-1} e^{-x/scale} / (Gamma(shape) scale^shape)`.
#[derive(Clone, Copy, Debug)]
pub struct GammaSampler {
    dist: rand_distr::Gamma<f64>,
}

impl GammaSampler {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
            return Err(Error::domain(
                "sample_gamma",
                format!("shape and scale must be positive, got ({shape}, {scale})"),
            ));
        }
        let dist = rand_distr::Gamma::new(shape, scale)
            .map_err(|e| Error::domain("sample_gamma", e.to_string()))?;
        Ok(Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// One draw from `Gamma(shape, scale)`.
pub fn sample_gamma(shape: f64, scale: f64, rng: &mut RandomStream) -> Result<f64> {
    Ok(GammaSampler::new(shape, scale)?.sample(rng))
}
