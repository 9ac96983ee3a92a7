//! Analytical lower bound on the approximated ergodic sum-rate (AESR).
//!
//! The private-stream signal power `X = sum_j |h_k^H p_j|^2` is replaced by a
//! `Gamma(D, theta)` variable with matched first two moments. The common
//! stream's weakest-user SINR is replaced by a surrogate `Y` whose CDF has a
//! closed form, and `E[ln Y]` reduces to a finite sum of exponential
//! integrals. Everything here is deterministic except [`aesr_monte_carlo`],
//! which samples the surrogate variables directly to check the bound.

use std::f64::consts::LN_2;

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{
    digamma, scaled_exp_integral_sum, truncated_e, upper_gamma_neg_ratio, GammaSampler,
    RandomStream, EULER_GAMMA,
};

/// Rounds to the nearest integer with ties away from zero.
pub fn round_half_away(x: f64) -> u64 {
    // f64::round breaks ties away from zero; inputs here are positive
    x.round().max(0.0) as u64
}

fn check_scenario(func: &'static str, power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::domain(func, format!("power must be finite and > 0, got {power}")));
    }
    if users == 0 || n_t < users {
        return Err(Error::domain(func, format!("need n_t >= K >= 1, got n_t={n_t}, K={users}")));
    }
    if !(-1.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(func, format!("epsilon must lie in [-1, 1], got {epsilon}")));
    }
    Ok(())
}

fn check_split(func: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(func, format!("t must lie in (0, 1], got {t}")));
    }
    Ok(())
}

/// Shape and scale of the Gamma law matched to the private signal power.
///
/// With `a = eps^2 (n_t+1) + (1-2 eps^2) K` and
/// `b = eps^4 (n_t+1) + (1-2 eps^2) K`, returns `(a^2/b, b/a)`, so the mean
/// `D theta = a` is preserved.
pub fn gamma_moment_match(epsilon: f64, n_t: usize, users: usize) -> Result<(f64, f64)> {
    if users == 0 || n_t < users {
        return Err(Error::domain(
            "gamma_moment_match",
            format!("need n_t >= K >= 1, got n_t={n_t}, K={users}"),
        ));
    }
    if !(-1.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(
            "gamma_moment_match",
            format!("epsilon must lie in [-1, 1], got {epsilon}"),
        ));
    }
    let e2 = epsilon * epsilon;
    let n1 = (n_t + 1) as f64;
    let k = users as f64;
    let a = e2 * n1 + (1.0 - 2.0 * e2) * k;
    let b = e2 * e2 * n1 + (1.0 - 2.0 * e2) * k;
    if !(b > 0.0) || !(a > 0.0) {
        log::warn!("degenerate moment match at eps={epsilon}, n_t={n_t}, K={users}: b={b}");
        return Err(Error::DegenerateMatch {
            epsilon,
            n_t,
            users,
            denominator: b,
        });
    }
    Ok((a * a / b, b / a))
}

/// `E[ln X]` for `X ~ Gamma(d_hat, theta_hat)`: `ln theta + psi(D)`.
pub fn log_mean_mu(d_hat: f64, theta_hat: f64) -> Result<f64> {
    if !(theta_hat > 0.0) {
        return Err(Error::domain("log_mean_mu", format!("theta must be > 0, got {theta_hat}")));
    }
    Ok(theta_hat.ln() + digamma(d_hat)?)
}

/// Private-stream part of the bound, in bits per channel use:
/// `K log2(1 + (P/K) e^mu t) - K log2(1 + omega t)` with
/// `omega = (K-1)(1-eps^2) P / K`.
pub fn private_bound(t: f64, power: f64, users: usize, epsilon: f64, mu: f64) -> f64 {
    let k = users as f64;
    let omega = interference_weight(power, users, epsilon);
    k * ((power / k) * mu.exp() * t).ln_1p() / LN_2 - k * (omega * t).ln_1p() / LN_2
}

fn interference_weight(power: f64, users: usize, epsilon: f64) -> f64 {
    let k = users as f64;
    (k - 1.0) * (1.0 - epsilon * epsilon) * power / k
}

fn surrogate_scale(func: &'static str, power: f64, t: f64, users: usize, theta_hat: f64) -> Result<f64> {
    let s = power * theta_hat * t / users as f64;
    if !(s > 0.0 && s.is_finite()) || users == 0 {
        return Err(Error::domain(func, format!("P theta t / K must be finite and > 0, got {s}")));
    }
    Ok(s)
}

/// CDF of the common-SINR surrogate:
/// `1 - e^{-K y} / (y P theta t / K + 1)^{D K}` with the real exponent `D K`.
pub fn cdf_min_common_sinr_surrogate(
    y: f64,
    power: f64,
    t: f64,
    users: usize,
    d_hat: f64,
    theta_hat: f64,
) -> Result<f64> {
    let s = surrogate_scale("cdf_min_common_sinr_surrogate", power, t, users, theta_hat)?;
    if !(y >= 0.0) {
        return Err(Error::domain("cdf_min_common_sinr_surrogate", "y must be >= 0"));
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let k = users as f64;
    let log_tail = -k * y - d_hat * k * (y * s).ln_1p();
    Ok(-log_tail.exp_m1())
}

/// `E[ln Y] = -gamma - ln K - sum_{m=1}^{N} e^x E_m(x)` with
/// `x = K^2 / (P theta t)` and `N = round(D K)`.
pub fn expected_log_y(power: f64, t: f64, users: usize, d_hat: f64, theta_hat: f64) -> Result<f64> {
    let s = surrogate_scale("expected_log_y", power, t, users, theta_hat)?;
    let n = round_half_away(d_hat * users as f64);
    if n < 1 {
        return Err(Error::DegenerateRounding {
            rounded: n,
            required: 1,
        });
    }
    let x = users as f64 / s;
    Ok(-EULER_GAMMA - (users as f64).ln() - scaled_exp_integral_sum(n, x)?)
}

/// Common-stream part of the bound: `log2(1 + P (1-t) e^beta)`.
pub fn common_bound(t: f64, power: f64, users: usize, d_hat: f64, theta_hat: f64) -> Result<f64> {
    check_split("common_bound", t)?;
    let beta = expected_log_y(power, t, users, d_hat, theta_hat)?;
    Ok((power * (1.0 - t) * beta.exp()).ln_1p() / LN_2)
}

/// Asymptotic `E[ln Y]` for large `P t` and the dropped remainder `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaAsymptotic {
    pub beta_approx: f64,
    pub phi: f64,
}

/// `beta ~ -gamma + ln(K / (P theta (N-1) t)) - 1/(2(N-1))` with
/// `N = round(D K) >= 2`, plus the remainder term that the approximation drops.
pub fn beta_asymptotic(
    power: f64,
    t: f64,
    users: usize,
    d_hat: f64,
    theta_hat: f64,
) -> Result<BetaAsymptotic> {
    let s = surrogate_scale("beta_asymptotic", power, t, users, theta_hat)?;
    let n_round = round_half_away(d_hat * users as f64);
    if n_round < 2 {
        return Err(Error::DegenerateRounding {
            rounded: n_round,
            required: 2,
        });
    }
    let n = n_round - 1;
    let nf = n as f64;
    let k = users as f64;
    let beta_approx = -EULER_GAMMA + (k / (power * theta_hat * nf * t)).ln() - 0.5 / nf;

    let x = k / s;
    let s1 = scaled_exp_integral_sum(1, x)?;
    let r = upper_gamma_neg_ratio(n, x)?;
    let phi = s1 * r - x / (1.0 + x) * (truncated_e(n) - 2.0) - (r - 1.0 + x) / (1.0 + x);
    Ok(BetaAsymptotic { beta_approx, phi })
}

/// Constants of the closed-form power split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AllocationTerms {
    /// `P e^mu / K`
    pub tau: f64,
    /// `(K-1)(1-eps^2) P / K`
    pub omega: f64,
    /// `K / (theta (N-1)) e^{-gamma - 1/(2(N-1))}`
    pub rho: f64,
}

/// Every scenario-level quantity of the bound, precomputed once.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub power: f64,
    pub users: usize,
    pub n_t: usize,
    pub epsilon: f64,
    pub d_hat: f64,
    pub theta_hat: f64,
    pub dk_rounded: u64,
    pub mu: f64,
}

impl LowerBound {
    pub fn new(power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<Self> {
        check_scenario("LowerBound::new", power, users, n_t, epsilon)?;
        let (d_hat, theta_hat) = gamma_moment_match(epsilon, n_t, users)?;
        let mu = log_mean_mu(d_hat, theta_hat)?;
        Ok(Self {
            power,
            users,
            n_t,
            epsilon,
            d_hat,
            theta_hat,
            dk_rounded: round_half_away(d_hat * users as f64),
            mu,
        })
    }

    pub fn omega(&self) -> f64 {
        interference_weight(self.power, self.users, self.epsilon)
    }

    pub fn private(&self, t: f64) -> Result<f64> {
        check_split("LowerBound::private", t)?;
        Ok(private_bound(t, self.power, self.users, self.epsilon, self.mu))
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        expected_log_y(self.power, t, self.users, self.d_hat, self.theta_hat)
    }

    pub fn common(&self, t: f64) -> Result<f64> {
        common_bound(t, self.power, self.users, self.d_hat, self.theta_hat)
    }

    /// Private plus common part. At `t = 1` the common part is exactly zero
    /// and the value is the private-only (SDMA) bound.
    pub fn value(&self, t: f64) -> Result<f64> {
        check_split("sum_rate_lower_bound", t)?;
        let private = self.private(t)?;
        if t == 1.0 {
            return Ok(private);
        }
        Ok(private + self.common(t)?)
    }

    pub fn allocation_terms(&self) -> Result<AllocationTerms> {
        if self.dk_rounded < 2 {
            return Err(Error::DegenerateRounding {
                rounded: self.dk_rounded,
                required: 2,
            });
        }
        let n = (self.dk_rounded - 1) as f64;
        let k = self.users as f64;
        Ok(AllocationTerms {
            tau: self.power * self.mu.exp() / k,
            omega: self.omega(),
            rho: k / (self.theta_hat * n) * (-EULER_GAMMA - 0.5 / n).exp(),
        })
    }

    /// Full set of bound quantities at split `t`. Terms that need
    /// `round(D K) >= 2` are `None` when it is smaller.
    pub fn terms(&self, t: f64) -> Result<BoundTerms> {
        check_split("bound_terms", t)?;
        let asym = match beta_asymptotic(self.power, t, self.users, self.d_hat, self.theta_hat) {
            Ok(a) => Some(a),
            Err(Error::DegenerateRounding { .. }) => None,
            Err(e) => return Err(e),
        };
        let alloc = self.allocation_terms().ok();
        Ok(BoundTerms {
            t,
            d_hat: self.d_hat,
            theta_hat: self.theta_hat,
            dk_rounded: self.dk_rounded,
            mu: self.mu,
            beta_exact: self.beta(t)?,
            beta_asymptotic: asym.map(|a| a.beta_approx),
            phi: asym.map(|a| a.phi),
            tau: self.power * self.mu.exp() / self.users as f64,
            omega: self.omega(),
            rho: alloc.map(|a| a.rho),
            private_bound: self.private(t)?,
            common_bound: self.common(t)?,
        })
    }
}

/// Bound quantities of one scenario at one split `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundTerms {
    pub t: f64,
    pub d_hat: f64,
    pub theta_hat: f64,
    pub dk_rounded: u64,
    pub mu: f64,
    pub beta_exact: f64,
    pub beta_asymptotic: Option<f64>,
    pub phi: Option<f64>,
    pub tau: f64,
    pub omega: f64,
    pub rho: Option<f64>,
    pub private_bound: f64,
    pub common_bound: f64,
}

/// Lower bound on the AESR at split `t`, bits per channel use.
pub fn sum_rate_lower_bound(t: f64, power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<f64> {
    LowerBound::new(power, users, n_t, epsilon)?.value(t)
}

/// `(tau, omega, rho)` for the closed-form split.
pub fn allocation_terms(power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<AllocationTerms> {
    LowerBound::new(power, users, n_t, epsilon)?.allocation_terms()
}

/// Monte Carlo estimate of the AESR at one split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AesrEstimate {
    pub t: f64,
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
}

/// Trials per block of the ordered reduction. Fixed so that sums do not
/// depend on the thread count.
const BLOCK: u64 = 2048;

struct SurrogateDraw {
    signal: Vec<f64>,
    interference: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

struct SurrogateSampler {
    users: usize,
    signal: GammaSampler,
    interference: Option<GammaSampler>,
    q2: GammaSampler,
    residual: f64,
}

impl SurrogateSampler {
    fn new(b: &LowerBound) -> Result<Self> {
        Ok(Self {
            users: b.users,
            signal: GammaSampler::new(b.d_hat, b.theta_hat)?,
            interference: if b.users > 1 {
                Some(GammaSampler::new((b.users - 1) as f64, 1.0)?)
            } else {
                None
            },
            q2: GammaSampler::new(b.d_hat, 1.0)?,
            residual: 1.0 - b.epsilon * b.epsilon,
        })
    }

    fn draw(&self, rng: &mut RandomStream) -> SurrogateDraw {
        let k = self.users;
        let signal = (0..k).map(|_| self.signal.sample(rng)).collect();
        let interference = (0..k)
            .map(|_| match &self.interference {
                Some(g) => self.residual * g.sample(rng),
                None => 0.0,
            })
            .collect();
        let q1 = (0..k).map(|_| Exp1.sample(rng)).collect();
        let q2 = (0..k).map(|_| self.q2.sample(rng)).collect();
        SurrogateDraw {
            signal,
            interference,
            q1,
            q2,
        }
    }
}

fn aesr_sample(d: &SurrogateDraw, b: &LowerBound, t: f64) -> f64 {
    let k = b.users as f64;
    let a = b.power * t / k;
    let private: f64 = d
        .signal
        .iter()
        .zip(&d.interference)
        .map(|(x, z)| (a * x).ln_1p() - (a * z).ln_1p())
        .sum();
    let s = b.power * b.theta_hat * t / k;
    let y = d
        .q1
        .iter()
        .zip(&d.q2)
        .map(|(q1, q2)| q1 / (1.0 + s * q2))
        .fold(f64::INFINITY, f64::min);
    (private + (b.power * (1.0 - t) * y).ln_1p()) / LN_2
}

/// Monte Carlo AESR at split `t`: per user `X ~ Gamma(D, theta)` and
/// `Z = (1-eps^2) Gamma(K-1, 1)` (zero for one user), and
/// `Y = min_k Q1_k / (1 + (P theta t / K) Q2_k)` with `Q1 ~ Exp(1)`,
/// `Q2 ~ Gamma(D, 1)`. Trial `i` draws from stream `(seed, i)`.
pub fn aesr_monte_carlo(
    t: f64,
    power: f64,
    users: usize,
    n_t: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<AesrEstimate> {
    let mut v = aesr_monte_carlo_curve(&[t], power, users, n_t, epsilon, trials, seed)?;
    Ok(v.remove(0))
}

/// [`aesr_monte_carlo`] at several splits on common random numbers.
pub fn aesr_monte_carlo_curve(
    ts: &[f64],
    power: f64,
    users: usize,
    n_t: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<AesrEstimate>> {
    if trials == 0 {
        return Err(Error::config("trials", "must be >= 1"));
    }
    for &t in ts {
        check_split("aesr_monte_carlo", t)?;
    }
    let b = LowerBound::new(power, users, n_t, epsilon)?;
    let sampler = SurrogateSampler::new(&b)?;
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = vec![(0.0, 0.0); ts.len()];
            for i in blk * BLOCK..((blk + 1) * BLOCK).min(trials) {
                let mut rng = RandomStream::new(seed, i);
                let draw = sampler.draw(&mut rng);
                for (slot, &t) in acc.iter_mut().zip(ts) {
                    let r = aesr_sample(&draw, &b, t);
                    slot.0 += r;
                    slot.1 += r * r;
                }
            }
            acc
        })
        .collect();
    let n = trials as f64;
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (sum, sum_sq) = partial
                .iter()
                .fold((0.0, 0.0), |(s, q), blk| (s + blk[j].0, q + blk[j].1));
            let mean = sum / n;
            let var = if trials > 1 {
                ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            AesrEstimate {
                t,
                mean,
                half_width_95: 1.96 * (var / n).sqrt(),
                trials,
            }
        })
        .collect())
}
