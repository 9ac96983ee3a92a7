//! Precoding, per-realization SINRs and rates, and Monte Carlo estimation of
//! the ergodic sum-rate.
//!
//! Transmit signal: `sqrt(P(1-t)) p_c s_c + sqrt(Pt/K) sum_k p_k s_k`, unit
//! noise at every user. The private precoders are zero-forcing against the
//! CSIT; all SINRs are evaluated against the true channel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{draw_channel_pair_with, ChannelState, CommonPrecoderMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::special::{sample_complex_gaussian_vector, RandomStream};

/// Relative singular-value threshold below which the CSIT is rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Redraw cap per trial before a degenerate channel is reported as an error.
const MAX_REDRAWS: u32 = 64;

/// Unit-norm common precoder, unit-norm private precoders and the split `t`.
#[derive(Clone, Debug)]
pub struct PrecoderSet {
    common: DVector<Complex64>,
    privates: DMatrix<Complex64>,
    t: f64,
}

impl PrecoderSet {
    pub fn new(common: DVector<Complex64>, privates: DMatrix<Complex64>, t: f64) -> Result<Self> {
        check_split(t)?;
        if common.len() != privates.nrows() {
            return Err(Error::domain(
                "PrecoderSet::new",
                "common and private precoders differ in length",
            ));
        }
        let unit = |n: f64| (n - 1.0).abs() <= 1e-9;
        if !unit(common.norm()) || !privates.column_iter().all(|c| unit(c.norm())) {
            return Err(Error::domain("PrecoderSet::new", "precoders must have unit norm"));
        }
        Ok(Self {
            common,
            privates,
            t,
        })
    }

    pub fn common(&self) -> &DVector<Complex64> {
        &self.common
    }

    pub fn privates(&self) -> &DMatrix<Complex64> {
        &self.privates
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_split(mut self, t: f64) -> Result<Self> {
        check_split(t)?;
        self.t = t;
        Ok(self)
    }
}

fn check_split(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain("power split", format!("t must lie in (0, 1], got {t}")));
    }
    Ok(())
}

/// Instantaneous rates in bits per channel use.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSample {
    pub common_rate: f64,
    pub private_rates: Vec<f64>,
    pub sum: f64,
}

struct CsitSvd {
    u: DMatrix<Complex64>,
    singular: DVector<f64>,
    v_t: DMatrix<Complex64>,
}

fn csit_svd(csit: &DMatrix<Complex64>) -> Result<CsitSvd> {
    let users = csit.ncols();
    if users == 0 || csit.nrows() < users {
        return Err(Error::DegenerateChannel {
            rank: csit.nrows().min(users),
            users,
        });
    }
    let svd = csit.clone().svd(true, true);
    let singular = svd.singular_values;
    let largest = singular.max();
    let rank = singular
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * largest)
        .count();
    if rank < users || !(largest > 0.0) {
        return Err(Error::DegenerateChannel { rank, users });
    }
    Ok(CsitSvd {
        u: svd.u.expect("requested U"),
        singular,
        v_t: svd.v_t.expect("requested V^H"),
    })
}

fn zf_from_svd(svd: &CsitSvd) -> DMatrix<Complex64> {
    // right pseudo-inverse of H^H: H (H^H H)^{-1} = U S^{-1} V^H
    let inv_s = DMatrix::from_diagonal(&svd.singular.map(|s| Complex64::new(1.0 / s, 0.0)));
    let mut p = &svd.u * inv_s * &svd.v_t;
    for mut col in p.column_iter_mut() {
        let n = col.norm();
        col /= Complex64::new(n, 0.0);
    }
    p
}

fn dominant_from_svd(svd: &CsitSvd) -> DVector<Complex64> {
    let idx = svd.singular.imax();
    let mut v = svd.u.column(idx).into_owned();
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    v
}

/// Zero-forcing private precoders: the columns of the right pseudo-inverse of
/// `csit^H`, each scaled to unit norm. Column `k` is orthogonal to every CSIT
/// column `j != k`.
pub fn zf_precoders(csit: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    Ok(zf_from_svd(&csit_svd(csit)?))
}

/// Unit-norm common precoder.
pub fn common_precoder(
    csit: &DMatrix<Complex64>,
    mode: CommonPrecoderMode,
    rng: &mut RandomStream,
) -> Result<DVector<Complex64>> {
    match mode {
        CommonPrecoderMode::RandomIsotropic => Ok(random_unit_vector(csit.nrows(), rng)),
        CommonPrecoderMode::DominantEigenvector => Ok(dominant_from_svd(&csit_svd(csit)?)),
    }
}

fn random_unit_vector(n: usize, rng: &mut RandomStream) -> DVector<Complex64> {
    let mut v = sample_complex_gaussian_vector(n, rng);
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    v
}

/// Builds the ZF private precoders and the common precoder from one SVD.
pub fn build_precoders(
    csit: &DMatrix<Complex64>,
    mode: CommonPrecoderMode,
    t: f64,
    rng: &mut RandomStream,
) -> Result<PrecoderSet> {
    check_split(t)?;
    let svd = csit_svd(csit)?;
    let privates = zf_from_svd(&svd);
    let common = match mode {
        CommonPrecoderMode::RandomIsotropic => random_unit_vector(csit.nrows(), rng),
        CommonPrecoderMode::DominantEigenvector => dominant_from_svd(&svd),
    };
    Ok(PrecoderSet {
        common,
        privates,
        t,
    })
}

/// Effective channel gains of one realization, independent of `t` and `P`.
#[derive(Clone, Debug)]
pub struct LinkGains {
    /// `|h_k^H p_c|^2` per user.
    pub common: Vec<f64>,
    /// `(k, j)` entry: `|h_k^H p_j|^2`.
    pub private: DMatrix<f64>,
}

impl LinkGains {
    /// Gains against the true channel.
    pub fn measure(state: &ChannelState, precoders: &PrecoderSet) -> Self {
        let h = state.truth();
        let users = h.ncols();
        let cross = h.adjoint() * precoders.privates();
        let private = DMatrix::from_fn(users, users, |k, j| cross[(k, j)].norm_sqr());
        let common = (0..users)
            .map(|k| h.column(k).dotc(precoders.common()).norm_sqr())
            .collect();
        Self { common, private }
    }

    pub fn users(&self) -> usize {
        self.common.len()
    }

    /// Rates for total power `power` and split `t`.
    ///
    /// The common-stream interference sums over all `K` private streams,
    /// including the user's own; the common rate uses the weakest user.
    pub fn rates(&self, power: f64, t: f64) -> RateSample {
        let users = self.users();
        let per_private = power * t / users as f64;
        let common_power = power * (1.0 - t);
        let mut min_common_sinr = f64::INFINITY;
        let mut private_rates = Vec::with_capacity(users);
        for k in 0..users {
            let row = self.private.row(k);
            let all: f64 = row.iter().sum();
            let own = row[k];
            let interference = all - own;
            let common_sinr = common_power * self.common[k] / (1.0 + per_private * all);
            min_common_sinr = min_common_sinr.min(common_sinr);
            let sinr = per_private * own / (1.0 + per_private * interference);
            private_rates.push((1.0 + sinr).log2());
        }
        let common_rate = if users == 0 { 0.0 } else { (1.0 + min_common_sinr).log2() };
        let sum = common_rate + private_rates.iter().sum::<f64>();
        RateSample {
            common_rate,
            private_rates,
            sum,
        }
    }
}

/// Rates of one realization under `precoders` with total power `power`.
pub fn instantaneous_rates(
    state: &ChannelState,
    precoders: &PrecoderSet,
    power: f64,
) -> Result<RateSample> {
    if !(power > 0.0) {
        return Err(Error::domain("instantaneous_rates", "power must be > 0"));
    }
    if state.n_t() != precoders.privates().nrows() || state.users() != precoders.privates().ncols()
    {
        return Err(Error::domain("instantaneous_rates", "dimension mismatch"));
    }
    Ok(LinkGains::measure(state, precoders).rates(power, precoders.t()))
}

/// Monte Carlo estimate of the ergodic sum-rate at one split.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumRateEstimate {
    pub t: f64,
    pub mean: f64,
    pub half_width_95: f64,
    /// Common stream first, then the `K` private streams.
    pub per_stream_means: Vec<f64>,
    pub trials: u64,
    pub degenerate_redraws: u64,
}

/// Precoded gains for every trial of a scenario, in trial order.
///
/// Trial `i` draws from stream `(cfg.seed, i)`. Precoders do not depend on
/// `t`, so one set of realizations serves every split.
#[derive(Clone, Debug)]
pub struct Realizations {
    gains: Vec<LinkGains>,
    power: f64,
    degenerate_redraws: u64,
}

impl Realizations {
    pub fn draw(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let eps = cfg.epsilon()?;
        let results: Vec<Result<(LinkGains, u32)>> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| draw_trial(cfg, eps, i))
            .collect();
        let mut gains = Vec::with_capacity(results.len());
        let mut degenerate_redraws = 0;
        for r in results {
            let (g, redraws) = r?;
            degenerate_redraws += u64::from(redraws);
            gains.push(g);
        }
        Ok(Self {
            gains,
            power: cfg.power(),
            degenerate_redraws,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[LinkGains] {
        &self.gains
    }

    pub fn degenerate_redraws(&self) -> u64 {
        self.degenerate_redraws
    }

    /// Sum-rate estimate at split `t`; trials are reduced in index order.
    pub fn estimate(&self, t: f64) -> Result<SumRateEstimate> {
        check_split(t)?;
        let n = self.gains.len();
        let users = self.gains.first().map_or(0, LinkGains::users);
        let mut stream_sums = vec![0.0; users + 1];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for g in &self.gains {
            let r = g.rates(self.power, t);
            stream_sums[0] += r.common_rate;
            for (acc, v) in stream_sums[1..].iter_mut().zip(&r.private_rates) {
                *acc += v;
            }
            sum += r.sum;
            sum_sq += r.sum * r.sum;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Ok(SumRateEstimate {
            t,
            mean,
            half_width_95: 1.96 * (var / nf).sqrt(),
            per_stream_means: stream_sums.into_iter().map(|s| s / nf).collect(),
            trials: n as u64,
            degenerate_redraws: self.degenerate_redraws,
        })
    }

    /// Estimates at several splits, evaluated in parallel over `ts`.
    pub fn estimate_curve(&self, ts: &[f64]) -> Result<Vec<SumRateEstimate>> {
        ts.par_iter().map(|&t| self.estimate(t)).collect()
    }
}

fn draw_trial(cfg: &ScenarioConfig, eps: f64, index: u64) -> Result<(LinkGains, u32)> {
    let mut rng = RandomStream::new(cfg.seed, index);
    let mut redraws = 0;
    loop {
        let state = draw_channel_pair_with(cfg.n_t, cfg.users, eps, &mut rng)?;
        match build_precoders(state.csit(), cfg.common_precoder_mode, 1.0, &mut rng) {
            Ok(p) => return Ok((LinkGains::measure(&state, &p), redraws)),
            Err(Error::DegenerateChannel { .. }) if redraws < MAX_REDRAWS => {
                log::warn!("trial {index}: rank-deficient CSIT, redrawing");
                redraws += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Ergodic sum-rate at split `t` over `cfg.trials` realizations.
pub fn monte_carlo_sum_rate(cfg: &ScenarioConfig, t: f64) -> Result<SumRateEstimate> {
    check_split(t)?;
    Realizations::draw(cfg)?.estimate(t)
}

/// Ergodic sum-rate at each split in `ts`, on shared realizations.
pub fn monte_carlo_sum_rate_curve(
    cfg: &ScenarioConfig,
    ts: &[f64],
) -> Result<Vec<SumRateEstimate>> {
    for &t in ts {
        check_split(t)?;
    }
    Realizations::draw(cfg)?.estimate_curve(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelState;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = RandomStream::new(seed, 0);
        let v = sample_complex_gaussian_vector(rows * cols, &mut rng);
        DMatrix::from_column_slice(rows, cols, v.as_slice())
    }

    fn max_leakage(h: &DMatrix<Complex64>, p: &DMatrix<Complex64>) -> f64 {
        let g = h.adjoint() * p;
        let mut worst: f64 = 0.0;
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                if j != k {
                    worst = worst.max(g[(j, k)].norm());
                }
            }
        }
        worst
    }

    #[test]
    fn zf_single_user_is_matched_filter() {
        let h = random_matrix(4, 1, 3);
        let p = zf_precoders(&h).unwrap();
        let mf = &h / Complex64::new(h.norm(), 0.0);
        // equal up to a global phase; here the phase is exactly 1
        let phase = mf.column(0).dotc(&p.column(0));
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((p - mf * phase).norm() < 1e-12);
    }

    #[test]
    fn zf_nulls_other_users() {
        for (nt, k, seed) in [(4, 4, 1), (8, 4, 2), (32, 8, 3)] {
            let h = random_matrix(nt, k, seed);
            let p = zf_precoders(&h).unwrap();
            assert!(max_leakage(&h, &p) < 1e-10);
            for c in p.column_iter() {
                assert!((c.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zf_orthonormal_channels_are_their_own_precoders() {
        let h = random_matrix(4, 3, 7);
        let q = h.qr().q();
        let p = zf_precoders(&q).unwrap();
        for k in 0..3 {
            let phase = q.column(k).dotc(&p.column(k));
            assert!((phase - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zf_rejects_rank_deficient_csit() {
        let mut h = random_matrix(4, 3, 9);
        let c0 = h.column(0).into_owned();
        h.set_column(2, &(c0 * Complex64::new(2.0, -1.0)));
        assert!(matches!(
            zf_precoders(&h),
            Err(Error::DegenerateChannel { rank: 2, users: 3 })
        ));
    }

    #[test]
    fn dominant_precoder_of_rank_one_csit() {
        let mut e1 = DVector::zeros(4);
        e1[0] = Complex64::new(1.0, 0.0);
        let row = DVector::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.4)]);
        let csit = &e1 * row.adjoint();
        let mut rng = RandomStream::new(0, 0);
        let p = common_precoder(&csit, CommonPrecoderMode::DominantEigenvector, &mut rng);
        // two users sharing one direction: rank 1 < K, rejected in every mode
        assert!(p.is_err());
        let single = &e1 * DVector::from_vec(vec![Complex64::new(0.5, 0.5)]).adjoint();
        let p = common_precoder(&single, CommonPrecoderMode::DominantEigenvector, &mut rng).unwrap();
        assert!((p[0].norm() - 1.0).abs() < 1e-12);
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn common_precoders_have_unit_norm() {
        let h = random_matrix(6, 3, 4);
        let mut rng = RandomStream::new(4, 1);
        for mode in [CommonPrecoderMode::RandomIsotropic, CommonPrecoderMode::DominantEigenvector] {
            let p = common_precoder(&h, mode, &mut rng).unwrap();
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    fn perfect_state(nt: usize, k: usize, seed: u64) -> ChannelState {
        let h = random_matrix(nt, k, seed);
        let zero = DMatrix::zeros(nt, k);
        ChannelState::evolve(h, &zero, 1.0).unwrap()
    }

    #[test]
    fn full_private_split_has_no_common_rate() {
        let state = perfect_state(4, 3, 5);
        let mut rng = RandomStream::new(5, 0);
        let pre = build_precoders(state.csit(), CommonPrecoderMode::RandomIsotropic, 1.0, &mut rng)
            .unwrap();
        let r = instantaneous_rates(&state, &pre, 100.0).unwrap();
        assert_eq!(r.common_rate, 0.0);
        let total: f64 = r.common_rate + r.private_rates.iter().sum::<f64>();
        assert!((r.sum - total).abs() < 1e-12);
    }

    #[test]
    fn perfect_csit_has_no_private_interference() {
        let state = perfect_state(6, 3, 6);
        let mut rng = RandomStream::new(6, 0);
        let t = 0.7;
        let p = 50.0;
        let pre = build_precoders(state.csit(), CommonPrecoderMode::RandomIsotropic, t, &mut rng)
            .unwrap();
        let r = instantaneous_rates(&state, &pre, p).unwrap();
        let g = state.truth().adjoint() * pre.privates();
        for k in 0..3 {
            let sinr = p * t / 3.0 * g[(k, k)].norm_sqr();
            assert!((r.private_rates[k] - (1.0 + sinr).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_user_matched_filter_rate() {
        let state = perfect_state(4, 1, 8);
        let mut rng = RandomStream::new(8, 0);
        let pre = build_precoders(state.csit(), CommonPrecoderMode::RandomIsotropic, 1.0, &mut rng)
            .unwrap();
        let p = 10.0;
        let r = instantaneous_rates(&state, &pre, p).unwrap();
        let expect = (1.0 + p * state.truth().norm_squared()).log2();
        assert!((r.sum - expect).abs() < 1e-12);
    }

    #[test]
    fn precoder_set_rejects_bad_inputs() {
        let h = random_matrix(3, 2, 10);
        let p = zf_precoders(&h).unwrap();
        let mut c = DVector::zeros(3);
        c[0] = Complex64::new(1.0, 0.0);
        assert!(PrecoderSet::new(c.clone(), p.clone(), 0.0).is_err());
        assert!(PrecoderSet::new(c.clone(), p.clone(), 1.2).is_err());
        assert!(PrecoderSet::new(c.clone() * Complex64::new(2.0, 0.0), p.clone(), 0.5).is_err());
        assert!(PrecoderSet::new(c, p, 0.5).is_ok());
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        let mut cfg = ScenarioConfig::with_epsilon(4, 2, 10.0, 0.5);
        cfg.trials = 0;
        assert!(matches!(monte_carlo_sum_rate(&cfg, 0.5), Err(Error::Config { .. })));
    }
}
