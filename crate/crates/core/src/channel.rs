//! Time-correlated Rayleigh fading with one step of delayed CSIT.
//!
//! The transmitter sees `h_k[m-1]`; the user experiences
//! `h_k[m] = eps h_k[m-1] + sqrt(1 - eps^2) e_k[m]`, with
//! `eps = J0(2 pi f_D T)` and `f_D = v f_c / c`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_j0, sample_complex_gaussian, RandomStream};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const DEFAULT_TRIALS: u64 = 10_000;

/// How the common-stream precoder is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommonPrecoderMode {
    /// Normalised `CN(0, I)` draw, independent of the CSIT.
    RandomIsotropic,
    /// Dominant left singular vector of the CSIT matrix.
    DominantEigenvector,
}

impl CommonPrecoderMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommonPrecoderMode::RandomIsotropic => "random_isotropic",
            CommonPrecoderMode::DominantEigenvector => "dominant_eigenvector",
        }
    }
}

fn default_carrier() -> f64 {
    3.5e9
}

fn default_delay() -> f64 {
    2.5e-3
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_mode() -> CommonPrecoderMode {
    CommonPrecoderMode::RandomIsotropic
}

/// Static parameters of one experiment. Noise variance is fixed to one, so
/// `snr_db` is the total transmit power in dB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_t: usize,
    #[serde(rename = "K")]
    pub users: usize,
    pub snr_db: f64,
    #[serde(default)]
    pub speed_kmh: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_delay")]
    pub delay_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_override: Option<f64>,
    #[serde(default = "default_mode")]
    pub common_precoder_mode: CommonPrecoderMode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    /// A config with default mobility parameters and a fixed correlation.
    pub fn with_epsilon(n_t: usize, users: usize, snr_db: f64, epsilon: f64) -> Self {
        Self {
            n_t,
            users,
            snr_db,
            speed_kmh: 0.0,
            carrier_hz: default_carrier(),
            delay_s: default_delay(),
            epsilon_override: Some(epsilon),
            common_precoder_mode: default_mode(),
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }

    /// A config whose correlation follows from speed, carrier and delay.
    pub fn with_mobility(n_t: usize, users: usize, snr_db: f64, speed_kmh: f64) -> Self {
        Self {
            epsilon_override: None,
            speed_kmh,
            ..Self::with_epsilon(n_t, users, snr_db, 1.0)
        }
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::config("n_t", "must be at least 1"));
        }
        if self.users == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        if self.users > self.n_t {
            return Err(Error::config(
                "K",
                format!("K = {} exceeds n_t = {}", self.users, self.n_t),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db", "must be finite"));
        }
        if !(self.speed_kmh >= 0.0) || !self.speed_kmh.is_finite() {
            return Err(Error::config("speed_kmh", "must be finite and >= 0"));
        }
        if !(self.carrier_hz > 0.0) || !self.carrier_hz.is_finite() {
            return Err(Error::config("carrier_hz", "must be finite and > 0"));
        }
        if !(self.delay_s > 0.0) || !self.delay_s.is_finite() {
            return Err(Error::config("delay_s", "must be finite and > 0"));
        }
        if let Some(eps) = self.epsilon_override {
            if !(0.0..=1.0).contains(&eps) {
                return Err(Error::config("epsilon_override", "must lie in [0, 1]"));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Total transmit power `P = 10^(snr_db / 10)` over unit noise.
    pub fn power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Effective correlation: the override if set, else the Jakes value.
    pub fn epsilon(&self) -> Result<f64> {
        match self.epsilon_override {
            Some(eps) => Ok(eps),
            None => time_correlation(self.speed_kmh, self.carrier_hz, self.delay_s),
        }
    }
}

/// Jakes correlation `J0(2 pi f_D T)` between CSIT and the current channel.
/// `speed_kmh` is converted to m/s.
pub fn time_correlation(speed_kmh: f64, carrier_hz: f64, delay_s: f64) -> Result<f64> {
    if !speed_kmh.is_finite() || speed_kmh < 0.0 {
        return Err(Error::domain(
            "time_correlation",
            format!("speed must be finite and >= 0, got {speed_kmh}"),
        ));
    }
    if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
        return Err(Error::domain("time_correlation", "carrier must be > 0"));
    }
    if !(delay_s > 0.0) || !delay_s.is_finite() {
        return Err(Error::domain("time_correlation", "delay must be > 0"));
    }
    let doppler_hz = speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT;
    bessel_j0(2.0 * std::f64::consts::PI * doppler_hz * delay_s)
}

/// One realization: CSIT snapshot and the channel the users actually see.
/// Columns are users.
#[derive(Clone, Debug)]
pub struct ChannelState {
    csit: DMatrix<Complex64>,
    truth: DMatrix<Complex64>,
    epsilon: f64,
}

impl ChannelState {
    /// Builds the current channel from the CSIT and a realized innovation.
    ///
    /// A negative `epsilon` is used as given.
    pub fn evolve(
        csit: DMatrix<Complex64>,
        innovation: &DMatrix<Complex64>,
        epsilon: f64,
    ) -> Result<Self> {
        if csit.shape() != innovation.shape() {
            return Err(Error::domain(
                "ChannelState::evolve",
                format!(
                    "csit {:?} and innovation {:?} differ in shape",
                    csit.shape(),
                    innovation.shape()
                ),
            ));
        }
        if !(-1.0..=1.0).contains(&epsilon) {
            return Err(Error::domain(
                "ChannelState::evolve",
                format!("epsilon {epsilon} outside [-1, 1]"),
            ));
        }
        let fresh = (1.0 - epsilon * epsilon).sqrt();
        let truth = csit.map(|h| h * epsilon) + innovation.map(|e| e * fresh);
        Ok(Self {
            csit,
            truth,
            epsilon,
        })
    }

    pub fn csit(&self) -> &DMatrix<Complex64> {
        &self.csit
    }

    pub fn truth(&self) -> &DMatrix<Complex64> {
        &self.truth
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_t(&self) -> usize {
        self.csit.nrows()
    }

    pub fn users(&self) -> usize {
        self.csit.ncols()
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RandomStream) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| sample_complex_gaussian(rng))
}

/// Draws one (CSIT, truth) pair for `cfg` from `rng`.
pub fn draw_channel_pair(cfg: &ScenarioConfig, rng: &mut RandomStream) -> Result<ChannelState> {
    cfg.validate()?;
    let eps = cfg.epsilon()?;
    draw_channel_pair_with(cfg.n_t, cfg.users, eps, rng)
}

/// Same as [`draw_channel_pair`] with the correlation already resolved.
pub fn draw_channel_pair_with(
    n_t: usize,
    users: usize,
    epsilon: f64,
    rng: &mut RandomStream,
) -> Result<ChannelState> {
    let csit = gaussian_matrix(n_t, users, rng);
    let innovation = gaussian_matrix(n_t, users, rng);
    ChannelState::evolve(csit, &innovation, epsilon)
}
