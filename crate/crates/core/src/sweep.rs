//! Parameter sweeps comparing RSMA power splits against SDMA, with CSV output.
//!
//! Every cell of a sweep draws its channel realizations from the base seed,
//! so all cells and schemes see common random numbers. Cells run in
//! parallel; rows come back in axis order, then scheme order.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{
    argmax_toward_larger, split_grid, t_opt_closed_form, t_opt_exhaustive, SearchObjective,
    DEFAULT_GRANULARITY,
};
use crate::bound::LowerBound;
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::transceiver::Realizations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    T,
    SnrDb,
    SpeedKmh,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::T => "t",
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::SpeedKmh => "speed_kmh",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// RSMA with the closed-form split.
    RsmaClosedForm,
    /// RSMA with the split that maximizes the lower bound on a grid.
    RsmaExhaustiveBound,
    /// RSMA with the split that maximizes the simulated sum-rate on a grid.
    RsmaExhaustiveMc,
    /// No common stream (`t = 1`).
    Sdma,
    /// Simulated sum-rate and bound at a given `t`.
    BoundCurve,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::RsmaClosedForm => "rsma_closed_form",
            Scheme::RsmaExhaustiveBound => "rsma_exhaustive_bound",
            Scheme::RsmaExhaustiveMc => "rsma_exhaustive_mc",
            Scheme::Sdma => "sdma",
            Scheme::BoundCurve => "bound_curve",
        }
    }
}

/// A sweep over one axis, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub sweep_axis: SweepAxis,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("base.{field}"), reason),
            other => other,
        })?;
        if self.values.is_empty() {
            return Err(Error::config("values", "must not be empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "must be finite"));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("values", "must be strictly increasing"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "no scheme selected"));
        }
        match self.sweep_axis {
            SweepAxis::T => {
                if self.values.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                    return Err(Error::config("values", "t values must lie in (0, 1]"));
                }
                if let Some(s) = self.schemes.iter().find(|s| **s != Scheme::BoundCurve) {
                    return Err(Error::config(
                        "schemes",
                        format!("a t-axis sweep only supports bound_curve, got {}", s.as_str()),
                    ));
                }
            }
            SweepAxis::SpeedKmh => {
                if self.values.iter().any(|&v| v < 0.0) {
                    return Err(Error::config("values", "speeds must be >= 0"));
                }
            }
            SweepAxis::SnrDb => {}
        }
        Ok(())
    }

    /// The scenario at one axis value. Changing the speed changes the
    /// correlation unless `epsilon_override` pins it.
    pub fn cell_config(&self, value: f64) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        match self.sweep_axis {
            SweepAxis::T => {}
            SweepAxis::SnrDb => cfg.snr_db = value,
            SweepAxis::SpeedKmh => cfg.speed_kmh = value,
        }
        cfg
    }
}

/// Knobs that are not part of the sweep file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub granularity: f64,
    /// Split for `bound_curve` on the SNR and speed axes.
    pub fixed_t: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            granularity: DEFAULT_GRANULARITY,
            fixed_t: None,
        }
    }
}

/// One output record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_t: usize,
    #[serde(rename = "K")]
    pub users: usize,
    pub snr_db: f64,
    pub speed_kmh: f64,
    pub carrier_hz: f64,
    pub delay_s: f64,
    pub epsilon: f64,
    pub common_precoder_mode: String,
    pub trials: u64,
    pub seed: u64,
    pub scheme: String,
    pub axis_value: f64,
    pub t_used: f64,
    pub sum_rate: f64,
    pub half_width_95: f64,
    pub bound_value: Option<f64>,
}

impl SweepRow {
    pub const HEADER: [&'static str; 16] = [
        "n_t",
        "K",
        "snr_db",
        "speed_kmh",
        "carrier_hz",
        "delay_s",
        "epsilon",
        "common_precoder_mode",
        "trials",
        "seed",
        "scheme",
        "axis_value",
        "t_used",
        "sum_rate",
        "half_width_95",
        "bound_value",
    ];

    fn record(&self) -> [String; 16] {
        [
            self.n_t.to_string(),
            self.users.to_string(),
            fmt_real(self.snr_db),
            fmt_real(self.speed_kmh),
            fmt_real(self.carrier_hz),
            fmt_real(self.delay_s),
            fmt_real(self.epsilon),
            self.common_precoder_mode.clone(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.scheme.clone(),
            fmt_real(self.axis_value),
            fmt_real(self.t_used),
            fmt_real(self.sum_rate),
            fmt_real(self.half_width_95),
            self.bound_value.map(fmt_real).unwrap_or_default(),
        ]
    }
}

/// Ten significant digits in scientific notation.
fn fmt_real(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x:.9e}").expect("writing to a String cannot fail");
    s
}

/// Runs every (axis value, scheme) cell of a validated spec.
pub fn run_sweep(spec: &SweepSpec, options: &SweepOptions) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    split_grid(options.granularity)?;
    if let Some(t) = options.fixed_t {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::config("t", format!("must lie in (0, 1], got {t}")));
        }
    }
    if spec.sweep_axis != SweepAxis::T
        && spec.schemes.contains(&Scheme::BoundCurve)
        && options.fixed_t.is_none()
    {
        return Err(Error::config(
            "schemes",
            format!("bound_curve on the {} axis needs a fixed t", spec.sweep_axis.as_str()),
        ));
    }

    if spec.sweep_axis == SweepAxis::T {
        // one scenario, many splits: draw once
        let cfg = spec.cell_config(0.0);
        let real = Realizations::draw(&cfg)?;
        let eps = cfg.epsilon()?;
        let bound = LowerBound::new(cfg.power(), cfg.users, cfg.n_t, eps)?;
        let est = real.estimate_curve(&spec.values)?;
        return spec
            .values
            .iter()
            .zip(est)
            .flat_map(|(&t, e)| {
                let cfg = &cfg;
                let bound = &bound;
                spec.schemes.iter().map(move |s| {
                    Ok(make_row(cfg, eps, *s, t, t, e.mean, e.half_width_95, Some(bound.value(t)?)))
                })
            })
            .collect();
    }

    let cells: Vec<Vec<SweepRow>> = spec
        .values
        .par_iter()
        .map(|&v| run_cell(spec, options, v))
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().flatten().collect())
}

fn run_cell(spec: &SweepSpec, options: &SweepOptions, value: f64) -> Result<Vec<SweepRow>> {
    let cfg = spec.cell_config(value);
    let eps = cfg.epsilon()?;
    let power = cfg.power();
    let bound = LowerBound::new(power, cfg.users, cfg.n_t, eps)?;
    let real = Realizations::draw(&cfg)?;
    let mut rows = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let t = match scheme {
            Scheme::RsmaClosedForm => t_opt_closed_form(power, cfg.users, cfg.n_t, eps)?.t_opt,
            Scheme::RsmaExhaustiveBound => {
                t_opt_exhaustive(
                    power,
                    cfg.users,
                    cfg.n_t,
                    eps,
                    SearchObjective::LowerBound,
                    options.granularity,
                    None,
                )?
                .t_opt
            }
            Scheme::RsmaExhaustiveMc => {
                let grid = split_grid(options.granularity)?;
                let curve = real.estimate_curve(&grid)?;
                let means: Vec<f64> = curve.iter().map(|e| e.mean).collect();
                argmax_toward_larger(&grid, &means).0
            }
            Scheme::Sdma => 1.0,
            Scheme::BoundCurve => options.fixed_t.expect("checked before the cells run"),
        };
        let est = real.estimate(t)?;
        rows.push(make_row(
            &cfg,
            eps,
            scheme,
            value,
            t,
            est.mean,
            est.half_width_95,
            Some(bound.value(t)?),
        ));
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    cfg: &ScenarioConfig,
    epsilon: f64,
    scheme: Scheme,
    axis_value: f64,
    t_used: f64,
    sum_rate: f64,
    half_width_95: f64,
    bound_value: Option<f64>,
) -> SweepRow {
    SweepRow {
        n_t: cfg.n_t,
        users: cfg.users,
        snr_db: cfg.snr_db,
        speed_kmh: cfg.speed_kmh,
        carrier_hz: cfg.carrier_hz,
        delay_s: cfg.delay_s,
        epsilon,
        common_precoder_mode: cfg.common_precoder_mode.as_str().to_string(),
        trials: cfg.trials,
        seed: cfg.seed,
        scheme: scheme.as_str().to_string(),
        axis_value,
        t_used,
        sum_rate,
        half_width_95,
        bound_value,
    }
}

/// CSV text for `rows`: a header line, then one line per row in order.
pub fn csv_bytes(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |source| Error::Csv {
        path: "<memory>".into(),
        source,
    };
    w.write_record(SweepRow::HEADER).map_err(wrap)?;
    for row in rows {
        w.write_record(row.record()).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })
}

/// Writes the rows as CSV to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let bytes = csv_bytes(rows)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads rows written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize().map(|row| row.map_err(wrap)).collect()
}
