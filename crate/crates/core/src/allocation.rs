//! Choosing the private power fraction `t`.
//!
//! [`t_opt_closed_form`] maximizes a high-SNR simplification of the lower
//! bound analytically. [`t_opt_exhaustive`] searches a uniform grid on
//! `(0, 1]` against either the bound itself or a Monte Carlo sum-rate, and
//! [`t_opt_asymptotic`] gives the simplified special-case formulas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::LowerBound;
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::transceiver::Realizations;

/// Default exhaustive-search step.
pub const DEFAULT_GRANULARITY: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationBranch {
    Interior,
    SaturatedOne,
}

impl AllocationBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationBranch::Interior => "interior",
            AllocationBranch::SaturatedOne => "saturated_one",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AllocationResult {
    pub t_opt: f64,
    pub branch: AllocationBranch,
    /// Objective at `t_opt`: the lower bound, or the Monte Carlo mean when
    /// the search ran against simulation.
    pub objective_at_t: f64,
}

/// The closed-form split.
///
/// With `(tau, omega, rho)` from [`crate::bound::allocation_terms`]:
/// `t = rho (K-1) / (rho (omega + K) - K)` when `rho (omega + 1) / K > 1`,
/// otherwise `t = 1`. One user always gets `t = 1`, and so does a scenario
/// with `round(D K) < 2`, where `rho` is undefined.
pub fn t_opt_closed_form(power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<AllocationResult> {
    let bound = LowerBound::new(power, users, n_t, epsilon)?;
    let saturated = |b: &LowerBound| -> Result<AllocationResult> {
        Ok(AllocationResult {
            t_opt: 1.0,
            branch: AllocationBranch::SaturatedOne,
            objective_at_t: b.value(1.0)?,
        })
    };
    if users == 1 {
        return saturated(&bound);
    }
    let terms = match bound.allocation_terms() {
        Ok(terms) => terms,
        Err(Error::DegenerateRounding { rounded, .. }) => {
            log::warn!("round(D K) = {rounded} < 2: closed form undefined, using t = 1");
            return saturated(&bound);
        }
        Err(e) => return Err(e),
    };
    let k = users as f64;
    let (omega, rho) = (terms.omega, terms.rho);
    if rho * (omega + 1.0) / k > 1.0 {
        let t = rho * (k - 1.0) / (rho * (omega + k) - k);
        Ok(AllocationResult {
            t_opt: t,
            branch: AllocationBranch::Interior,
            objective_at_t: bound.value(t)?,
        })
    } else {
        saturated(&bound)
    }
}

/// What the exhaustive search maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchObjective {
    LowerBound,
    MonteCarlo,
}

/// The search grid `{g, 2g, ..., 1}`. When `1/g` is not an integer the last
/// multiple below 1 is followed by 1 itself.
pub fn split_grid(granularity: f64) -> Result<Vec<f64>> {
    if !(granularity > 0.0 && granularity <= 0.5) {
        return Err(Error::config(
            "granularity",
            format!("must lie in (0, 0.5], got {granularity}"),
        ));
    }
    let steps = (1.0 / granularity).round();
    if (steps * granularity - 1.0).abs() < 1e-9 {
        let m = steps as u64;
        return Ok((1..=m).map(|i| i as f64 / m as f64).collect());
    }
    let m = (1.0 / granularity).floor() as u64;
    let mut grid: Vec<f64> = (1..=m).map(|i| i as f64 * granularity).collect();
    grid.push(1.0);
    Ok(grid)
}

pub(crate) fn argmax_toward_larger(grid: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (grid[0], values[0]);
    for (&t, &v) in grid.iter().zip(values) {
        if v >= best.1 {
            best = (t, v);
        }
    }
    best
}

/// Grid search for the best split; ties go to the larger `t`.
///
/// The Monte Carlo objective needs `mc_cfg`, whose power, user count,
/// antenna count and correlation must describe the same scenario.
pub fn t_opt_exhaustive(
    power: f64,
    users: usize,
    n_t: usize,
    epsilon: f64,
    objective: SearchObjective,
    granularity: f64,
    mc_cfg: Option<&ScenarioConfig>,
) -> Result<AllocationResult> {
    let grid = split_grid(granularity)?;
    let values: Vec<f64> = match objective {
        SearchObjective::LowerBound => {
            let bound = LowerBound::new(power, users, n_t, epsilon)?;
            grid.par_iter()
                .map(|&t| bound.value(t))
                .collect::<Result<_>>()?
        }
        SearchObjective::MonteCarlo => {
            let cfg = mc_cfg.ok_or_else(|| {
                Error::config("mc_cfg", "the monte_carlo objective needs a scenario config")
            })?;
            check_consistent(cfg, power, users, n_t, epsilon)?;
            Realizations::draw(cfg)?
                .estimate_curve(&grid)?
                .into_iter()
                .map(|e| e.mean)
                .collect()
        }
    };
    let (t_opt, objective_at_t) = argmax_toward_larger(&grid, &values);
    Ok(AllocationResult {
        t_opt,
        branch: if t_opt < 1.0 {
            AllocationBranch::Interior
        } else {
            AllocationBranch::SaturatedOne
        },
        objective_at_t,
    })
}

fn check_consistent(cfg: &ScenarioConfig, power: f64, users: usize, n_t: usize, epsilon: f64) -> Result<()> {
    cfg.validate()?;
    if cfg.users != users || cfg.n_t != n_t {
        return Err(Error::config(
            "mc_cfg",
            format!("scenario is n_t={}, K={}, search is n_t={n_t}, K={users}", cfg.n_t, cfg.users),
        ));
    }
    if (cfg.power() - power).abs() > 1e-9 * power {
        return Err(Error::config("mc_cfg.snr_db", "power differs from the search power"));
    }
    if (cfg.epsilon()? - epsilon).abs() > 1e-12 {
        return Err(Error::config("mc_cfg.epsilon", "correlation differs from the search epsilon"));
    }
    Ok(())
}

/// Special cases with simple closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticCase {
    /// Two users, fully outdated CSIT.
    Eps0K2,
    /// Many users, fully outdated CSIT.
    Eps0LargeK,
    /// Perfect CSIT.
    Eps1,
}

/// `2/(P - 8.62)` for `P > 10.62` (two users), `1/(P/K + 1 - 1.78 K)` when
/// `(P+1)/K^2 > 1.78` (many users), and 1 for perfect CSIT or outside
/// those ranges.
pub fn t_opt_asymptotic(power: f64, users: usize, case: AsymptoticCase) -> Result<f64> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::domain("t_opt_asymptotic", format!("power must be > 0, got {power}")));
    }
    let k = users as f64;
    Ok(match case {
        AsymptoticCase::Eps0K2 => {
            if users != 2 {
                return Err(Error::domain("t_opt_asymptotic", "the two-user case needs K = 2"));
            }
            if power > 10.62 {
                2.0 / (power - 8.62)
            } else {
                1.0
            }
        }
        AsymptoticCase::Eps0LargeK => {
            if users < 2 {
                return Err(Error::domain("t_opt_asymptotic", "needs K >= 2"));
            }
            if (power + 1.0) / (k * k) > 1.78 {
                1.0 / (power / k + 1.0 - 1.78 * k)
            } else {
                1.0
            }
        }
        AsymptoticCase::Eps1 => 1.0,
    })
}
