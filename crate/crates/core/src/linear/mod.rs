//! Linearized model with a two-state (short run / long run) shock.
//!
//! In the short run the shock persists with probability `mu` and otherwise
//! returns to steady state for good, so every expectation collapses to
//! `E x_{t+1} = mu * x_S`. The system then reduces to a 2x2 linear problem in
//! short-run output and inflation, which [`solve_two_state`] solves directly
//! from the structural equations. The closed-form multipliers in
//! [`analytic_multiplier`] are checked against it.

mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::{Calibration, PreferenceKind};
use crate::error::{Error, Result};
use crate::steady_state::steady_state_rate;

pub use sweep::{sweep_multiplier, write_sweep_csv, SweepAxis, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "zlb")]
    Zlb,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Normal, Regime::Zlb];
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Normal => "Normal",
            Regime::Zlb => "ZLB",
        })
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Regime::Normal),
            "zlb" => Ok(Regime::Zlb),
            other => Err(format!("unknown regime `{other}` (expected normal|zlb)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Instrument {
    /// Tax deferral: `dy_S / db'_S`.
    Debt,
    /// Balanced-budget spending: `dy_S / dg_S`.
    Spending,
}

impl Instrument {
    pub const ALL: [Instrument; 2] = [Instrument::Debt, Instrument::Spending];
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Instrument::Debt => "debt",
            Instrument::Spending => "spending",
        })
    }
}

impl FromStr for Instrument {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "debt" => Ok(Instrument::Debt),
            "spending" | "g" => Ok(Instrument::Spending),
            other => Err(format!("unknown instrument `{other}` (expected debt|spending)")),
        }
    }
}

/// Composite coefficients of the linearized system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    /// Phillips-curve slope under log-log preferences.
    pub kappa: f64,
    /// Phillips-curve slope under GHH preferences.
    pub kappa_ghh: f64,
    pub zeta: f64,
    pub r_bar: f64,
    pub one_minus_l: f64,
    /// `beta (1 + r_bar)`.
    pub beta_1r: f64,
}

impl LinearCoefficients {
    pub fn new(calib: &Calibration) -> Result<Self> {
        calib.validate()?;
        if calib.alpha <= 0.0 {
            return Err(Error::InvalidCalibration {
                field: "alpha",
                value: calib.alpha,
                reason: "the linearized Phillips curve needs sticky prices (alpha > 0)",
            });
        }
        let c = calib;
        let r_bar = steady_state_rate(c)?;
        let common = (1.0 - c.alpha) * (1.0 / c.alpha - 1.0 / (1.0 + r_bar))
            / (1.0 - c.theta + c.theta / c.sigma);
        Ok(LinearCoefficients {
            kappa: common / (1.0 - c.l_bar) / c.sigma,
            kappa_ghh: common * (c.epsilon / c.sigma - 1.0),
            zeta: 1.0 / (1.0 - c.sigma / c.epsilon * (1.0 - 1.0 / c.theta)),
            r_bar,
            one_minus_l: 1.0 - c.l_bar,
            beta_1r: c.beta * (1.0 + r_bar),
        })
    }

    /// Phillips-curve slope for the active preference kind.
    pub fn slope(&self, pref: PreferenceKind) -> f64 {
        match pref {
            PreferenceKind::LogLog => self.kappa,
            PreferenceKind::Ghh => self.kappa_ghh,
        }
    }
}

/// Short-run state of the two-state shock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortRunState {
    pub mu: f64,
    /// Short-run natural-rate composite `r^e_S` (log units).
    pub r_e_s: f64,
    /// Short-run government spending as a share of steady-state output.
    pub g_s: f64,
    /// Short-run log-deviation of debt inclusive of interest.
    pub b_prime_s: f64,
    pub zlb: bool,
}

impl ShortRunState {
    /// No shock: `r^e_S` at its steady-state value, no fiscal action.
    pub fn quiet(calib: &Calibration, mu: f64, regime: Regime) -> Result<Self> {
        Ok(ShortRunState {
            mu,
            r_e_s: (1.0 + steady_state_rate(calib)?).ln(),
            g_s: 0.0,
            b_prime_s: 0.0,
            zlb: regime == Regime::Zlb,
        })
    }

    pub fn regime(&self) -> Regime {
        if self.zlb {
            Regime::Zlb
        } else {
            Regime::Normal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateSolution {
    pub y_s: f64,
    pub pi_s: f64,
    /// `log(1 + i)` in the short run (a level, not a deviation).
    pub i_s: f64,
    pub delta_hat_s: f64,
    /// Unconstrained rule `r^e_S + phi_pi pi_S + phi_y y_S`.
    pub shadow_rate: f64,
}

impl TwoStateSolution {
    /// Whether the assumed regime is self-consistent: a positive rate under
    /// the rule, or a negative shadow rate at the bound.
    pub fn regime_consistent(&self, zlb: bool) -> bool {
        if zlb {
            self.shadow_rate < 0.0
        } else {
            self.i_s > 0.0
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::InvalidCalibration {
            field: "mu",
            value: mu,
            reason: "must lie in [0, 1)",
        })
    }
}

/// Short-run log-deviation of `delta`.
pub fn delta_hat(calib: &Calibration, mu: f64, r_e_s: f64, r_bar: f64) -> f64 {
    let qb = calib.q * calib.beta;
    -qb * (r_e_s - (1.0 + r_bar).ln()) / (1.0 - qb * mu)
}

/// Solves the short-run fixed point of the AD curve, Phillips curve, policy
/// rule (or zero rate) and `delta` recursion.
pub fn solve_two_state(calib: &Calibration, state: &ShortRunState) -> Result<TwoStateSolution> {
    check_mu(state.mu)?;
    let det = check_determinacy(calib, state.mu, state.regime())?;
    if !det.determinate {
        return Err(Error::IndeterminateSystem {
            mu: state.mu,
            regime: state.regime(),
            margin: det.margin,
        });
    }
    let k = LinearCoefficients::new(calib)?;
    let c = calib;
    let mu = state.mu;
    let bt = k.beta_1r;
    let gross = 1.0 + k.r_bar;
    let rule = if state.zlb { 0.0 } else { 1.0 };
    let dh = delta_hat(c, mu, state.r_e_s, k.r_bar);
    let (g, b, re) = (state.g_s, state.b_prime_s, state.r_e_s);

    // Row 1: aggregate demand, a_y y + a_pi pi + c1 = 0.
    let (a_y, a_pi, c1) = match c.pref {
        PreferenceKind::LogLog => (
            bt - mu + rule * bt * c.phi_y,
            bt * (rule * c.phi_pi - mu),
            mu * g - bt * g - bt * re * (1.0 - rule) - (bt - 1.0) * b + (bt - 1.0) * mu * dh,
        ),
        PreferenceKind::Ghh => {
            let z = k.zeta;
            (
                (bt - mu) / c.theta + rule * bt / z * c.phi_y,
                bt / z * (rule * c.phi_pi - mu),
                mu * g - bt * g - (bt - 1.0) / z * b - bt / z * re * (1.0 - rule)
                    + (bt - 1.0) / z * mu * dh,
            )
        }
    };
    // Row 2: Phillips curve, p_y y + p_pi pi + c2 = 0.
    let slope = k.slope(c.pref);
    let p_y = slope;
    let p_pi = -(1.0 - mu / gross);
    let c2 = match c.pref {
        PreferenceKind::LogLog => -slope * k.one_minus_l * c.sigma * g,
        PreferenceKind::Ghh => 0.0,
    };

    let det2 = a_y * p_pi - a_pi * p_y;
    if det2.abs() < 1e-300 || !det2.is_finite() {
        return Err(Error::IndeterminateSystem {
            mu,
            regime: state.regime(),
            margin: det.margin,
        });
    }
    let y = (-c1 * p_pi + a_pi * c2) / det2;
    let pi = (-a_y * c2 + p_y * c1) / det2;
    let shadow = re + c.phi_pi * pi + c.phi_y * y;
    Ok(TwoStateSolution {
        y_s: y,
        pi_s: pi,
        i_s: if state.zlb { 0.0 } else { shadow },
        delta_hat_s: dh,
        shadow_rate: shadow,
    })
}

/// Closed-form impact multiplier for one (preference, instrument, regime) cell.
pub fn analytic_multiplier(
    calib: &Calibration,
    mu: f64,
    instrument: Instrument,
    regime: Regime,
) -> Result<f64> {
    check_mu(mu)?;
    let k = LinearCoefficients::new(calib)?;
    let c = calib;
    let bt = k.beta_1r;
    let d = 1.0 - mu / (1.0 + k.r_bar);
    let (phi_pi, phi_y) = (c.phi_pi, c.phi_y);
    let one_l_sigma = k.one_minus_l * c.sigma;

    let value = match c.pref {
        PreferenceKind::LogLog => {
            let kap = k.kappa;
            match regime {
                Regime::Normal => {
                    let den = (bt * (1.0 + phi_y) - mu) * d + bt * kap * (phi_pi - mu);
                    match instrument {
                        Instrument::Debt => (bt - 1.0) * d / den,
                        Instrument::Spending => {
                            ((bt - mu) * d + bt * kap * one_l_sigma * (phi_pi - mu)) / den
                        }
                    }
                }
                Regime::Zlb => {
                    let den = (bt - mu) * d - bt * kap * mu;
                    match instrument {
                        Instrument::Debt => (bt - 1.0) * d / den,
                        Instrument::Spending => ((bt - mu) * d - bt * kap * one_l_sigma * mu) / den,
                    }
                }
            }
        }
        PreferenceKind::Ghh => {
            let kap = k.kappa_ghh;
            let zt = k.zeta / c.theta;
            match regime {
                Regime::Normal => {
                    let den = zt * (bt * (1.0 + phi_y / zt) - mu) * d + bt * kap * (phi_pi - mu);
                    match instrument {
                        Instrument::Debt => d * (bt - 1.0) / den,
                        Instrument::Spending => d * (bt - mu) * k.zeta / den,
                    }
                }
                Regime::Zlb => {
                    let den = zt * d * (bt - mu) - mu * bt * kap;
                    match instrument {
                        Instrument::Debt => d * (bt - 1.0) / den,
                        Instrument::Spending => d * (bt - mu) * k.zeta / den,
                    }
                }
            }
        }
    };
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Determinacy {
    pub determinate: bool,
    /// Value of the regime's determinacy quadratic in `mu`.
    pub margin: f64,
}

/// Evaluates the determinacy quadratic for the regime and preference kind.
pub fn check_determinacy(calib: &Calibration, mu: f64, regime: Regime) -> Result<Determinacy> {
    let margin = determinacy_margin(&LinearCoefficients::new(calib)?, calib, mu, regime);
    Ok(Determinacy {
        determinate: margin > 0.0,
        margin,
    })
}

fn determinacy_margin(k: &LinearCoefficients, c: &Calibration, mu: f64, regime: Regime) -> f64 {
    let gross = 1.0 + k.r_bar;
    let beta = c.beta;
    let rule = if regime == Regime::Normal { 1.0 } else { 0.0 };
    let (phi_pi, phi_y) = (rule * c.phi_pi, rule * c.phi_y);
    match c.pref {
        PreferenceKind::LogLog => {
            let kap = k.kappa;
            mu * mu + beta * gross * gross * (1.0 + phi_y + kap * phi_pi)
                - gross * (beta * (1.0 + phi_y + kap * gross) + 1.0) * mu
        }
        PreferenceKind::Ghh => {
            let kap = k.kappa_ghh;
            let tz = c.theta / k.zeta;
            mu * mu + beta * gross * gross * tz * (1.0 / tz + phi_y + kap * phi_pi)
                - gross * (beta * tz * (1.0 / tz + phi_y + gross * kap) + 1.0) * mu
        }
    }
}

/// Largest `mu` below which the regime is determinate, found by bisection
/// on the quadratic's sign. `None` when every `mu` in `[0, 1)` is determinate.
pub fn determinacy_threshold(calib: &Calibration, regime: Regime) -> Result<Option<f64>> {
    let k = LinearCoefficients::new(calib)?;
    let f = |mu: f64| determinacy_margin(&k, calib, mu, regime);
    if f(0.0) <= 0.0 {
        return Ok(Some(0.0));
    }
    // first sign change on a coarse grid, then bisect
    let steps = 1000;
    let mut prev = 0.0;
    for j in 1..=steps {
        let mu = (j as f64 / steps as f64).min(1.0 - 1e-12);
        if f(mu) <= 0.0 {
            let (mut lo, mut hi) = (prev, mu);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(lo));
        }
        prev = mu;
    }
    Ok(None)
}

/// Threshold truncated to two decimals: the largest `mu` on a 0.01 grid that
/// is still determinate.
pub fn threshold_two_decimals(threshold: f64) -> f64 {
    (threshold * 100.0 + 1e-9).floor() / 100.0
}

#[cfg(test)]
mod tests;
