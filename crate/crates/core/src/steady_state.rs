//! Zero-inflation steady state with an endogenous real rate.
//!
//! With `q < 1` the aggregate Euler equation carries a wealth term, so the
//! rate that keeps aggregate consumption constant rises with the stock of
//! government debt held by households.

use serde::{Deserialize, Serialize};

use crate::calibration::{annualize, Calibration, PreferenceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Quarterly net real rate.
    pub r_bar: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub w: f64,
    #[serde(rename = "T")]
    pub taxes: f64,
    #[serde(rename = "B_prime")]
    pub b_prime: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub delta: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub pi: f64,
    pub i: f64,
}

impl SteadyState {
    pub fn r_bar_annualized(&self) -> f64 {
        annualize(self.r_bar)
    }

    /// Steady state with household wealth fixed at `v` instead of a debt
    /// ratio. Output and hours are unchanged; the rate adjusts so that the
    /// aggregate Euler equation holds. The returned calibration carries the
    /// implied quarterly `debt_to_gdp = V / ((1 + r) Y)`.
    pub fn at_wealth(calib: &Calibration, v: f64) -> Result<(Calibration, SteadyState)> {
        let base = solve_steady_state(calib)?;
        let gross = (1.0 + wealth_drag(calib) * v / (base.delta * net_consumption(calib, &base)))
            / calib.beta;
        let by = v / (gross * base.y);
        let new_calib = Calibration {
            debt_to_gdp: by,
            ..*calib
        };
        let ss = solve_steady_state(&new_calib)?;
        Ok((new_calib, ss))
    }
}

/// Real wage at the zero-inflation steady state, where the real marginal
/// cost equals the inverse markup.
pub fn flexible_wage(calib: &Calibration) -> f64 {
    (calib.theta - 1.0) / calib.theta * calib.sigma * calib.l_bar.powf(calib.sigma - 1.0)
}

/// Labor-disutility weight that makes `L_bar` the steady-state hours choice.
pub fn pin_eta(calib: &Calibration) -> f64 {
    let w = flexible_wage(calib);
    let l = calib.l_bar;
    match calib.pref {
        PreferenceKind::LogLog => w * (1.0 - l) / l.powf(calib.sigma),
        PreferenceKind::Ghh => w * l.powf(1.0 - calib.epsilon),
    }
}

/// Denominator of the closed-form steady-state rate; must be positive.
pub fn rate_denominator(calib: &Calibration) -> Result<f64> {
    let c = calib;
    let d = match c.pref {
        PreferenceKind::LogLog => {
            let eta = c.eta();
            c.beta * c.q * (1.0 + eta) - (1.0 - c.q) * (1.0 - c.beta * c.q) * c.debt_to_gdp
        }
        PreferenceKind::Ghh => {
            c.q * ghh_composite(c)
                - c.epsilon * c.theta * (1.0 - c.q) * (1.0 / c.beta - c.q) * c.debt_to_gdp
        }
    };
    if d > 0.0 && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NonpositiveDenominator { denominator: d })
    }
}

fn ghh_composite(c: &Calibration) -> f64 {
    c.epsilon * c.theta - c.sigma * (c.theta - 1.0)
}

/// Quarterly net steady-state real rate.
pub fn steady_state_rate(calib: &Calibration) -> Result<f64> {
    let c = calib;
    let den = rate_denominator(c)?;
    Ok(match c.pref {
        PreferenceKind::LogLog => c.q * (1.0 + c.eta()) / den - 1.0,
        PreferenceKind::Ghh => c.q * ghh_composite(c) / (c.beta * den) - 1.0,
    })
}

pub fn solve_steady_state(calib: &Calibration) -> Result<SteadyState> {
    calib.validate()?;
    let r_bar = steady_state_rate(calib)?;
    let l = calib.l_bar;
    let y = l.powf(calib.sigma);
    let c = y;
    let b_prime = (1.0 + r_bar) * calib.debt_to_gdp * y;
    Ok(SteadyState {
        r_bar,
        y,
        l,
        c,
        w: flexible_wage(calib),
        taxes: b_prime * r_bar / (1.0 + r_bar),
        b_prime,
        v: b_prime,
        delta: 1.0 / (1.0 - calib.q * calib.beta),
        g: 0.0,
        pi: 0.0,
        i: r_bar,
    })
}

/// Coefficient on `V / delta` in the aggregate Euler equation.
pub(crate) fn wealth_drag(calib: &Calibration) -> f64 {
    match calib.pref {
        PreferenceKind::LogLog => (1.0 - calib.q) / ((1.0 + calib.eta()) * calib.q),
        PreferenceKind::Ghh => (1.0 - calib.q) / calib.q,
    }
}

/// Consumption net of the GHH labor-disutility term (plain `C` under log-log).
fn net_consumption(calib: &Calibration, ss: &SteadyState) -> f64 {
    match calib.pref {
        PreferenceKind::LogLog => ss.c,
        PreferenceKind::Ghh => ss.c - calib.eta() / calib.epsilon * ss.l.powf(calib.epsilon),
    }
}

/// Residual of the aggregate Euler equation evaluated at a steady state.
pub fn euler_residual(calib: &Calibration, ss: &SteadyState) -> f64 {
    let cn = net_consumption(calib, ss);
    let lhs = match calib.pref {
        PreferenceKind::LogLog => ss.c,
        PreferenceKind::Ghh => cn,
    };
    lhs + wealth_drag(calib) * ss.v / ss.delta - calib.beta * (1.0 + ss.r_bar) * cn
}

/// Residual of the aggregate labor-supply condition at a steady state.
pub fn labor_supply_residual(calib: &Calibration, ss: &SteadyState) -> f64 {
    let eta = calib.eta();
    match calib.pref {
        PreferenceKind::LogLog => ss.w * (1.0 - ss.l) - eta * ss.c,
        PreferenceKind::Ghh => ss.w - eta * ss.l.powf(calib.epsilon - 1.0),
    }
}
