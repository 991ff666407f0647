//! Structural parameters of the model.
//!
//! A [`Calibration`] is the single source of truth for every formula in the
//! crate. It round-trips through a flat JSON object whose keys are exactly
//! the field names below; unknown keys are rejected so that typos in
//! experiment configs fail loudly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Household preference specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceKind {
    /// `log C + eta log(1 - L)`: labor supply carries a wealth effect.
    LogLog,
    /// `log(C - (eta/epsilon) L^epsilon)`: no wealth effect on labor supply.
    #[serde(rename = "ghh")]
    Ghh,
}

impl PreferenceKind {
    pub const ALL: [PreferenceKind; 2] = [PreferenceKind::LogLog, PreferenceKind::Ghh];

    pub fn as_str(self) -> &'static str {
        match self {
            PreferenceKind::LogLog => "loglog",
            PreferenceKind::Ghh => "ghh",
        }
    }
}

impl fmt::Display for PreferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreferenceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "loglog" | "log" | "log-log" => Ok(PreferenceKind::LogLog),
            "ghh" => Ok(PreferenceKind::Ghh),
            other => Err(format!("unknown preference kind `{other}` (expected loglog|ghh)")),
        }
    }
}

/// Quarterly calibration of the model.
///
/// `eta` is optional: when absent it is pinned from `L_bar` at the
/// zero-inflation steady state (see [`crate::pin_eta`]), and it is re-pinned
/// whenever a parameter it depends on changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub beta: f64,
    pub q: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub phi_pi: f64,
    pub phi_y: f64,
    /// Steady-state B/Y on a quarterly basis (2.4 is 60% of annual output).
    pub debt_to_gdp: f64,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    pub pref: PreferenceKind,
}

impl Calibration {
    /// Baseline quarterly calibration; `q` differs by preference kind.
    pub fn baseline(pref: PreferenceKind) -> Self {
        Calibration {
            beta: 0.998,
            q: match pref {
                PreferenceKind::LogLog => 0.9512,
                PreferenceKind::Ghh => 0.9785,
            },
            theta: 6.0,
            epsilon: 2.0,
            alpha: 0.75,
            sigma: 1.0,
            phi_pi: 2.0,
            phi_y: 0.125,
            debt_to_gdp: 2.4,
            eta: None,
            l_bar: 0.3,
            pref,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_debt_to_gdp(mut self, by: f64) -> Self {
        self.debt_to_gdp = by;
        self
    }

    /// Labor-disutility weight in use: the supplied value, or the one pinned
    /// from `L_bar`.
    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| crate::steady_state::pin_eta(self))
    }

    /// Copy with `eta` fixed at its current effective value.
    pub fn with_pinned_eta(mut self) -> Self {
        self.eta = Some(self.eta());
        self
    }

    /// Checks parameter ranges and steady-state feasibility.
    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, value: f64, reason: &'static str) -> Result<()> {
            Err(Error::InvalidCalibration { field, value, reason })
        }
        let c = self;
        let fields = [
            ("beta", c.beta),
            ("q", c.q),
            ("theta", c.theta),
            ("epsilon", c.epsilon),
            ("alpha", c.alpha),
            ("sigma", c.sigma),
            ("phi_pi", c.phi_pi),
            ("phi_y", c.phi_y),
            ("debt_to_gdp", c.debt_to_gdp),
            ("L_bar", c.l_bar),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return bad(name, v, "must be finite");
            }
        }
        if !(c.beta > 0.0 && c.beta < 1.0) {
            return bad("beta", c.beta, "must lie in (0, 1)");
        }
        if !(c.q > 0.0 && c.q <= 1.0) {
            return bad("q", c.q, "must lie in (0, 1]");
        }
        if c.theta <= 1.0 {
            return bad("theta", c.theta, "must exceed 1");
        }
        if c.epsilon <= 1.0 {
            return bad("epsilon", c.epsilon, "must exceed 1");
        }
        if !(c.alpha >= 0.0 && c.alpha < 1.0) {
            return bad("alpha", c.alpha, "must lie in [0, 1)");
        }
        if !(c.sigma > 0.0 && c.sigma <= 1.0) {
            return bad("sigma", c.sigma, "must lie in (0, 1]");
        }
        if c.phi_pi < 0.0 {
            return bad("phi_pi", c.phi_pi, "must be nonnegative");
        }
        if c.phi_y < 0.0 {
            return bad("phi_y", c.phi_y, "must be nonnegative");
        }
        if c.debt_to_gdp < 0.0 {
            return bad("debt_to_gdp", c.debt_to_gdp, "must be nonnegative");
        }
        if !(c.l_bar > 0.0 && c.l_bar < 1.0) {
            return bad("L_bar", c.l_bar, "must lie in (0, 1)");
        }
        if let Some(eta) = c.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return bad("eta", eta, "must be positive");
            }
        }
        crate::steady_state::rate_denominator(c).map(|_| ())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(s).map_err(|e| Error::ParseError {
            row: e.line(),
            message: e.to_string(),
        })?;
        c.validate()?;
        Ok(c)
    }
}

/// Quarterly net rate to annualized percent-free fraction (`4 r`).
pub fn annualize(quarterly: f64) -> f64 {
    4.0 * quarterly
}

/// Inverse of [`annualize`].
pub fn deannualize(annual: f64) -> f64 {
    annual / 4.0
}
