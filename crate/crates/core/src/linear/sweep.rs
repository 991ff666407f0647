use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{annualize, Calibration};
use crate::error::Result;
use crate::format::sig10;
use crate::steady_state::steady_state_rate;

use super::{analytic_multiplier, check_determinacy, Instrument, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Q,
    /// Quarterly debt over quarterly output, as stored in [`Calibration`].
    DebtToGdp,
    Mu,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Q => "q",
            SweepAxis::DebtToGdp => "debt_to_gdp",
            SweepAxis::Mu => "mu",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "q" => Ok(SweepAxis::Q),
            "debt_to_gdp" | "by" | "debt" => Ok(SweepAxis::DebtToGdp),
            "mu" => Ok(SweepAxis::Mu),
            other => Err(format!("unknown sweep axis `{other}` (expected q|debt_to_gdp|mu)")),
        }
    }
}

/// One grid point. Failed points keep their row with `multiplier = NaN`,
/// `determinate = false` and the error name in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub multiplier: f64,
    pub determinate: bool,
    pub r_bar_annualized: f64,
    pub error: Option<String>,
}

fn evaluate(
    calib: &Calibration,
    axis: SweepAxis,
    value: f64,
    mu: f64,
    instrument: Instrument,
    regime: Regime,
) -> Result<(f64, bool, f64)> {
    // eta is re-pinned per point unless the calibration fixes it
    let (c, mu) = match axis {
        SweepAxis::Q => (calib.with_q(value), mu),
        SweepAxis::DebtToGdp => (calib.with_debt_to_gdp(value), mu),
        SweepAxis::Mu => (*calib, value),
    };
    c.validate()?;
    let r_bar = steady_state_rate(&c)?;
    let det = check_determinacy(&c, mu, regime)?;
    let m = analytic_multiplier(&c, mu, instrument, regime)?;
    Ok((m, det.determinate, annualize(r_bar)))
}

/// Evaluates the analytic multiplier along one parameter axis. `mu` is used
/// for every point unless the axis is `mu` itself.
pub fn sweep_multiplier(
    calib: &Calibration,
    axis: SweepAxis,
    grid: &[f64],
    mu: f64,
    instrument: Instrument,
    regime: Regime,
) -> Vec<SweepRow> {
    let mut values = grid.to_vec();
    values.sort_by(f64::total_cmp);
    values
        .par_iter()
        .map(|&value| match evaluate(calib, axis, value, mu, instrument, regime) {
            Ok((multiplier, determinate, r_bar_annualized)) => SweepRow {
                axis,
                value,
                multiplier,
                determinate,
                r_bar_annualized,
                error: None,
            },
            Err(e) => SweepRow {
                axis,
                value,
                multiplier: f64::NAN,
                determinate: false,
                r_bar_annualized: f64::NAN,
                error: Some(e.name().to_string()),
            },
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "axis,value,multiplier,determinate,r_bar_annualized";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.axis,
            sig10(row.value),
            sig10(row.multiplier),
            row.determinate,
            sig10(row.r_bar_annualized)
        )?;
    }
    Ok(())
}
