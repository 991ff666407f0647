//! Fiscal experiments on top of the path solver: shock calibration, debt
//! multipliers from differenced simulations, and the debt-level sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{annualize, Calibration, PreferenceKind};
use crate::error::{Error, Result};
use crate::linear::Regime;
use crate::steady_state::solve_steady_state;

use super::{
    solve_path, solve_path_from, solve_path_in_regime, FiscalPlan, MultiplierMethod, PlanKind, ShockSpec,
    SimOptions, SimulationPath,
};

/// Relative size of the debt step used by [`MultiplierMethod::Local`].
pub const LOCAL_STEP_SCALE: f64 = 1e-3;

/// Present-value horizon of the reported multipliers.
pub const PV_HORIZON: usize = 8;

/// Impact and present-value debt multipliers of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    /// `dY_1 / dB'_1`.
    pub impact: f64,
    pub present_value: f64,
    /// Horizon of the present-value multiplier (periods after impact).
    pub k: usize,
    /// Regime of the baseline simulation in the first period.
    pub regime_label: Regime,
    /// Whether baseline and treatment bind the ZLB in the same periods.
    pub regimes_match: bool,
    pub baseline_zlb_periods: usize,
    pub treatment_zlb_periods: usize,
    pub method: MultiplierMethod,
    pub plan: PlanKind,
    pub q: f64,
    pub pref: PreferenceKind,
    /// Output change on impact, in units of steady-state quarterly output.
    pub impact_output_gain: f64,
    /// Debt change on impact, in units of steady-state quarterly output.
    pub impact_debt_change: f64,
}

impl MultiplierReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Present value over `k` periods after impact of `d_y` relative to `d_b`,
/// discounting with the real rates `r`.
fn present_value(r: &[f64], d_y: &[f64], d_b: &[f64], k: usize) -> f64 {
    let mut disc = 1.0;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..=k.min(r.len() - 1) {
        disc /= 1.0 + r[j];
        num += disc * d_y[j];
        den += disc * d_b[j];
    }
    num / den
}

/// Present-value multiplier over `k` periods after impact, discounting with
/// the baseline path's real rates.
pub fn present_value_multiplier(baseline: &SimulationPath, treatment: &SimulationPath, k: usize) -> f64 {
    let d_y: Vec<f64> = treatment.y.iter().zip(&baseline.y).map(|(a, b)| a - b).collect();
    let d_b: Vec<f64> = treatment.b_prime.iter().zip(&baseline.b_prime).map(|(a, b)| a - b).collect();
    present_value(&baseline.r, &d_y, &d_b, k)
}

/// Treatment-minus-baseline responses, scaled to the plan's full step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Responses {
    pub d_y: Vec<f64>,
    pub d_b_prime: Vec<f64>,
    /// Gross inflation.
    pub d_pi: Vec<f64>,
    /// Net nominal rate.
    pub d_i: Vec<f64>,
    pub d_debt_to_gdp: Vec<f64>,
}

impl Responses {
    fn between(lo: &SimulationPath, hi: &SimulationPath, scale: f64) -> Self {
        let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| scale * (x - y)).collect() };
        Responses {
            d_y: diff(&hi.y, &lo.y),
            d_b_prime: diff(&hi.b_prime, &lo.b_prime),
            d_pi: diff(&hi.pi, &lo.pi),
            d_i: diff(&hi.i, &lo.i),
            d_debt_to_gdp: diff(&hi.debt_to_gdp_annualized(), &lo.debt_to_gdp_annualized()),
        }
    }
}

/// Baseline, responses and the summary report of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub baseline: SimulationPath,
    pub responses: Responses,
    pub report: MultiplierReport,
}

/// Runs the shock-only baseline and the shock-plus-plan treatment and
/// differences them. The present value uses `k = 8`.
pub fn debt_multiplier_experiment(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<MultiplierReport> {
    Ok(run_experiment(calib, shocks, plan, opts)?.report)
}

/// [`debt_multiplier_experiment`] keeping the baseline path and responses.
pub fn run_experiment(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<ExperimentOutcome> {
    if plan.kind == PlanKind::None || plan.debt_step == 0.0 {
        return Err(Error::InvalidCalibration {
            field: "plan",
            value: plan.debt_step,
            reason: "a multiplier experiment needs a temporary or permanent plan with a nonzero step",
        });
    }
    let baseline = solve_path(calib, shocks, &FiscalPlan::none(), opts)?;
    let (responses, treatment_zlb) = match opts.multiplier_method {
        MultiplierMethod::FullStep => {
            let treatment = solve_path_from(calib, shocks, plan, opts, Some(&baseline))?;
            (Responses::between(&baseline, &treatment, 1.0), treatment.zlb)
        }
        MultiplierMethod::Local => {
            let h = LOCAL_STEP_SCALE * plan.debt_step;
            let bumped = |step: f64| FiscalPlan {
                debt_step: step,
                ..plan.clone()
            };
            let up = solve_path_in_regime(calib, shocks, &bumped(h), opts, &baseline.zlb, Some(&baseline))?;
            let down = solve_path_in_regime(calib, shocks, &bumped(-h), opts, &baseline.zlb, Some(&baseline))?;
            (Responses::between(&down, &up, plan.debt_step / (2.0 * h)), baseline.zlb.clone())
        }
    };
    let ybar = baseline.initial.y;
    let report = MultiplierReport {
        impact: responses.d_y[0] / responses.d_b_prime[0],
        present_value: present_value(&baseline.r, &responses.d_y, &responses.d_b_prime, PV_HORIZON),
        k: PV_HORIZON,
        regime_label: if baseline.zlb[0] { Regime::Zlb } else { Regime::Normal },
        regimes_match: baseline.zlb == treatment_zlb,
        baseline_zlb_periods: baseline.zlb_periods(),
        treatment_zlb_periods: treatment_zlb.iter().filter(|z| **z).count(),
        method: opts.multiplier_method,
        plan: plan.kind,
        q: calib.q,
        pref: calib.pref,
        impact_output_gain: responses.d_y[0] / ybar,
        impact_debt_change: responses.d_b_prime[0] / ybar,
    };
    Ok(ExperimentOutcome {
        baseline,
        responses,
        report,
    })
}

/// Finds the discount-factor shock that lowers impact output by
/// `target_output_drop` (a positive fraction) in the no-plan simulation.
pub fn calibrate_shock(
    calib: &Calibration,
    target_output_drop: f64,
    recession_length: usize,
    opts: &SimOptions,
) -> Result<ShockSpec> {
    if !(0.0..=0.10).contains(&target_output_drop) {
        return Err(Error::InvalidCalibration {
            field: "target_output_drop",
            value: target_output_drop,
            reason: "must lie in [0, 0.10]",
        });
    }
    if target_output_drop == 0.0 {
        return Ok(ShockSpec {
            xi_path: vec![1.0; opts.horizon],
            recession_length,
        });
    }
    let ybar = solve_steady_state(&calib.with_pinned_eta())?.y;
    let none = FiscalPlan::none();
    let mut warm: Option<SimulationPath> = None;
    let gap = |size: f64, warm: &mut Option<SimulationPath>| -> Result<f64> {
        let shock = ShockSpec::discount_factor(size, recession_length, opts.horizon);
        let path = solve_path_from(calib, &shock, &none, opts, warm.as_ref())?;
        let drop = 1.0 - path.y[0] / ybar;
        *warm = Some(path);
        Ok(drop - target_output_drop)
    };

    let (mut lo, mut f_lo) = (0.0, -target_output_drop);
    let mut hi = 1e-3;
    let mut f_hi = gap(hi, &mut warm)?;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > 0.05 {
            return Err(Error::BracketFailure {
                lo: 0.0,
                hi,
                f_lo: -target_output_drop,
                f_hi,
            });
        }
        f_hi = gap(hi, &mut warm)?;
    }

    // Illinois false position
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let f_mid = gap(mid, &mut warm)?;
        if f_mid.abs() < 1e-10 || (hi - lo) < 1e-14 {
            return Ok(ShockSpec::discount_factor(mid, recession_length, opts.horizon));
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::BracketFailure { lo, hi, f_lo, f_hi })
}

/// Recession scenarios of the multiplier tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Mild recession: the shock lowers the natural rate by half of the
    /// steady-state rate, so the policy rate stays positive.
    Normal,
    /// Severe recession: the shock lowers impact output by 4% and the ZLB binds.
    Zlb,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::Normal, Scenario::Zlb];

    /// Impact output drop the severe-recession shock is sized to.
    pub const ZLB_OUTPUT_DROP: f64 = 0.04;

    /// Preference shock of the scenario at this calibration.
    pub fn shock(self, calib: &Calibration, opts: &SimOptions) -> Result<ShockSpec> {
        match self {
            Scenario::Normal => {
                let r_bar = solve_steady_state(&calib.with_pinned_eta())?.r_bar;
                Ok(ShockSpec::discount_factor(0.5 * r_bar, RECESSION_LENGTH, opts.horizon))
            }
            Scenario::Zlb => calibrate_shock(calib, Self::ZLB_OUTPUT_DROP, RECESSION_LENGTH, opts),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Normal => "normal",
            Scenario::Zlb => "zlb",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "mild" => Ok(Scenario::Normal),
            "zlb" | "severe" => Ok(Scenario::Zlb),
            other => Err(format!("unknown scenario `{other}` (expected normal|zlb)")),
        }
    }
}

/// Recession length of the multiplier tables, in quarters.
pub const RECESSION_LENGTH: usize = 8;

/// One multiplier-table cell: the scenario's shock at this calibration, then
/// the standard two-point plan of the given kind.
pub fn table_cell(calib: &Calibration, scenario: Scenario, kind: PlanKind, opts: &SimOptions) -> Result<MultiplierReport> {
    let shock = scenario.shock(calib, opts)?;
    debt_multiplier_experiment(calib, &shock, &FiscalPlan::standard(kind), opts)
}

/// Outcome of the debt-level sweep at one initial debt ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebtLevelOutcome {
    /// Annualized initial debt-to-GDP ratio.
    pub debt_to_gdp: f64,
    pub r_bar_annualized: f64,
    pub baseline_zlb_periods: usize,
    pub baseline_zlb_spell: usize,
    pub multiplier: MultiplierReport,
    /// Treatment minus baseline output, relative to steady-state output.
    pub d_output: Vec<f64>,
    /// Treatment minus baseline annualized inflation.
    pub d_inflation: Vec<f64>,
    /// Treatment minus baseline annualized nominal rate.
    pub d_nominal_rate: Vec<f64>,
    /// Treatment minus baseline annualized debt-to-GDP.
    pub d_debt_to_gdp: Vec<f64>,
    /// Baseline annualized nominal rate.
    pub baseline_nominal_rate: Vec<f64>,
}

/// Holds the shock fixed at the one calibrated for the first grid point and
/// reruns baseline and treatment at every initial debt level. `debt_grid`
/// holds annual ratios.
pub fn debt_level_experiment(
    calib: &Calibration,
    debt_grid: &[f64],
    target_output_drop: f64,
    recession_length: usize,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<(ShockSpec, Vec<DebtLevelOutcome>)> {
    let first = *debt_grid.first().ok_or(Error::DimensionMismatch {
        what: "debt_grid",
        got: 0,
        expected: 1,
    })?;
    let anchor = calib.with_debt_to_gdp(4.0 * first);
    let shock = calibrate_shock(&anchor, target_output_drop, recession_length, opts)?;
    let outcomes = debt_grid
        .par_iter()
        .map(|&level| {
            let c = calib.with_debt_to_gdp(4.0 * level);
            let out = run_experiment(&c, &shock, plan, opts)?;
            let base = &out.baseline;
            let ybar = base.initial.y;
            let d = &out.responses;
            Ok(DebtLevelOutcome {
                debt_to_gdp: level,
                r_bar_annualized: annualize(base.initial.r_bar),
                baseline_zlb_periods: base.zlb_periods(),
                baseline_zlb_spell: base.initial_zlb_spell(),
                multiplier: out.report.clone(),
                d_output: d.d_y.iter().map(|v| v / ybar).collect(),
                d_inflation: d.d_pi.iter().map(|v| annualize(*v)).collect(),
                d_nominal_rate: d.d_i.iter().map(|v| annualize(*v)).collect(),
                d_debt_to_gdp: d.d_debt_to_gdp.clone(),
                baseline_nominal_rate: base.i.iter().map(|v| annualize(*v)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((shock, outcomes))
}
