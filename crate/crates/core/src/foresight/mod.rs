//! Perfect-foresight solution of the nonlinear model over a finite horizon,
//! with an occasionally binding zero lower bound on the policy rate.
//!
//! The stacked system is solved by damped Newton on a block-tridiagonal
//! Jacobian. The ZLB is handled by iterating on the set of binding periods:
//! solve the equality system for a guessed regime sequence, check
//! complementarity, flip the periods that violate it and repeat.

mod banded;
mod experiment;
pub(crate) mod model;
mod path;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::steady_state::{solve_steady_state, SteadyState};

pub use banded::BlockTridiagonal;
pub use experiment::{
    calibrate_shock, debt_level_experiment, debt_multiplier_experiment, present_value_multiplier, run_experiment,
    table_cell, DebtLevelOutcome, ExperimentOutcome, MultiplierReport, Responses, Scenario, LOCAL_STEP_SCALE,
    PV_HORIZON, RECESSION_LENGTH,
};
pub use path::SimulationPath;

use model::{steady_vector, StackedModel, NVARS};

/// Path of the preference shifter `xi_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSpec {
    /// `xi_t` for t = 1..=T; `xi_{T+1}` is 1.
    pub xi_path: Vec<f64>,
    pub recession_length: usize,
}

impl ShockSpec {
    pub fn none(horizon: usize) -> Self {
        ShockSpec {
            xi_path: vec![1.0; horizon],
            recession_length: 0,
        }
    }

    /// Discount-factor shock: `xi_{t+1} / xi_t = 1 + size` for
    /// t = 1..=recession_length and 1 afterwards, normalized so that `xi`
    /// returns to 1 once the recession is over.
    pub fn discount_factor(size: f64, recession_length: usize, horizon: usize) -> Self {
        let xi_path = (1..=horizon)
            .map(|t| {
                if t <= recession_length {
                    (1.0 + size).powi(-((recession_length + 1 - t) as i32))
                } else {
                    1.0
                }
            })
            .collect();
        ShockSpec {
            xi_path,
            recession_length,
        }
    }

    /// Per-period size of a [`ShockSpec::discount_factor`] shock.
    pub fn discount_factor_size(&self) -> f64 {
        if self.recession_length == 0 {
            0.0
        } else {
            let next = self.xi_path.get(1).copied().unwrap_or(1.0);
            next / self.xi_path[0] - 1.0
        }
    }

    pub fn horizon(&self) -> usize {
        self.xi_path.len()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&bad) = self.xi_path.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidCalibration {
                field: "xi_path",
                value: bad,
                reason: "preference shifter must be positive",
            });
        }
        Ok(())
    }

    /// Same shock on a different horizon (extra periods carry `xi = 1`).
    pub fn with_horizon(&self, horizon: usize) -> Self {
        let mut xi_path = self.xi_path.clone();
        xi_path.resize(horizon, 1.0);
        ShockSpec {
            xi_path,
            recession_length: self.recession_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    None,
    Temporary,
    Permanent,
}

impl std::str::FromStr for PlanKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PlanKind::None),
            "temporary" | "temp" => Ok(PlanKind::Temporary),
            "permanent" | "perm" => Ok(PlanKind::Permanent),
            other => Err(format!("unknown plan `{other}` (expected none|temporary|permanent)")),
        }
    }
}

/// Debt-financed tax deferral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiscalPlan {
    pub kind: PlanKind,
    /// Change in the annualized debt-to-GDP ratio at t = 1 (0.02 is two points).
    pub debt_step: f64,
    /// First period at which a temporary plan has restored the initial debt.
    pub revert_period: usize,
    /// Government spending as a share of steady-state output, t = 1..=T.
    /// Empty means zero throughout.
    #[serde(default)]
    pub g_path: Vec<f64>,
}

impl FiscalPlan {
    pub fn none() -> Self {
        FiscalPlan {
            kind: PlanKind::None,
            debt_step: 0.0,
            revert_period: 0,
            g_path: Vec::new(),
        }
    }

    pub fn temporary(debt_step: f64, revert_period: usize) -> Self {
        FiscalPlan {
            kind: PlanKind::Temporary,
            debt_step,
            revert_period,
            g_path: Vec::new(),
        }
    }

    pub fn permanent(debt_step: f64) -> Self {
        FiscalPlan {
            kind: PlanKind::Permanent,
            debt_step,
            revert_period: 0,
            g_path: Vec::new(),
        }
    }

    /// Two points of annual GDP, reverted in period 9 or kept forever.
    pub fn standard(kind: PlanKind) -> Self {
        match kind {
            PlanKind::None => FiscalPlan::none(),
            PlanKind::Temporary => FiscalPlan::temporary(0.02, 9),
            PlanKind::Permanent => FiscalPlan::permanent(0.02),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.kind == PlanKind::Temporary && self.revert_period <= 1 {
            return Err(Error::InvalidCalibration {
                field: "revert_period",
                value: self.revert_period as f64,
                reason: "a temporary plan must revert after period 1",
            });
        }
        if !self.g_path.is_empty() && self.g_path.len() != horizon {
            return Err(Error::DimensionMismatch {
                what: "g_path",
                got: self.g_path.len(),
                expected: horizon,
            });
        }
        Ok(())
    }

    /// Change of `B'` (level) implied by `debt_step`.
    pub fn step_level(&self, ss: &SteadyState) -> f64 {
        match self.kind {
            PlanKind::None => 0.0,
            _ => 4.0 * self.debt_step * ss.y * (1.0 + ss.r_bar),
        }
    }

    fn active(&self, t: usize) -> bool {
        match self.kind {
            PlanKind::None => false,
            PlanKind::Temporary => t >= 1 && t < self.revert_period,
            PlanKind::Permanent => t >= 1,
        }
    }
}

/// Net real rate that anchors the policy rule's intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyAnchor {
    /// Rate of the initial steady state, held fixed. After a permanent debt
    /// increase the economy settles at a point with slightly positive
    /// inflation.
    Initial,
    /// Rate of the terminal zero-inflation steady state.
    Terminal,
}

/// How a multiplier experiment obtains the treatment simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierMethod {
    /// Central difference in the debt step around the baseline, with the
    /// policy rate held at zero in the baseline's binding periods. Responses
    /// are scaled to the plan's full step.
    Local,
    /// The plan's full step, with the binding periods found afresh.
    FullStep,
}

impl std::str::FromStr for MultiplierMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "local" => Ok(MultiplierMethod::Local),
            "full_step" | "full-step" | "full" => Ok(MultiplierMethod::FullStep),
            other => Err(format!("unknown multiplier method `{other}` (expected local|full_step)")),
        }
    }
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub horizon: usize,
    /// Policy intercept moves one-for-one with the preference-driven natural rate.
    pub track_natural_rate: bool,
    pub policy_anchor: PolicyAnchor,
    pub multiplier_method: MultiplierMethod,
    /// Newton stops once every residual is below this.
    pub tol: f64,
    pub max_newton_iter: usize,
    pub max_regime_iter: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            horizon: 200,
            track_natural_rate: true,
            policy_anchor: PolicyAnchor::Initial,
            multiplier_method: MultiplierMethod::Local,
            tol: 1e-11,
            max_newton_iter: 60,
            max_regime_iter: 50,
        }
    }
}

impl SimOptions {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }
}

/// Initial and terminal states of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    /// Calibration with `eta` pinned.
    pub calib: Calibration,
    pub initial: SteadyState,
    pub terminal: SteadyState,
    /// Net rate in the policy rule's intercept.
    pub policy_rate: f64,
    terminal_vec: [f64; NVARS],
}

pub fn boundary_states(calib: &Calibration, plan: &FiscalPlan, anchor: PolicyAnchor) -> Result<Boundary> {
    let calib = calib.with_pinned_eta();
    let initial = solve_steady_state(&calib)?;
    if plan.kind != PlanKind::Permanent {
        return Ok(Boundary {
            calib,
            initial,
            terminal: initial,
            policy_rate: initial.r_bar,
            terminal_vec: steady_vector(&calib, &initial),
        });
    }
    let wealth = initial.b_prime + plan.step_level(&initial);
    let (shifted, zero_inflation) = SteadyState::at_wealth(&calib, wealth)?;
    let guess = steady_vector(&shifted, &zero_inflation);
    match anchor {
        PolicyAnchor::Terminal => Ok(Boundary {
            calib,
            initial,
            terminal: zero_inflation,
            policy_rate: zero_inflation.r_bar,
            terminal_vec: guess,
        }),
        PolicyAnchor::Initial => {
            let v = model::stationary_point(&calib, &initial, wealth, initial.r_bar, guess).ok_or(
                Error::NoConvergence {
                    iterations: 50,
                    residual: f64::NAN,
                },
            )?;
            Ok(Boundary {
                calib,
                initial,
                terminal: model::state_from_vector(&v, wealth),
                policy_rate: initial.r_bar,
                terminal_vec: v,
            })
        }
    }
}

fn build_model(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
    zlb: Vec<bool>,
) -> Result<StackedModel> {
    let horizon = opts.horizon;
    if shocks.horizon() != horizon {
        return Err(Error::DimensionMismatch {
            what: "xi_path",
            got: shocks.horizon(),
            expected: horizon,
        });
    }
    shocks.validate()?;
    plan.validate(horizon)?;
    let Boundary {
        calib,
        initial,
        terminal,
        policy_rate,
        terminal_vec,
    } = boundary_states(calib, plan, opts.policy_anchor)?;

    let mut xi = Vec::with_capacity(horizon + 2);
    xi.push(1.0);
    xi.extend_from_slice(&shocks.xi_path);
    xi.push(1.0);

    let mut g = vec![0.0; horizon + 2];
    for (t, share) in plan.g_path.iter().enumerate() {
        g[t + 1] = share * initial.y;
    }

    let step = plan.step_level(&initial);
    let b_prime = (0..=horizon)
        .map(|t| initial.b_prime + if plan.active(t) { step } else { 0.0 })
        .collect();

    Ok(StackedModel {
        eta: calib.eta(),
        calib,
        horizon,
        xi,
        g,
        b_prime,
        initial,
        terminal,
        terminal_vec,
        track_natural_rate: opts.track_natural_rate,
        policy_rate,
        s_initial: 1.0,
        zlb,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn admissible(x: &[f64]) -> bool {
    use model::*;
    x.chunks(NVARS).all(|p| {
        p.iter().all(|v| v.is_finite())
            && p[Y] > 0.0
            && p[L] > 0.0
            && p[W] > 0.0
            && p[PI] > 0.0
            && p[R] > -1.0
            && p[I] > -1.0
            && p[DELTA] > 0.0
            && p[PSTAR] > 0.0
            && p[S] > 0.0
            && p[X1] > 0.0
            && p[X2] > 0.0
    })
}

/// Damped Newton on the equality system for a fixed regime sequence.
fn newton(model: &StackedModel, mut x: Vec<f64>, opts: &SimOptions) -> Result<(Vec<f64>, f64)> {
    let mut last = f64::INFINITY;
    for iter in 0..opts.max_newton_iter {
        let (f, jac) = model.residuals_and_jacobian(&x);
        let worst = max_abs(&f);
        last = worst;
        if worst < opts.tol {
            return Ok((x, worst));
        }
        let dx = jac.solve(&f)?;
        let merit = sum_sq(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=10 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - lambda * d).collect();
            if admissible(&trial) {
                let ft = model.residuals(&trial);
                if sum_sq(&ft) < merit || max_abs(&ft) < opts.tol {
                    accepted = Some(trial);
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some(t) => x = t,
            None => {
                return Err(Error::NoConvergence {
                    iterations: iter + 1,
                    residual: worst,
                })
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_newton_iter,
        residual: last,
    })
}

/// Regime-sequence iteration around [`newton`].
fn solve_regimes(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
    guess: Option<&SimulationPath>,
) -> Result<(StackedModel, Vec<f64>, f64)> {
    let horizon = opts.horizon;
    let mut zlb = match guess {
        Some(p) if p.len() == horizon => p.zlb.clone(),
        _ => vec![false; horizon],
    };
    let mut model = build_model(calib, shocks, plan, opts, zlb.clone())?;
    let mut x = match guess {
        Some(p) if p.len() == horizon => p.unknowns(),
        _ => (0..horizon).flat_map(|_| model.terminal_vec).collect(),
    };

    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    for _ in 0..opts.max_regime_iter {
        seen.insert(zlb.clone());
        model.zlb = zlb.clone();
        let (sol, resid) = newton(&model, x, opts)?;
        x = sol;

        let mut next = zlb.clone();
        let mut changed = false;
        for t in 1..=horizon {
            let i = x[(t - 1) * NVARS + model::I];
            if zlb[t - 1] {
                if model.shadow_gross(&x, t) - 1.0 > 1e-12 {
                    next[t - 1] = false;
                    changed = true;
                }
            } else if i < -1e-12 {
                next[t - 1] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok((model, x, resid));
        }
        if seen.contains(&next) {
            // flip only the earliest violation before giving up
            let first = (0..horizon).find(|&k| next[k] != zlb[k]).unwrap();
            let mut single = zlb.clone();
            single[first] = !single[first];
            if seen.contains(&single) {
                return Err(Error::RegimeCycleDetected {
                    iterations: seen.len(),
                });
            }
            next = single;
        }
        zlb = next;
    }
    Err(Error::RegimeCycleDetected {
        iterations: opts.max_regime_iter,
    })
}

/// Solves the nonlinear model under perfect foresight.
///
/// The horizon must leave at least 40 quarters after the recession for the
/// economy to return to its terminal steady state.
pub fn solve_path(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<SimulationPath> {
    solve_path_from(calib, shocks, plan, opts, None)
}

/// [`solve_path`] warm-started from a previous solution on the same horizon.
pub fn solve_path_from(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
    guess: Option<&SimulationPath>,
) -> Result<SimulationPath> {
    calib.validate()?;
    let min_horizon = shocks.recession_length.max(plan.revert_period) + 40;
    if opts.horizon < min_horizon {
        return Err(Error::DimensionMismatch {
            what: "horizon",
            got: opts.horizon,
            expected: min_horizon,
        });
    }
    // warm start, then cold start, then continuation in the shock scale
    let attempt = match guess {
        Some(_) => solve_regimes(calib, shocks, plan, opts, guess)
            .or_else(|_| solve_regimes(calib, shocks, plan, opts, None)),
        None => solve_regimes(calib, shocks, plan, opts, None),
    };
    let (model, x, resid) = match attempt {
        Ok(v) => v,
        Err(e) => continuation(calib, shocks, plan, opts).map_err(|_| e)?,
    };
    Ok(SimulationPath::from_solution(&model, &x, resid))
}

/// Solves the equality system with the policy rate pinned at zero exactly in
/// the flagged periods and the rule everywhere else. Complementarity is not
/// checked: the path may carry a positive shadow rate in a flagged period.
/// Warm-started from `guess`; if Newton fails there, the debt step is scaled
/// up gradually.
pub fn solve_path_in_regime(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
    zlb: &[bool],
    guess: Option<&SimulationPath>,
) -> Result<SimulationPath> {
    calib.validate()?;
    if zlb.len() != opts.horizon {
        return Err(Error::DimensionMismatch {
            what: "zlb",
            got: zlb.len(),
            expected: opts.horizon,
        });
    }
    let start = |model: &StackedModel| -> Vec<f64> {
        match guess {
            Some(p) if p.len() == opts.horizon => p.unknowns(),
            _ => (0..opts.horizon).flat_map(|_| model.terminal_vec).collect(),
        }
    };
    let model = build_model(calib, shocks, plan, opts, zlb.to_vec())?;
    let first = newton(&model, start(&model), opts);
    let (x, resid) = match first {
        Ok(v) => v,
        Err(e) => {
            const STEPS: usize = 16;
            let mut x = start(&model);
            for k in 1..=STEPS {
                let scaled = FiscalPlan {
                    debt_step: plan.debt_step * k as f64 / STEPS as f64,
                    ..plan.clone()
                };
                let m = build_model(calib, shocks, &scaled, opts, zlb.to_vec())?;
                x = newton(&m, x, opts).map_err(|_| e.clone())?.0;
            }
            newton(&model, x, opts)?
        }
    };
    Ok(SimulationPath::from_solution(&model, &x, resid))
}

/// Scales the shock and the debt step up gradually from the steady state.
fn continuation(
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<(StackedModel, Vec<f64>, f64)> {
    const STEPS: usize = 8;
    let mut prev: Option<SimulationPath> = None;
    let mut out = None;
    for k in 1..=STEPS {
        let lam = k as f64 / STEPS as f64;
        let scaled = ShockSpec {
            xi_path: shocks.xi_path.iter().map(|v| v.powf(lam)).collect(),
            recession_length: shocks.recession_length,
        };
        let sol = solve_regimes(calib, &scaled, plan, opts, prev.as_ref())?;
        prev = Some(SimulationPath::from_solution(&sol.0, &sol.1, sol.2));
        out = Some(sol);
    }
    Ok(out.unwrap())
}

/// Stacked residuals of `path` under the given experiment. The path's own
/// ZLB flags select the policy equation in each period.
pub fn residuals(
    path: &SimulationPath,
    calib: &Calibration,
    shocks: &ShockSpec,
    plan: &FiscalPlan,
    opts: &SimOptions,
) -> Result<Vec<f64>> {
    let opts = opts.with_horizon(path.len());
    let model = build_model(calib, shocks, plan, &opts, path.zlb.clone())?;
    Ok(model.residuals(&path.unknowns()))
}
