//! Steady states, analytic fiscal multipliers and perfect-foresight
//! simulations for a New Keynesian economy with finitely lived households
//! (perpetual-youth demographics), where public debt is net wealth and tax
//! deferral moves demand.
//!
//! Layout:
//! - [`calibration`] and [`steady_state`]: parameters and the zero-inflation
//!   steady state, including the closed-form real rate.
//! - [`linear`]: the two-state linearized model, closed-form multipliers and
//!   determinacy regions.
//! - [`foresight`]: the nonlinear model under perfect foresight with an
//!   occasionally binding zero lower bound.
//! - [`empirics`]: the cross-country debt/real-rate line and the calibration
//!   of `(beta, q)` to it.

pub mod calibration;
pub mod empirics;
pub mod error;
pub mod foresight;
pub mod format;
pub mod linear;
pub mod steady_state;

pub use calibration::{annualize, deannualize, Calibration, PreferenceKind};
pub use error::{Error, Result};
pub use foresight::{
    calibrate_shock, debt_level_experiment, debt_multiplier_experiment, run_experiment, solve_path, table_cell,
    DebtLevelOutcome, FiscalPlan, MultiplierMethod, MultiplierReport, PlanKind, PolicyAnchor, Scenario, ShockSpec,
    SimOptions, SimulationPath,
};
pub use linear::{
    analytic_multiplier, check_determinacy, determinacy_threshold, solve_two_state, Instrument, Regime,
};
pub use steady_state::{pin_eta, solve_steady_state, steady_state_rate, SteadyState};
