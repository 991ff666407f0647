use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::calibration::annualize;
use crate::error::Result;
use crate::format::sig10;
use crate::steady_state::SteadyState;

use super::model::{self, StackedModel, NVARS};

/// Time paths of the nonlinear model, t = 1..=T (index t-1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPath {
    pub y: Vec<f64>,
    pub c: Vec<f64>,
    pub l: Vec<f64>,
    pub w: Vec<f64>,
    /// Gross inflation.
    pub pi: Vec<f64>,
    /// Net nominal rate.
    pub i: Vec<f64>,
    /// Net real rate.
    pub r: Vec<f64>,
    pub b_prime: Vec<f64>,
    pub taxes: Vec<f64>,
    pub v: Vec<f64>,
    pub g: Vec<f64>,
    pub delta: Vec<f64>,
    pub xi: Vec<f64>,
    pub pstar: Vec<f64>,
    pub s: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub zlb: Vec<bool>,
    /// Net unconstrained policy rate.
    pub shadow: Vec<f64>,
    /// Debt inclusive of interest before the experiment (t = 0).
    pub b_prime_initial: f64,
    pub initial: SteadyState,
    pub terminal: SteadyState,
    pub max_residual: f64,
}

impl SimulationPath {
    pub(crate) fn from_solution(model: &StackedModel, x: &[f64], max_residual: f64) -> Self {
        let horizon = model.horizon;
        let col = |k: usize| -> Vec<f64> { (0..horizon).map(|t| x[t * NVARS + k]).collect() };
        let y = col(model::Y);
        let r = col(model::R);
        let g: Vec<f64> = (1..=horizon).map(|t| model.g[t]).collect();
        let b_prime: Vec<f64> = (1..=horizon).map(|t| model.b_prime[t]).collect();
        let taxes = (1..=horizon)
            .map(|t| model.g[t] - model.b_prime[t] / (1.0 + r[t - 1]) + model.b_prime[t - 1])
            .collect();
        SimulationPath {
            c: y.iter().zip(&g).map(|(y, g)| y - g).collect(),
            y,
            l: col(model::L),
            w: col(model::W),
            pi: col(model::PI),
            // binding periods hold the rate at zero up to solver round-off
            i: (0..horizon).map(|t| if model.zlb[t] { 0.0 } else { x[t * NVARS + model::I] }).collect(),
            r,
            v: b_prime.clone(),
            b_prime,
            taxes,
            g,
            delta: col(model::DELTA),
            xi: (1..=horizon).map(|t| model.xi[t]).collect(),
            pstar: col(model::PSTAR),
            s: col(model::S),
            x1: col(model::X1),
            x2: col(model::X2),
            zlb: model.zlb.clone(),
            shadow: (1..=horizon).map(|t| model.shadow_gross(x, t) - 1.0).collect(),
            b_prime_initial: model.b_prime[0],
            initial: model.initial,
            terminal: model.terminal,
            max_residual,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Stacked unknown vector in solver layout.
    pub(crate) fn unknowns(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len() * NVARS);
        for t in 0..self.len() {
            let mut p = [0.0; NVARS];
            p[model::Y] = self.y[t];
            p[model::L] = self.l[t];
            p[model::W] = self.w[t];
            p[model::PI] = self.pi[t];
            p[model::I] = self.i[t];
            p[model::R] = self.r[t];
            p[model::DELTA] = self.delta[t];
            p[model::PSTAR] = self.pstar[t];
            p[model::S] = self.s[t];
            p[model::X1] = self.x1[t];
            p[model::X2] = self.x2[t];
            x.extend_from_slice(&p);
        }
        x
    }

    /// Number of periods in which the ZLB binds.
    pub fn zlb_periods(&self) -> usize {
        self.zlb.iter().filter(|z| **z).count()
    }

    /// Length of the initial run of binding periods.
    pub fn initial_zlb_spell(&self) -> usize {
        self.zlb.iter().take_while(|z| **z).count()
    }

    /// Debt (exclusive of interest) over annual output.
    pub fn debt_to_gdp_annualized(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| self.b_prime[t] / (1.0 + self.r[t]) / (4.0 * self.y[t]))
            .collect()
    }

    /// Household budget residual given firm profits `Y - wL` and the
    /// government budget; zero when goods markets clear.
    pub fn walras_residuals(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| {
                let prev = if t == 0 { self.b_prime_initial } else { self.b_prime[t - 1] };
                let labor_income = self.w[t] * self.l[t];
                let profits = self.y[t] - labor_income;
                self.c[t] + self.b_prime[t] / (1.0 + self.r[t])
                    - prev
                    - labor_income
                    - profits
                    + self.taxes[t]
            })
            .collect()
    }

    /// Largest relative deviation of the last period from the terminal steady state.
    pub fn terminal_gap(&self) -> f64 {
        let t = self.len() - 1;
        let ss = &self.terminal;
        [
            (self.y[t] - ss.y) / ss.y,
            (self.l[t] - ss.l) / ss.l,
            self.pi[t] - 1.0 - ss.pi,
            self.r[t] - ss.r_bar,
            self.i[t] - ss.i,
            (self.delta[t] - ss.delta) / ss.delta,
        ]
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub const CSV_HEADER: &'static str = "t,Y,C,L,pi_annualized,i_annualized,r_annualized,B_prime,taxes,debt_to_gdp_annualized,zlb_flag";

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let by = self.debt_to_gdp_annualized();
        for t in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                t + 1,
                sig10(self.y[t]),
                sig10(self.c[t]),
                sig10(self.l[t]),
                sig10(annualize(self.pi[t] - 1.0)),
                sig10(annualize(self.i[t])),
                sig10(annualize(self.r[t])),
                sig10(self.b_prime[t]),
                sig10(self.taxes[t]),
                sig10(by[t]),
                u8::from(self.zlb[t]),
            )?;
        }
        Ok(())
    }
}
