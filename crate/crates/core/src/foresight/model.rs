//! Nonlinear equilibrium conditions stacked over a finite horizon.
//!
//! Unknowns per period, in column order: output, hours, real wage, gross
//! inflation, net nominal rate, net real rate, the consumption-function
//! auxiliary `delta`, the relative reset price, price dispersion and the two
//! Calvo recursion auxiliaries. Consumption is `Y - G` and taxes follow from
//! the government budget once the debt path is fixed, so neither is an
//! unknown.

use crate::calibration::{Calibration, PreferenceKind};
use crate::steady_state::{wealth_drag, SteadyState};

use super::banded::BlockTridiagonal;

pub(crate) const NVARS: usize = 11;

pub(crate) const Y: usize = 0;
pub(crate) const L: usize = 1;
pub(crate) const W: usize = 2;
pub(crate) const PI: usize = 3;
pub(crate) const I: usize = 4;
pub(crate) const R: usize = 5;
pub(crate) const DELTA: usize = 6;
pub(crate) const PSTAR: usize = 7;
pub(crate) const S: usize = 8;
pub(crate) const X1: usize = 9;
pub(crate) const X2: usize = 10;

/// Equation rows; the Euler block (`EULER`) is the aggregate-demand row.
pub(crate) const LABOR: usize = 0;
pub(crate) const EULER: usize = 1;
pub(crate) const DELTA_EQ: usize = 2;
pub(crate) const X1_EQ: usize = 3;
pub(crate) const X2_EQ: usize = 4;
pub(crate) const RESET: usize = 5;
pub(crate) const PRICE_INDEX: usize = 6;
pub(crate) const DISPERSION: usize = 7;
pub(crate) const PRODUCTION: usize = 8;
pub(crate) const FISHER: usize = 9;
pub(crate) const POLICY: usize = 10;

/// Period values of every unknown at a zero-inflation steady state.
pub(crate) fn steady_vector(calib: &Calibration, ss: &SteadyState) -> [f64; NVARS] {
    let disc = 1.0 - calib.alpha / (1.0 + ss.r_bar);
    let x1 = ss.w * ss.y.powf(1.0 / calib.sigma) / disc;
    let x2 = ss.y / disc;
    let mut v = [0.0; NVARS];
    v[Y] = ss.y;
    v[L] = ss.l;
    v[W] = ss.w;
    v[PI] = 1.0;
    v[I] = ss.r_bar;
    v[R] = ss.r_bar;
    v[DELTA] = ss.delta;
    v[PSTAR] = 1.0;
    v[S] = 1.0;
    v[X1] = x1;
    v[X2] = x2;
    v
}

/// Stationary point of the nonlinear system with constant debt `b_prime`
/// and the policy rule anchored at `policy_rate`. When the anchor differs
/// from the rate that clears the Euler equation, the point carries nonzero
/// inflation and price dispersion. Newton with a finite-difference Jacobian
/// from `guess`; `None` if it fails.
pub(crate) fn stationary_point(
    calib: &Calibration,
    initial: &SteadyState,
    b_prime: f64,
    policy_rate: f64,
    guess: [f64; NVARS],
) -> Option<[f64; NVARS]> {
    let residual = |x: &[f64; NVARS]| -> [f64; NVARS] {
        let m = StackedModel {
            calib: *calib,
            eta: calib.eta(),
            horizon: 1,
            xi: vec![1.0; 3],
            g: vec![0.0; 3],
            b_prime: vec![b_prime; 2],
            initial: *initial,
            terminal: *initial,
            terminal_vec: *x,
            track_natural_rate: false,
            policy_rate,
            s_initial: x[S],
            zlb: vec![false],
        };
        let mut f = [0.0; NVARS];
        m.eval(x, &mut f, None);
        f
    };
    let norm = |f: &[f64; NVARS]| f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    let mut x = guess;
    let mut f = residual(&x);
    for _ in 0..50 {
        if norm(&f) < 1e-14 {
            return Some(x);
        }
        let mut jac = BlockTridiagonal::zeros(NVARS, 1);
        for col in 0..NVARS {
            let h = 1e-7 * x[col].abs().max(1e-3);
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let (fp, fm) = (residual(&xp), residual(&xm));
            for row in 0..NVARS {
                jac.set(0, 0, row, col, (fp[row] - fm[row]) / (2.0 * h));
            }
        }
        let dx = jac.solve(&f).ok()?;
        let mut lambda = 1.0;
        loop {
            let mut trial = x;
            for k in 0..NVARS {
                trial[k] -= lambda * dx[k];
            }
            let ft = residual(&trial);
            if trial.iter().all(|v| v.is_finite()) && norm(&ft) < norm(&f) {
                x = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return (norm(&f) < 1e-12).then_some(x);
            }
        }
    }
    (norm(&f) < 1e-12).then_some(x)
}

/// Steady-state summary of a stationary point of the nonlinear system.
pub(crate) fn state_from_vector(v: &[f64; NVARS], b_prime: f64) -> SteadyState {
    let r = v[R];
    SteadyState {
        r_bar: r,
        y: v[Y],
        l: v[L],
        c: v[Y],
        w: v[W],
        taxes: b_prime * r / (1.0 + r),
        b_prime,
        v: b_prime,
        delta: v[DELTA],
        g: 0.0,
        pi: v[PI] - 1.0,
        i: v[I],
    }
}

/// Fully specified stacked system for one simulation.
#[derive(Debug, Clone)]
pub(crate) struct StackedModel {
    pub calib: Calibration,
    pub eta: f64,
    pub horizon: usize,
    /// `xi[t]` for t = 0..=horizon+1 (index 0 is the pre-shock period).
    pub xi: Vec<f64>,
    /// Government spending level for t = 0..=horizon+1.
    pub g: Vec<f64>,
    /// Debt inclusive of interest for t = 0..=horizon.
    pub b_prime: Vec<f64>,
    pub initial: SteadyState,
    pub terminal: SteadyState,
    pub terminal_vec: [f64; NVARS],
    pub track_natural_rate: bool,
    /// Net real rate the policy rule is anchored to.
    pub policy_rate: f64,
    /// Price dispersion inherited from period 0.
    pub s_initial: f64,
    /// ZLB flag per period (index t-1).
    pub zlb: Vec<bool>,
}

impl StackedModel {
    #[inline]
    fn at<'a>(&'a self, x: &'a [f64], t: usize) -> &'a [f64] {
        // t is 1-based; t = horizon+1 refers to the terminal steady state.
        if t > self.horizon {
            &self.terminal_vec
        } else {
            &x[(t - 1) * NVARS..t * NVARS]
        }
    }

    fn prev_dispersion(&self, x: &[f64], t: usize) -> f64 {
        if t == 1 {
            self.s_initial
        } else {
            x[(t - 2) * NVARS + S]
        }
    }

    /// `xi_{t+1} / xi_t`.
    pub fn xi_growth(&self, t: usize) -> f64 {
        self.xi[t + 1] / self.xi[t]
    }

    /// Gross intercept of the policy rule in period `t`.
    fn policy_intercept(&self, t: usize) -> f64 {
        let base = 1.0 + self.policy_rate;
        if self.track_natural_rate {
            base / self.xi_growth(t)
        } else {
            base
        }
    }

    /// Gross unconstrained policy rate `1 + i` in period `t`.
    pub fn shadow_gross(&self, x: &[f64], t: usize) -> f64 {
        let c = &self.calib;
        let cur = self.at(x, t);
        self.policy_intercept(t)
            * cur[PI].powf(c.phi_pi)
            * (cur[Y] / self.initial.y).powf(c.phi_y)
    }

    pub fn dim(&self) -> usize {
        self.horizon * NVARS
    }

    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.dim()];
        self.eval(x, &mut f, None);
        f
    }

    pub fn residuals_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, BlockTridiagonal) {
        let mut f = vec![0.0; self.dim()];
        let mut jac = BlockTridiagonal::zeros(NVARS, self.horizon);
        self.eval(x, &mut f, Some(&mut jac));
        (f, jac)
    }

    fn eval(&self, x: &[f64], f: &mut [f64], mut jac: Option<&mut BlockTridiagonal>) {
        let c = &self.calib;
        let (alpha, theta, sigma, beta, q) = (c.alpha, c.theta, c.sigma, c.beta, c.q);
        let eta = self.eta;
        let k_wealth = wealth_drag(c);
        let reset_exp = 1.0 + theta / sigma - theta;
        let markup = theta / ((theta - 1.0) * sigma);
        let inv_sigma = 1.0 / sigma;
        let ts = theta / sigma;

        for t in 1..=self.horizon {
            let cur = self.at(x, t);
            let nxt = self.at(x, t + 1);
            let has_next = t < self.horizon;
            let s_prev = self.prev_dispersion(x, t);
            let row0 = (t - 1) * NVARS;
            let b = t - 1;

            let g = self.g[t];
            let g_next = self.g[t + 1];
            let xr = self.xi_growth(t);
            let v = self.b_prime[t];

            let (y, l, w, pi, i, r, delta, p, s, x1, x2) = (
                cur[Y], cur[L], cur[W], cur[PI], cur[I], cur[R], cur[DELTA], cur[PSTAR], cur[S],
                cur[X1], cur[X2],
            );
            let (y_n, l_n, pi_n, delta_n, x1_n, x2_n) =
                (nxt[Y], nxt[L], nxt[PI], nxt[DELTA], nxt[X1], nxt[X2]);
            let gross_r = 1.0 + r;

            // Entries with offset +1 exist only when the next period is an unknown.
            let mut put = |row: usize, off: isize, col: usize, val: f64| {
                if let Some(j) = jac.as_deref_mut() {
                    if off == 1 && !has_next {
                        return;
                    }
                    if off == -1 && t == 1 {
                        return;
                    }
                    j.add(b, off, row, col, val);
                }
            };

            // labor supply
            match c.pref {
                PreferenceKind::LogLog => {
                    f[row0 + LABOR] = w * (1.0 - l) - eta * (y - g);
                    put(LABOR, 0, W, 1.0 - l);
                    put(LABOR, 0, L, -w);
                    put(LABOR, 0, Y, -eta);
                }
                PreferenceKind::Ghh => {
                    let e = c.epsilon;
                    f[row0 + LABOR] = w - eta * l.powf(e - 1.0);
                    put(LABOR, 0, W, 1.0);
                    put(LABOR, 0, L, -eta * (e - 1.0) * l.powf(e - 2.0));
                }
            }

            // aggregate Euler equation
            let disc = beta * gross_r * xr;
            match c.pref {
                PreferenceKind::LogLog => {
                    let cons = y - g;
                    f[row0 + EULER] = (y_n - g_next) + k_wealth * v / delta_n - disc * cons;
                    put(EULER, 1, Y, 1.0);
                    put(EULER, 1, DELTA, -k_wealth * v / (delta_n * delta_n));
                    put(EULER, 0, R, -beta * xr * cons);
                    put(EULER, 0, Y, -disc);
                }
                PreferenceKind::Ghh => {
                    let e = c.epsilon;
                    let net = y - g - eta / e * l.powf(e);
                    let net_n = y_n - g_next - eta / e * l_n.powf(e);
                    f[row0 + EULER] = net_n + k_wealth * v / delta_n - disc * net;
                    put(EULER, 1, Y, 1.0);
                    put(EULER, 1, L, -eta * l_n.powf(e - 1.0));
                    put(EULER, 1, DELTA, -k_wealth * v / (delta_n * delta_n));
                    put(EULER, 0, R, -beta * xr * net);
                    put(EULER, 0, Y, -disc);
                    put(EULER, 0, L, disc * eta * l.powf(e - 1.0));
                }
            }

            // delta recursion
            f[row0 + DELTA_EQ] = delta - 1.0 - q * beta * xr * delta_n;
            put(DELTA_EQ, 0, DELTA, 1.0);
            put(DELTA_EQ, 1, DELTA, -q * beta * xr);

            // Calvo auxiliaries
            let pn_ts = pi_n.powf(ts);
            let y_is = y.powf(inv_sigma);
            f[row0 + X1_EQ] = x1 - w * y_is - alpha * pn_ts * x1_n / gross_r;
            put(X1_EQ, 0, X1, 1.0);
            put(X1_EQ, 0, W, -y_is);
            put(X1_EQ, 0, Y, -w * inv_sigma * y.powf(inv_sigma - 1.0));
            put(X1_EQ, 0, R, alpha * pn_ts * x1_n / (gross_r * gross_r));
            put(X1_EQ, 1, PI, -alpha * ts * pi_n.powf(ts - 1.0) * x1_n / gross_r);
            put(X1_EQ, 1, X1, -alpha * pn_ts / gross_r);

            let pn_t1 = pi_n.powf(theta - 1.0);
            f[row0 + X2_EQ] = x2 - y - alpha * pn_t1 * x2_n / gross_r;
            put(X2_EQ, 0, X2, 1.0);
            put(X2_EQ, 0, Y, -1.0);
            put(X2_EQ, 0, R, alpha * pn_t1 * x2_n / (gross_r * gross_r));
            put(X2_EQ, 1, PI, -alpha * (theta - 1.0) * pi_n.powf(theta - 2.0) * x2_n / gross_r);
            put(X2_EQ, 1, X2, -alpha * pn_t1 / gross_r);

            // optimal reset price
            f[row0 + RESET] = x2 * p.powf(reset_exp) - markup * x1;
            put(RESET, 0, X2, p.powf(reset_exp));
            put(RESET, 0, PSTAR, reset_exp * x2 * p.powf(reset_exp - 1.0));
            put(RESET, 0, X1, -markup);

            // price index
            f[row0 + PRICE_INDEX] =
                alpha * pi.powf(theta - 1.0) + (1.0 - alpha) * p.powf(1.0 - theta) - 1.0;
            put(PRICE_INDEX, 0, PI, alpha * (theta - 1.0) * pi.powf(theta - 2.0));
            put(PRICE_INDEX, 0, PSTAR, (1.0 - alpha) * (1.0 - theta) * p.powf(-theta));

            // price dispersion
            let pi_ts = pi.powf(ts);
            f[row0 + DISPERSION] = s - alpha * pi_ts * s_prev - (1.0 - alpha) * p.powf(-ts);
            put(DISPERSION, 0, S, 1.0);
            put(DISPERSION, 0, PI, -alpha * ts * pi.powf(ts - 1.0) * s_prev);
            put(DISPERSION, 0, PSTAR, (1.0 - alpha) * ts * p.powf(-ts - 1.0));
            put(DISPERSION, -1, S, -alpha * pi_ts);

            // production
            f[row0 + PRODUCTION] = l - y_is * s;
            put(PRODUCTION, 0, L, 1.0);
            put(PRODUCTION, 0, Y, -inv_sigma * y.powf(inv_sigma - 1.0) * s);
            put(PRODUCTION, 0, S, -y_is);

            // Fisher relation
            f[row0 + FISHER] = gross_r * pi_n - (1.0 + i);
            put(FISHER, 0, R, pi_n);
            put(FISHER, 0, I, -1.0);
            put(FISHER, 1, PI, gross_r);

            // policy rule or zero bound
            if self.zlb[t - 1] {
                f[row0 + POLICY] = i;
                put(POLICY, 0, I, 1.0);
            } else {
                let k = self.policy_intercept(t);
                let gap = y / self.initial.y;
                let pp = pi.powf(c.phi_pi);
                let gp = gap.powf(c.phi_y);
                f[row0 + POLICY] = (1.0 + i) - k * pp * gp;
                put(POLICY, 0, I, 1.0);
                put(POLICY, 0, PI, -k * c.phi_pi * pi.powf(c.phi_pi - 1.0) * gp);
                put(
                    POLICY,
                    0,
                    Y,
                    -k * pp * c.phi_y * gap.powf(c.phi_y - 1.0) / self.initial.y,
                );
            }
        }
    }
}
