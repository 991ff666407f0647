use super::*;
use crate::calibration::PreferenceKind::{Ghh, LogLog};

fn base(pref: PreferenceKind) -> Calibration {
    Calibration::baseline(pref)
}

fn fd_multiplier(c: &Calibration, mu: f64, inst: Instrument, regime: Regime) -> f64 {
    let mut s = ShortRunState::quiet(c, mu, regime).unwrap();
    let h = 1e-4;
    let mut eval = |x: f64| {
        match inst {
            Instrument::Debt => s.b_prime_s = x,
            Instrument::Spending => s.g_s = x,
        }
        solve_two_state(c, &s).unwrap().y_s
    };
    (eval(h) - eval(-h)) / (2.0 * h)
}

#[test]
fn closed_forms_match_structural_solve() {
    for pref in [LogLog, Ghh] {
        for regime in Regime::ALL {
            for inst in Instrument::ALL {
                for mu in [0.0, 0.2, 0.4, 0.5] {
                    let c = base(pref);
                    let a = analytic_multiplier(&c, mu, inst, regime).unwrap();
                    let n = fd_multiplier(&c, mu, inst, regime);
                    assert!((a - n).abs() <= 1e-8 * a.abs().max(1e-12), "{pref} {regime} {inst} {mu}: {a} vs {n}");
                }
            }
        }
    }
}

#[test]
fn zlb_thresholds() {
    let t = determinacy_threshold(&base(LogLog), Regime::Zlb).unwrap().unwrap();
    assert!((t - 0.7097).abs() < 1e-3, "{t}");
    assert_eq!(threshold_two_decimals(t), 0.70);
    let t = determinacy_threshold(&base(Ghh), Regime::Zlb).unwrap().unwrap();
    assert!((t - 0.5858).abs() < 1e-3, "{t}");
    assert_eq!(threshold_two_decimals(t), 0.58);
}

#[test]
fn taylor_principle_keeps_normal_times_determinate() {
    for pref in [LogLog, Ghh] {
        let c = base(pref);
        assert_eq!(determinacy_threshold(&c, Regime::Normal).unwrap(), None);
        assert!(check_determinacy(&c, 0.99, Regime::Normal).unwrap().determinate);
    }
}

#[test]
fn indeterminate_state_is_rejected() {
    let c = base(LogLog);
    let s = ShortRunState::quiet(&c, 0.9, Regime::Zlb).unwrap();
    assert!(matches!(solve_two_state(&c, &s), Err(Error::IndeterminateSystem { .. })));
}

#[test]
fn mu_out_of_range() {
    let c = base(LogLog);
    assert!(analytic_multiplier(&c, 1.0, Instrument::Debt, Regime::Normal).is_err());
    assert!(analytic_multiplier(&c, -0.1, Instrument::Debt, Regime::Normal).is_err());
}

#[test]
fn ricardian_limit() {
    let c = base(LogLog).with_q(1.0 - 1e-8);
    let m = analytic_multiplier(&c, 0.4, Instrument::Debt, Regime::Normal).unwrap();
    assert!(m.abs() < 1e-6);
    let m = analytic_multiplier(&c.with_debt_to_gdp(0.0), 0.4, Instrument::Debt, Regime::Zlb).unwrap();
    assert!(m.abs() < 1e-12);
}

#[test]
fn ghh_spending_beats_debt() {
    let c = base(Ghh);
    for mu in [0.1, 0.3, 0.5] {
        for regime in Regime::ALL {
            let g = analytic_multiplier(&c, mu, Instrument::Spending, regime).unwrap();
            let d = analytic_multiplier(&c, mu, Instrument::Debt, regime).unwrap();
            assert!(g > d);
        }
    }
}

#[test]
fn zlb_shadow_rate_is_negative_for_deep_shock() {
    let c = base(LogLog);
    let mut s = ShortRunState::quiet(&c, 0.5, Regime::Zlb).unwrap();
    s.r_e_s = -0.02;
    let sol = solve_two_state(&c, &s).unwrap();
    assert!(sol.regime_consistent(true));
    assert_eq!(sol.i_s, 0.0);
    assert!(sol.y_s < 0.0 && sol.pi_s < 0.0);
}

#[test]
fn sweep_flags_bad_points_and_sorts() {
    let rows = sweep_multiplier(
        &base(LogLog),
        SweepAxis::Q,
        &[0.99, 0.5, 1.0, 1.5],
        0.4,
        Instrument::Debt,
        Regime::Normal,
    );
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert_eq!(values, vec![0.5, 0.99, 1.0, 1.5]);
    assert!(rows[2].multiplier.abs() < 1e-14);
    assert!(rows[3].multiplier.is_nan());
    assert_eq!(rows[3].error.as_deref(), Some("InvalidCalibration"));
}

#[test]
fn sweep_csv_header() {
    let rows = sweep_multiplier(&base(Ghh), SweepAxis::Mu, &[0.1, 0.2], 0.0, Instrument::Debt, Regime::Zlb);
    let mut out = Vec::new();
    write_sweep_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("axis,value,multiplier,determinate,r_bar_annualized\nmu,1.000000000e-1,"));
    assert_eq!(text.lines().count(), 3);
}
