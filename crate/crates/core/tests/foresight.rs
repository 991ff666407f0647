use proptest::prelude::*;

use olgdebt_core::foresight::residuals;
use olgdebt_core::*;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn loglog() -> Calibration {
    Calibration::baseline(PreferenceKind::LogLog)
}

#[test]
fn quiet_economy_stays_put() {
    for pref in PreferenceKind::ALL {
        let c = Calibration::baseline(pref);
        let opts = SimOptions::default();
        let p = solve_path(&c, &ShockSpec::none(opts.horizon), &FiscalPlan::none(), &opts).unwrap();
        let ss = solve_steady_state(&c).unwrap();
        assert!(p.y.iter().all(|y| (y - ss.y).abs() < 1e-12));
        assert_eq!(p.zlb_periods(), 0);
        assert!(p.max_residual < 1e-12);
    }
}

#[test]
fn permanent_plan_lands_on_higher_rate_with_same_output() {
    for pref in PreferenceKind::ALL {
        let c = Calibration::baseline(pref);
        let mut opts = SimOptions::default();
        opts.policy_anchor = PolicyAnchor::Terminal;
        let plan = FiscalPlan::standard(PlanKind::Permanent);
        let p = solve_path(&c, &ShockSpec::none(opts.horizon), &plan, &opts).unwrap();
        assert!(p.terminal.r_bar > p.initial.r_bar);
        assert!((p.terminal.y - p.initial.y).abs() < 1e-12);
        assert!(p.terminal_gap() < 1e-8, "{}", p.terminal_gap());
        let last = p.len() - 1;
        assert!((p.r[last] - p.terminal.r_bar).abs() < 1e-8);
    }
}

#[test]
fn initial_anchor_settles_near_the_zero_inflation_state() {
    for pref in PreferenceKind::ALL {
        let c = Calibration::baseline(pref);
        let opts = SimOptions::default();
        let plan = FiscalPlan::standard(PlanKind::Permanent);
        let p = solve_path(&c, &ShockSpec::none(opts.horizon), &plan, &opts).unwrap();
        let last = p.len() - 1;
        assert!(p.terminal.r_bar > p.initial.r_bar);
        // the rule's intercept stays at the old rate, so trend inflation is slightly positive
        assert!(p.terminal.pi > 0.0 && annualize(p.terminal.pi) < 5e-4);
        assert!((p.terminal.y - p.initial.y).abs() / p.initial.y < 1e-5);
        assert!(p.terminal_gap() < 1e-8);
        assert!((p.y[last] - p.terminal.y).abs() < 1e-10);
    }
}

#[test]
fn zlb_shock_hits_its_output_target() {
    let opts = SimOptions::default();
    let c = loglog();
    let shock = calibrate_shock(&c, 0.04, 8, &opts).unwrap();
    let p = solve_path(&c, &shock, &FiscalPlan::none(), &opts).unwrap();
    assert!((p.y[0] / p.initial.y - 0.96).abs() < 1e-8);
    assert_eq!(p.initial_zlb_spell(), 8);
}

#[test]
fn local_and_full_step_agree_when_regimes_do() {
    let c = loglog();
    let mut opts = SimOptions::default();
    let shock = Scenario::Zlb.shock(&c, &opts).unwrap();
    let plan = FiscalPlan::standard(PlanKind::Temporary);
    let local = debt_multiplier_experiment(&c, &shock, &plan, &opts).unwrap();
    opts.multiplier_method = MultiplierMethod::FullStep;
    let full = debt_multiplier_experiment(&c, &shock, &plan, &opts).unwrap();
    assert!(full.regimes_match);
    assert!((local.impact - full.impact).abs() / full.impact < 0.01);
}

#[test]
fn csv_export_has_fixed_columns() {
    let opts = SimOptions::default();
    let p = solve_path(&loglog(), &ShockSpec::none(opts.horizon), &FiscalPlan::none(), &opts).unwrap();
    let mut out = Vec::new();
    p.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,Y,C,L,pi_annualized,i_annualized,r_annualized,B_prime,taxes,debt_to_gdp_annualized,zlb_flag"
    );
    assert_eq!(lines.count(), opts.horizon);
}

#[test]
fn short_horizon_is_rejected() {
    let opts = SimOptions::default().with_horizon(30);
    let err = solve_path(&loglog(), &ShockSpec::none(30), &FiscalPlan::none(), &opts).unwrap_err();
    assert_eq!(err.name(), "DimensionMismatch");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn converged_paths_are_consistent(
        pref in prop_oneof![Just(PreferenceKind::LogLog), Just(PreferenceKind::Ghh)],
        size in 0.0..0.012_f64,
        kind in prop_oneof![Just(PlanKind::None), Just(PlanKind::Temporary), Just(PlanKind::Permanent)],
    ) {
        let c = Calibration::baseline(pref);
        let opts = SimOptions::default();
        let shock = ShockSpec::discount_factor(size, 8, opts.horizon);
        let plan = FiscalPlan::standard(kind);
        let p = solve_path(&c, &shock, &plan, &opts).unwrap();
        prop_assert!(max_abs(&residuals(&p, &c, &shock, &plan, &opts).unwrap()) < 1e-9);
        prop_assert!(max_abs(&p.walras_residuals()) < 1e-9);
        for t in 0..p.len() {
            if p.zlb[t] {
                prop_assert!(p.shadow[t] < 0.0 && p.i[t].abs() < 1e-12);
            } else {
                prop_assert!(p.i[t] > 0.0);
            }
        }
        prop_assert!(p.y.iter().chain(&p.l).chain(&p.c).all(|v| *v > 0.0));
        prop_assert!(p.s.iter().all(|s| *s >= 1.0 - 1e-12));
    }

    #[test]
    fn halving_the_step_halves_the_response(
        pref in prop_oneof![Just(PreferenceKind::LogLog), Just(PreferenceKind::Ghh)],
        step in 0.002..0.02_f64,
    ) {
        let c = Calibration::baseline(pref);
        let mut opts = SimOptions::default();
        opts.multiplier_method = MultiplierMethod::FullStep;
        let shock = ShockSpec::none(opts.horizon);
        let plan = |s: f64| FiscalPlan { debt_step: s, ..FiscalPlan::standard(PlanKind::Temporary) };
        let full = run_experiment(&c, &shock, &plan(step), &opts).unwrap();
        let half = run_experiment(&c, &shock, &plan(0.5 * step), &opts).unwrap();
        let (a, b) = (full.responses.d_y[0], half.responses.d_y[0]);
        prop_assert!(a > 0.0);
        prop_assert!((2.0 * b - a).abs() <= 0.01 * a.abs(), "{} vs {}", a, 2.0 * b);
    }

    #[test]
    fn small_permanent_steps_are_linear(
        pref in prop_oneof![Just(PreferenceKind::LogLog), Just(PreferenceKind::Ghh)],
        step in 2e-5..2e-4_f64,
    ) {
        let c = Calibration::baseline(pref);
        let mut opts = SimOptions::default();
        opts.multiplier_method = MultiplierMethod::FullStep;
        let shock = ShockSpec::none(opts.horizon);
        let full = run_experiment(&c, &shock, &FiscalPlan::permanent(step), &opts).unwrap();
        let half = run_experiment(&c, &shock, &FiscalPlan::permanent(0.5 * step), &opts).unwrap();
        let (a, b) = (full.responses.d_y[0], half.responses.d_y[0]);
        prop_assert!(a > 0.0);
        prop_assert!((2.0 * b - a).abs() <= 0.01 * a.abs(), "{} vs {}", a, 2.0 * b);
    }
}

#[test]
fn nonlinear_multiplier_agrees_with_linear_model_qualitatively() {
    for pref in PreferenceKind::ALL {
        let c = Calibration::baseline(pref);
        let mut opts = SimOptions::default();
        opts.multiplier_method = MultiplierMethod::FullStep;
        let plan = FiscalPlan::temporary(0.02e-3, 9);
        let m = debt_multiplier_experiment(&c, &ShockSpec::none(opts.horizon), &plan, &opts).unwrap();
        // a plan lasting eight quarters persists with probability 7/8
        let linear = analytic_multiplier(&c, 0.875, Instrument::Debt, Regime::Normal).unwrap();
        assert!(m.impact > 0.0 && linear > 0.0);
        let ratio = m.impact / linear;
        assert!((0.1..10.0).contains(&ratio), "{pref}: {} vs {linear}", m.impact);
    }
}
