use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use olgdebt_core::empirics::{
    calibrate_beta_q, fit_line, load_panel, max_gap_between_anchors, max_positive_residual, EmpiricsReport,
    DEFAULT_ANCHORS,
};
use olgdebt_core::format::sig10;
use olgdebt_core::linear::{sweep_multiplier, threshold_two_decimals, write_sweep_csv};
use olgdebt_core::{
    annualize, analytic_multiplier, calibrate_shock, check_determinacy, debt_level_experiment,
    debt_multiplier_experiment, determinacy_threshold, solve_path, solve_steady_state, steady_state_rate, table_cell,
    Calibration, Instrument, PlanKind, PreferenceKind, Regime, Scenario, ShockSpec, SimOptions,
};

use crate::config::{ExperimentConfig, PlanBlock, ShockBlock, SweepBlock};
use crate::reference;
use crate::{Cli, CliError, Command, ShockArgs};

type CliResult<T> = Result<T, CliError>;

/// Default persistence of the linear model's short-run state.
const DEFAULT_MU: f64 = 0.4;

struct Context<'a> {
    cli: &'a Cli,
    config: ExperimentConfig,
}

#[derive(Serialize)]
struct Effective<'a> {
    command: &'a str,
    calibration: Option<Calibration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shock: Option<ShockBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<PlanBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    options: Option<SimOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

impl<'a> Context<'a> {
    fn new(cli: &'a Cli) -> CliResult<Self> {
        let config = match &cli.common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let allowed: &[&str] = match cli.command {
            Command::Simulate { .. } | Command::Experiment { .. } | Command::DebtLevels { .. } => &["shock", "plan"],
            Command::Sweep { .. } => &["sweep"],
            _ => &[],
        };
        if let Some(extra) = config.blocks().into_iter().find(|b| !allowed.contains(b)) {
            return Err(CliError::Usage(format!(
                "config block `{extra}` is not used by `{}`",
                command_name(&cli.command)
            )));
        }
        Ok(Context { cli, config })
    }

    fn pref(&self) -> CliResult<PreferenceKind> {
        Ok(self.cli.common.pref.or(self.config.pref()?).unwrap_or(PreferenceKind::LogLog))
    }

    fn calibration_for(&self, pref: PreferenceKind) -> CliResult<Calibration> {
        let mut c = self.config.calibration(pref)?;
        if let Some(q) = self.cli.common.q {
            c.q = q;
        }
        if let Some(by) = self.cli.common.by {
            c.debt_to_gdp = by;
        }
        c.validate()?;
        Ok(c)
    }

    fn calibration(&self) -> CliResult<Calibration> {
        self.calibration_for(self.pref()?)
    }

    fn options(&self) -> SimOptions {
        let mut opts = SimOptions::default();
        if let Some(h) = self.cli.common.horizon.or(self.config.horizon) {
            opts.horizon = h;
        }
        if let Some(m) = self.cli.common.method {
            opts.multiplier_method = m;
        }
        opts
    }

    fn out(&self) -> Option<PathBuf> {
        self.cli.common.out.clone().or_else(|| self.config.out.clone())
    }

    fn mu(&self) -> f64 {
        self.cli.common.mu.unwrap_or(DEFAULT_MU)
    }

    fn plan(&self, default: PlanKind) -> PlanBlock {
        match self.cli.common.plan {
            Some(kind) => PlanBlock {
                kind,
                ..self.config.plan.clone().unwrap_or(PlanBlock::of_kind(kind))
            },
            None => self.config.plan.clone().unwrap_or(PlanBlock::of_kind(default)),
        }
    }

    /// Shock block after flag overrides; `None` when nothing selects one.
    fn shock_block(&self, args: &ShockArgs) -> Option<ShockBlock> {
        let mut block = self.config.shock.clone();
        if args.drop.is_some() || args.shock_size.is_some() {
            block = Some(ShockBlock {
                target_drop: args.drop,
                size: args.shock_size,
                length: block.as_ref().map_or(8, |b| b.length),
            });
        }
        if let (Some(b), Some(len)) = (block.as_mut(), args.length) {
            b.length = len;
        }
        block
    }

    fn shock(&self, args: &ShockArgs, calib: &Calibration, opts: &SimOptions, default: Option<Scenario>) -> CliResult<ShockSpec> {
        if let Some(scenario) = self.cli.common.scenario {
            return Ok(scenario.shock(calib, opts)?);
        }
        match self.shock_block(args) {
            Some(ShockBlock {
                target_drop: Some(drop),
                length,
                ..
            }) => Ok(calibrate_shock(calib, drop, length, opts)?),
            Some(ShockBlock { size: Some(size), length, .. }) => {
                Ok(ShockSpec::discount_factor(size, length, opts.horizon))
            }
            Some(_) => Err(CliError::Usage("shock block needs `target_drop` or `size`".into())),
            None => match default {
                Some(scenario) => Ok(scenario.shock(calib, opts)?),
                None => Ok(ShockSpec::none(opts.horizon)),
            },
        }
    }

    fn echo(&self, effective: Effective) {
        let text = serde_json::to_string(&effective).expect("config serializes");
        eprintln!("effective config: {text}");
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Ss => "ss",
        Command::Multiplier => "multiplier",
        Command::Determinacy => "determinacy",
        Command::Sweep { .. } => "sweep",
        Command::Simulate { .. } => "simulate",
        Command::Experiment { .. } => "experiment",
        Command::DebtLevels { .. } => "debt-levels",
        Command::FitData { .. } => "fit-data",
        Command::Calibrate { .. } => "calibrate",
        Command::Repro => "repro",
    }
}

/// Rounds every float to ten significant digits so outputs are stable.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            sig10(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn sink(out: Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(&path).map_err(|e| {
            CliError::Domain(olgdebt_core::Error::Io(format!("{}: {e}", path.display())))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(out: Option<PathBuf>, value: Value) -> CliResult<()> {
    let mut w = sink(out)?;
    let text = serde_json::to_string_pretty(&round_floats(value)).expect("json serializes");
    writeln!(w, "{text}").map_err(olgdebt_core::Error::from)?;
    w.flush().map_err(olgdebt_core::Error::from)?;
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.common.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
    }
    let ctx = Context::new(cli)?;
    let name = command_name(&cli.command);
    match &cli.command {
        Command::Ss => ss(&ctx, name),
        Command::Multiplier => multiplier(&ctx, name),
        Command::Determinacy => determinacy(&ctx, name),
        Command::Sweep { axis, grid, instrument } => sweep(&ctx, name, *axis, grid.clone(), *instrument),
        Command::Simulate { shock } => simulate(&ctx, name, shock),
        Command::Experiment { shock } => experiment(&ctx, name, shock),
        Command::DebtLevels { levels, drop, periods } => debt_levels(&ctx, name, levels, *drop, *periods),
        Command::FitData { data } => fit_data(&ctx, data, false),
        Command::Calibrate { data } => fit_data(&ctx, data, true),
        Command::Repro => repro(&ctx, name),
    }
}

fn ss(ctx: &Context, name: &str) -> CliResult<()> {
    let c = ctx.calibration()?.with_pinned_eta();
    ctx.echo(Effective {
        command: name,
        calibration: Some(c),
        shock: None,
        plan: None,
        sweep: None,
        options: None,
        out: ctx.out(),
    });
    let ss = solve_steady_state(&c)?;
    emit_json(
        ctx.out(),
        json!({
            "pref": c.pref,
            "calibration": c,
            "steady_state": ss,
            "r_bar_annualized": ss.r_bar_annualized(),
        }),
    )
}

fn selected_prefs(ctx: &Context) -> Vec<PreferenceKind> {
    ctx.cli.common.pref.map_or(PreferenceKind::ALL.to_vec(), |p| vec![p])
}

fn selected_regimes(ctx: &Context) -> Vec<Regime> {
    ctx.cli.common.regime.map_or(Regime::ALL.to_vec(), |r| vec![r])
}

fn multiplier(ctx: &Context, name: &str) -> CliResult<()> {
    let mu = ctx.mu();
    let mut cells = Vec::new();
    for pref in selected_prefs(ctx) {
        let c = ctx.calibration_for(pref)?;
        ctx.echo(Effective {
            command: name,
            calibration: Some(c.with_pinned_eta()),
            shock: None,
            plan: None,
            sweep: None,
            options: None,
            out: ctx.out(),
        });
        for instrument in Instrument::ALL {
            for regime in selected_regimes(ctx) {
                let m = analytic_multiplier(&c, mu, instrument, regime)?;
                let det = check_determinacy(&c, mu, regime)?;
                cells.push(json!({
                    "pref": pref,
                    "instrument": instrument,
                    "regime": regime,
                    "multiplier": m,
                    "determinate": det.determinate,
                }));
            }
        }
    }
    emit_json(ctx.out(), json!({ "mu": mu, "cells": cells }))
}

fn determinacy(ctx: &Context, name: &str) -> CliResult<()> {
    let mut rows = Vec::new();
    for pref in selected_prefs(ctx) {
        let c = ctx.calibration_for(pref)?;
        ctx.echo(Effective {
            command: name,
            calibration: Some(c.with_pinned_eta()),
            shock: None,
            plan: None,
            sweep: None,
            options: None,
            out: ctx.out(),
        });
        for regime in selected_regimes(ctx) {
            let t = determinacy_threshold(&c, regime)?;
            rows.push(json!({
                "pref": pref,
                "regime": regime,
                "threshold": t.map(threshold_two_decimals),
                "threshold_exact": t,
            }));
        }
    }
    emit_json(ctx.out(), Value::Array(rows))
}

fn sweep(
    ctx: &Context,
    name: &str,
    axis: Option<olgdebt_core::linear::SweepAxis>,
    grid: Option<Vec<f64>>,
    instrument: Instrument,
) -> CliResult<()> {
    let block = match (&ctx.config.sweep, axis) {
        (Some(b), axis) => SweepBlock {
            axis: axis.unwrap_or(b.axis),
            grid: grid.or_else(|| b.grid.clone()),
            ..b.clone()
        },
        (None, Some(axis)) => SweepBlock {
            axis,
            grid,
            from: None,
            to: None,
            steps: None,
        },
        (None, None) => return Err(CliError::Usage("sweep needs --axis or a sweep block".into())),
    };
    let points = block.points()?;
    let c = ctx.calibration()?;
    let regime = ctx.cli.common.regime.unwrap_or(Regime::Normal);
    ctx.echo(Effective {
        command: name,
        calibration: Some(c.with_pinned_eta()),
        shock: None,
        plan: None,
        sweep: Some(block.clone()),
        options: None,
        out: ctx.out(),
    });
    let rows = sweep_multiplier(&c, block.axis, &points, ctx.mu(), instrument, regime);
    let mut w = sink(ctx.out())?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush().map_err(olgdebt_core::Error::from)?;
    Ok(())
}

fn simulate(ctx: &Context, name: &str, args: &ShockArgs) -> CliResult<()> {
    let c = ctx.calibration()?;
    let opts = ctx.options();
    let plan = ctx.plan(PlanKind::None);
    ctx.echo(Effective {
        command: name,
        calibration: Some(c.with_pinned_eta()),
        shock: ctx.shock_block(args),
        plan: Some(plan.clone()),
        sweep: None,
        options: Some(opts),
        out: ctx.out(),
    });
    let shock = ctx.shock(args, &c, &opts, None)?;
    let path = solve_path(&c, &shock, &plan.to_plan(), &opts)?;
    let mut w = sink(ctx.out())?;
    path.write_csv(&mut w)?;
    w.flush().map_err(olgdebt_core::Error::from)?;
    Ok(())
}

fn experiment(ctx: &Context, name: &str, args: &ShockArgs) -> CliResult<()> {
    let c = ctx.calibration()?;
    let opts = ctx.options();
    let plan = ctx.plan(PlanKind::Temporary);
    ctx.echo(Effective {
        command: name,
        calibration: Some(c.with_pinned_eta()),
        shock: ctx.shock_block(args),
        plan: Some(plan.clone()),
        sweep: None,
        options: Some(opts),
        out: ctx.out(),
    });
    let shock = ctx.shock(args, &c, &opts, Some(Scenario::Zlb))?;
    let report = debt_multiplier_experiment(&c, &shock, &plan.to_plan(), &opts)?;
    emit_json(ctx.out(), serde_json::to_value(report).expect("report serializes"))
}

const DEBT_LEVEL_HEADER: &str = "debt_to_gdp,r_bar_annualized,baseline_zlb_periods,impact_multiplier,t,d_output,\
d_inflation_annualized,d_nominal_rate_annualized,d_debt_to_gdp_annualized,baseline_nominal_rate_annualized";

fn debt_levels(ctx: &Context, name: &str, levels: &[f64], drop: f64, periods: usize) -> CliResult<()> {
    let c = ctx.calibration()?;
    let opts = ctx.options();
    let plan = ctx.plan(PlanKind::Temporary);
    ctx.echo(Effective {
        command: name,
        calibration: Some(c.with_pinned_eta()),
        shock: Some(ShockBlock {
            target_drop: Some(drop),
            size: None,
            length: 8,
        }),
        plan: Some(plan.clone()),
        sweep: None,
        options: Some(opts),
        out: ctx.out(),
    });
    let (_, rows) = debt_level_experiment(&c, levels, drop, 8, &plan.to_plan(), &opts)?;
    let mut w = sink(ctx.out())?;
    let io = |e: io::Error| CliError::Domain(e.into());
    writeln!(w, "{DEBT_LEVEL_HEADER}").map_err(io)?;
    for r in &rows {
        for t in 0..periods.min(r.d_output.len()) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                sig10(r.debt_to_gdp),
                sig10(r.r_bar_annualized),
                r.baseline_zlb_periods,
                sig10(r.multiplier.impact),
                t + 1,
                sig10(r.d_output[t]),
                sig10(r.d_inflation[t]),
                sig10(r.d_nominal_rate[t]),
                sig10(r.d_debt_to_gdp[t]),
                sig10(r.baseline_nominal_rate[t]),
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    for r in &rows {
        eprintln!(
            "debt {:>5.2}: r = {:.4}%, ZLB periods {}, impact multiplier {:.4}, output gain {:.4}%",
            r.debt_to_gdp,
            100.0 * r.r_bar_annualized,
            r.baseline_zlb_periods,
            r.multiplier.impact,
            100.0 * r.multiplier.impact_output_gain
        );
    }
    Ok(())
}

fn fit_data(ctx: &Context, data: &PathBuf, calibrate: bool) -> CliResult<()> {
    let panel = load_panel(data)?;
    let fitted = fit_line(&panel)?;
    let pref = ctx.pref()?;
    let top = max_positive_residual(&panel, &fitted).map(|(o, r)| json!({ "country": o.country, "residual": r }));
    let mut out = if calibrate {
        let base = ctx.calibration()?;
        let beta_q = calibrate_beta_q(&fitted, pref, DEFAULT_ANCHORS, &base)?;
        let calibrated = Calibration {
            beta: beta_q.0,
            q: beta_q.1,
            ..base
        };
        let gap = max_gap_between_anchors(&calibrated, &fitted, DEFAULT_ANCHORS)?;
        let mut v = serde_json::to_value(EmpiricsReport::new(&fitted, pref, DEFAULT_ANCHORS, Some(beta_q)))
            .expect("report serializes");
        v["max_gap_between_anchors"] = json!(gap);
        v
    } else {
        serde_json::to_value(EmpiricsReport::new(&fitted, pref, DEFAULT_ANCHORS, None)).expect("report serializes")
    };
    out["max_positive_residual"] = top.unwrap_or(Value::Null);
    emit_json(ctx.out(), out)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    reference: f64,
    tolerance: f64,
    relative: bool,
    pass: bool,
}

impl Check {
    fn absolute(name: String, value: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            pass: (value - reference).abs() <= tolerance,
            name,
            value,
            reference,
            tolerance,
            relative: false,
        }
    }

    /// Relative tolerance, floored at half a unit of the reference's last
    /// displayed digit.
    fn relative(name: String, value: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            pass: (value - reference).abs() <= (tolerance * reference.abs()).max(reference::DISPLAY_HALF_UNIT),
            name,
            value,
            reference,
            tolerance,
            relative: true,
        }
    }
}

fn repro(ctx: &Context, name: &str) -> CliResult<()> {
    let opts = ctx.options();
    ctx.echo(Effective {
        command: name,
        calibration: None,
        shock: None,
        plan: None,
        sweep: None,
        options: Some(opts),
        out: ctx.out(),
    });
    let mut checks = Vec::new();
    let loglog = Calibration::baseline(PreferenceKind::LogLog);
    for (debt, rate) in reference::RATE_ANCHORS {
        let r = annualize(steady_state_rate(&loglog.with_debt_to_gdp(4.0 * debt))?);
        checks.push(Check::absolute(format!("rate at {debt} debt"), r, rate, reference::RATE_TOLERANCE));
    }
    for (pref, threshold) in reference::THRESHOLDS {
        let t = determinacy_threshold(&Calibration::baseline(pref), Regime::Zlb)?.unwrap_or(f64::NAN);
        checks.push(Check::absolute(
            format!("{pref} ZLB threshold"),
            t,
            threshold,
            reference::THRESHOLD_TOLERANCE,
        ));
    }
    const COLUMNS: [(Scenario, PlanKind, &str); 4] = [
        (Scenario::Normal, PlanKind::Temporary, "temporary normal"),
        (Scenario::Zlb, PlanKind::Temporary, "temporary zlb"),
        (Scenario::Normal, PlanKind::Permanent, "permanent normal"),
        (Scenario::Zlb, PlanKind::Permanent, "permanent zlb"),
    ];
    let rows = reference::TABLE
        .par_iter()
        .map(|row| {
            let c = Calibration::baseline(row.pref).with_q(row.q);
            let mut out = Vec::new();
            for (j, (scenario, kind, label)) in COLUMNS.iter().enumerate() {
                let m = table_cell(&c, *scenario, *kind, &opts)?;
                for (what, value, want) in [
                    ("impact", m.impact, row.impact[j]),
                    ("PV", m.present_value, row.present_value[j]),
                ] {
                    let name = format!("{} q={} {label} {what}", row.pref, row.q);
                    out.push(match scenario {
                        Scenario::Zlb => Check::relative(name, value, want, reference::ZLB_TOLERANCE),
                        Scenario::Normal => Check::absolute(name, value, want, reference::NORMAL_TOLERANCE),
                    });
                }
            }
            Ok(out)
        })
        .collect::<olgdebt_core::Result<Vec<_>>>()?;
    checks.extend(rows.into_iter().flatten());
    let passed = checks.iter().filter(|c| c.pass).count();
    eprintln!("{passed}/{} checks within tolerance", checks.len());
    emit_json(
        ctx.out(),
        json!({ "passed": passed, "total": checks.len(), "checks": checks }),
    )
}
