//! JSON experiment configuration. Every block is optional; command-line
//! flags override whatever the file sets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use olgdebt_core::linear::SweepAxis;
use olgdebt_core::{Calibration, FiscalPlan, PlanKind, PreferenceKind};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fields overriding the baseline calibration of the chosen preference kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock: Option<ShockBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Discount-factor shock: either sized directly or calibrated to an impact
/// output drop.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockBlock {
    /// Impact output drop to calibrate to, as a positive fraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_drop: Option<f64>,
    /// Per-quarter growth of the preference shifter during the recession.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<f64>,
    #[serde(default = "default_length")]
    pub length: usize,
}

fn default_length() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBlock {
    pub kind: PlanKind,
    /// Change of the annual debt-to-GDP ratio at t = 1.
    #[serde(default = "default_step")]
    pub step: f64,
    /// First period with the initial debt restored (temporary plans).
    #[serde(default = "default_revert")]
    pub revert: usize,
}

fn default_step() -> f64 {
    0.02
}

fn default_revert() -> usize {
    9
}

impl PlanBlock {
    pub fn of_kind(kind: PlanKind) -> Self {
        PlanBlock {
            kind,
            step: default_step(),
            revert: default_revert(),
        }
    }

    pub fn to_plan(&self) -> FiscalPlan {
        match self.kind {
            PlanKind::None => FiscalPlan::none(),
            PlanKind::Temporary => FiscalPlan::temporary(self.step, self.revert),
            PlanKind::Permanent => FiscalPlan::permanent(self.step),
        }
    }
}

/// Grid for `sweep`: an explicit list, or `steps` evenly spaced points from
/// `from` to `to` inclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl SweepBlock {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if let Some(grid) = &self.grid {
            return Ok(grid.clone());
        }
        match (self.from, self.to, self.steps) {
            (Some(a), Some(b), Some(n)) if n >= 2 => {
                Ok((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect())
            }
            _ => Err(CliError::Usage(
                "sweep block needs `grid`, or `from`, `to` and `steps` >= 2".into(),
            )),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Names of the command blocks present in the file.
    pub fn blocks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.shock.is_some() {
            out.push("shock");
        }
        if self.plan.is_some() {
            out.push("plan");
        }
        if self.sweep.is_some() {
            out.push("sweep");
        }
        out
    }

    /// Preference kind named in the calibration block, if any.
    pub fn pref(&self) -> Result<Option<PreferenceKind>, CliError> {
        match self.calibration.as_ref().and_then(|m| m.get("pref")) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("invalid calibration.pref: {e}"))),
        }
    }

    /// Baseline calibration of `pref` with the file's overrides applied.
    pub fn calibration(&self, pref: PreferenceKind) -> Result<Calibration, CliError> {
        let base = Calibration::baseline(pref);
        let Some(overrides) = &self.calibration else {
            return Ok(base);
        };
        let mut value = serde_json::to_value(base).expect("calibration serializes");
        let fields = value.as_object_mut().expect("calibration is an object");
        for (k, v) in overrides {
            if k != "pref" {
                fields.insert(k.clone(), v.clone());
            }
        }
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid calibration block: {e}")))
    }
}
