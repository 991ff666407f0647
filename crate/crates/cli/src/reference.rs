//! Published reference values checked by `repro`.

use olgdebt_core::PreferenceKind;

/// Steady-state annualized rates at 60% and 200% debt (log-log baseline).
pub const RATE_ANCHORS: [(f64, f64); 2] = [(0.6, 0.0162), (2.0, 0.0365)];
pub const RATE_TOLERANCE: f64 = 5e-4;

/// ZLB determinacy thresholds, two decimals.
pub const THRESHOLDS: [(PreferenceKind, f64); 2] = [(PreferenceKind::LogLog, 0.70), (PreferenceKind::Ghh, 0.58)];
pub const THRESHOLD_TOLERANCE: f64 = 0.01;

/// Relative tolerance on ZLB cells.
pub const ZLB_TOLERANCE: f64 = 0.10;
/// Reference cells carry four decimals.
pub const DISPLAY_HALF_UNIT: f64 = 5e-5;
/// Absolute tolerance on normal-times cells, whose shock size is not pinned
/// by a stated output target.
pub const NORMAL_TOLERANCE: f64 = 5e-4;

/// One row of the multiplier table. Columns: temporary normal, temporary
/// ZLB, permanent normal, permanent ZLB.
pub struct TableRow {
    pub pref: PreferenceKind,
    pub q: f64,
    pub impact: [f64; 4],
    pub present_value: [f64; 4],
}

const fn row(pref: PreferenceKind, q: f64, impact: [f64; 4], present_value: [f64; 4]) -> TableRow {
    TableRow {
        pref,
        q,
        impact,
        present_value,
    }
}

use PreferenceKind::{Ghh, LogLog};

pub const TABLE: [TableRow; 12] = [
    row(LogLog, 0.9512, [0.0006, 0.0189, 0.0000, 0.0387], [0.0010, 0.0073, 0.0000, 0.0131]),
    row(LogLog, 0.95, [0.0006, 0.0199, 0.0000, 0.0407], [0.0011, 0.0076, 0.0000, 0.0138]),
    row(LogLog, 0.96, [0.0004, 0.0128, 0.0000, 0.0261], [0.0007, 0.0049, 0.0000, 0.0088]),
    row(LogLog, 0.97, [0.0002, 0.0072, 0.0000, 0.0148], [0.0004, 0.0028, 0.0000, 0.0050]),
    row(LogLog, 0.98, [0.0001, 0.0033, 0.0000, 0.0067], [0.0002, 0.0013, 0.0000, 0.0023]),
    row(LogLog, 0.99, [0.0000, 0.0009, 0.0000, 0.0018], [0.0000, 0.0003, 0.0000, 0.0006]),
    row(Ghh, 0.9785, [0.0004, 0.0707, 0.0000, 0.1387], [0.0013, 0.0230, 0.0000, 0.0401]),
    row(Ghh, 0.95, [0.0022, 0.3766, 0.0006, 0.7439], [0.0068, 0.1257, 0.0006, 0.2216]),
    row(Ghh, 0.96, [0.0013, 0.2380, 0.0003, 0.4686], [0.0044, 0.0785, 0.0003, 0.1378]),
    row(Ghh, 0.97, [0.0007, 0.1359, 0.0001, 0.2672], [0.0025, 0.0444, 0.0001, 0.0777]),
    row(Ghh, 0.98, [0.0003, 0.0614, 0.0000, 0.1205], [0.0011, 0.0200, 0.0000, 0.0348]),
    row(Ghh, 0.99, [0.0001, 0.0167, 0.0000, 0.0328], [0.0003, 0.0054, 0.0000, 0.0094]),
];
