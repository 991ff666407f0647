//! Cross-country debt and real-rate panel: loading, the OLS line, and the
//! two-anchor calibration of `(beta, q)`.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{annualize, Calibration, PreferenceKind};
use crate::error::{Error, Result};
use crate::steady_state::steady_state_rate;

/// Long-run averages for one country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryObservation {
    pub country: String,
    /// Debt over annual GDP, as a fraction.
    pub debt_to_gdp: f64,
    /// Real long-term rate per annum, as a fraction. May be negative.
    pub real_rate: f64,
    #[serde(default)]
    pub n_years: Option<u32>,
}

/// Reads a panel from CSV with header `country,debt_to_gdp,real_rate[,n_years]`.
/// Row numbers in errors count data rows from 1.
pub fn read_panel<R: Read>(reader: R) -> Result<Vec<CountryObservation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header_err = |message: String| Error::ParseError { row: 0, message };
    let headers = rdr.headers().map_err(|e| header_err(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let ok = matches!(
        names.as_slice(),
        ["country", "debt_to_gdp", "real_rate"] | ["country", "debt_to_gdp", "real_rate", "n_years"]
    );
    if !ok {
        return Err(header_err(format!(
            "expected header country,debt_to_gdp,real_rate[,n_years], found {}",
            names.join(",")
        )));
    }

    let mut seen = HashSet::new();
    let mut panel = Vec::new();
    for (idx, rec) in rdr.deserialize::<CountryObservation>().enumerate() {
        let row = idx + 1;
        let obs = rec.map_err(|e| Error::ParseError { row, message: e.to_string() })?;
        let fail = |message: String| Err(Error::ParseError { row, message });
        if obs.country.is_empty() {
            return fail("empty country identifier".into());
        }
        if !(obs.debt_to_gdp.is_finite() && obs.debt_to_gdp > 0.0) {
            return fail(format!("debt_to_gdp must be positive, got {}", obs.debt_to_gdp));
        }
        if !obs.real_rate.is_finite() {
            return fail(format!("real_rate must be finite, got {}", obs.real_rate));
        }
        if !seen.insert(obs.country.clone()) {
            return fail(format!("duplicate country `{}`", obs.country));
        }
        panel.push(obs);
    }
    if panel.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(panel)
}

pub fn load_panel(path: impl AsRef<Path>) -> Result<Vec<CountryObservation>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_panel(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedLine {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub n: usize,
}

impl FittedLine {
    /// Line through two points.
    pub fn through(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let slope = (y1 - y0) / (x1 - x0);
        FittedLine {
            intercept: y0 - slope * x0,
            slope,
            r_squared: 1.0,
            n: 2,
        }
    }

    pub fn predict(&self, debt_to_gdp: f64) -> f64 {
        self.intercept + self.slope * debt_to_gdp
    }
}

/// Ordinary least squares of `real_rate` on `debt_to_gdp`.
pub fn fit_line(panel: &[CountryObservation]) -> Result<FittedLine> {
    let n = panel.len();
    if n == 0 {
        return Err(Error::EmptyPanel);
    }
    if n < 2 {
        return Err(Error::DegenerateDesign);
    }
    let nf = n as f64;
    let mean_x = panel.iter().map(|o| o.debt_to_gdp).sum::<f64>() / nf;
    let mean_y = panel.iter().map(|o| o.real_rate).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for o in panel {
        let (dx, dy) = (o.debt_to_gdp - mean_x, o.real_rate - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= f64::EPSILON * mean_x.abs().max(1.0) * nf {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(FittedLine {
        intercept: mean_y - slope * mean_x,
        slope,
        r_squared,
        n,
    })
}

/// Observation lying furthest above the fitted line.
pub fn max_positive_residual<'a>(
    panel: &'a [CountryObservation],
    line: &FittedLine,
) -> Option<(&'a CountryObservation, f64)> {
    panel
        .iter()
        .map(|o| (o, o.real_rate - line.predict(o.debt_to_gdp)))
        .filter(|(_, r)| *r > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Annual debt ratios at which the model is pinned to the fitted line.
pub const DEFAULT_ANCHORS: (f64, f64) = (0.6, 1.0);

/// Solves for `(beta, q)` such that the annualized steady-state rate equals
/// `rates.k` at annual debt ratio `anchors.k`, `k = 0, 1`. Other parameters
/// come from `base`; `eta` is pinned from `L_bar` unless `base` fixes it.
pub fn calibrate_to_rates(
    base: &Calibration,
    pref: PreferenceKind,
    anchors: (f64, f64),
    rates: (f64, f64),
) -> Result<(f64, f64)> {
    const LO: f64 = 1e-6;
    const HI: f64 = 1.0 - 1e-12;
    let base = Calibration { pref, ..*base };
    let resid = |beta: f64, q: f64| -> Option<[f64; 2]> {
        let c = Calibration { beta, q, ..base };
        let r0 = steady_state_rate(&c.with_debt_to_gdp(4.0 * anchors.0)).ok()?;
        let r1 = steady_state_rate(&c.with_debt_to_gdp(4.0 * anchors.1)).ok()?;
        Some([annualize(r0) - rates.0, annualize(r1) - rates.1])
    };
    let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
    let no_root = |beta, q, residuals| Error::NoRoot { beta, q, residuals };

    let (mut beta, mut q) = (0.99, 0.95);
    let mut f = resid(beta, q).ok_or(no_root(beta, q, [f64::NAN; 2]))?;
    for _ in 0..100 {
        if norm(&f) < 1e-12 {
            break;
        }
        let h = 1e-7;
        let fb = resid((beta - h).max(LO), q);
        let fq = resid(beta, (q - h).max(LO));
        let (Some(fb), Some(fq)) = (fb, fq) else {
            return Err(no_root(beta, q, f));
        };
        // backward differences stay inside the box near its upper edge
        let j = [
            [(f[0] - fb[0]) / h, (f[0] - fq[0]) / h],
            [(f[1] - fb[1]) / h, (f[1] - fq[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(no_root(beta, q, f));
        }
        let db = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dq = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let nb = (beta + step * db).clamp(LO, HI);
            let nq = (q + step * dq).clamp(LO, HI);
            if let Some(nf) = resid(nb, nq) {
                if norm(&nf) < norm(&f) {
                    beta = nb;
                    q = nq;
                    f = nf;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // a root within BOUNDARY of the box edge is the q -> 1 limit, not an interior solution
    const BOUNDARY: f64 = 1e-8;
    let interior = beta > LO && beta < 1.0 - BOUNDARY && q > LO && q < 1.0 - BOUNDARY;
    if norm(&f) < 1e-10 && interior {
        Ok((beta, q))
    } else {
        Err(no_root(beta, q, f))
    }
}

/// Pins the model to the fitted line at the two anchor debt ratios.
pub fn calibrate_beta_q(
    fitted: &FittedLine,
    pref: PreferenceKind,
    anchors: (f64, f64),
    base: &Calibration,
) -> Result<(f64, f64)> {
    let rates = (fitted.predict(anchors.0), fitted.predict(anchors.1));
    if rates.0 <= 0.0 || rates.1 <= 0.0 {
        return Err(Error::NoRoot {
            beta: f64::NAN,
            q: f64::NAN,
            residuals: [rates.0, rates.1],
        });
    }
    calibrate_to_rates(base, pref, anchors, rates)
}

/// Largest gap, annualized, between the calibrated model's rate and the
/// fitted line on a grid between the anchors.
pub fn max_gap_between_anchors(calib: &Calibration, fitted: &FittedLine, anchors: (f64, f64)) -> Result<f64> {
    let mut worst = 0.0_f64;
    for j in 0..=40 {
        let x = anchors.0 + (anchors.1 - anchors.0) * j as f64 / 40.0;
        let r = annualize(steady_state_rate(&calib.with_debt_to_gdp(4.0 * x))?);
        worst = worst.max((r - fitted.predict(x)).abs());
    }
    Ok(worst)
}

/// Fitted line plus calibrated parameters, as exported to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricsReport {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    pub n: usize,
    pub pref: PreferenceKind,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    /// Annual debt ratios of the anchors.
    pub anchors: [f64; 2],
    /// Fitted annualized rates at the anchors.
    pub anchor_rates: [f64; 2],
}

impl EmpiricsReport {
    pub fn new(fitted: &FittedLine, pref: PreferenceKind, anchors: (f64, f64), beta_q: Option<(f64, f64)>) -> Self {
        EmpiricsReport {
            intercept: fitted.intercept,
            slope: fitted.slope,
            r2: fitted.r_squared,
            n: fitted.n,
            pref,
            beta: beta_q.map(|b| b.0),
            q: beta_q.map(|b| b.1),
            anchors: [anchors.0, anchors.1],
            anchor_rates: [fitted.predict(anchors.0), fitted.predict(anchors.1)],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PANEL: &str = "country,debt_to_gdp,real_rate,n_years\n\
                         A,0.4,0.010,19\n\
                         B,0.8,0.020,19\n\
                         C,1.2,0.031,18\n";

    #[test]
    fn reads_optional_column() {
        let p = read_panel(PANEL.as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[2].n_years, Some(18));
        let p = read_panel("country,debt_to_gdp,real_rate\nX,0.5,-0.01\n".as_bytes()).unwrap();
        assert_eq!(p[0].n_years, None);
        assert_eq!(p[0].real_rate, -0.01);
    }

    #[test]
    fn rejects_bad_rows() {
        let err = read_panel("country,debt_to_gdp,real_rate\nX,0.5,0.01\nY,0,0.01\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ParseError { row: 2, .. }), "{err:?}");
        let err = read_panel("country,debt_to_gdp,real_rate\nX,0.5,0.01\nX,0.6,0.01\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ParseError { row: 2, .. }));
        let err = read_panel("country,debt_to_gdp,real_rate\nX,abc,0.01\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ParseError { row: 1, .. }));
        assert_eq!(read_panel("country,debt_to_gdp,real_rate\n".as_bytes()), Err(Error::EmptyPanel));
        assert!(matches!(
            read_panel("name,debt,rate\nX,0.5,0.01\n".as_bytes()),
            Err(Error::ParseError { row: 0, .. })
        ));
    }

    #[test]
    fn two_points_are_interpolated() {
        let p = read_panel("country,debt_to_gdp,real_rate\nX,0.6,0.0162\nY,1.0,0.022\n".as_bytes()).unwrap();
        let l = fit_line(&p).unwrap();
        assert!((l.predict(0.6) - 0.0162).abs() < 1e-15);
        assert!((l.predict(1.0) - 0.022).abs() < 1e-15);
        assert_eq!(l.r_squared, 1.0);
    }

    #[test]
    fn degenerate_design() {
        let p = read_panel("country,debt_to_gdp,real_rate\nX,0.6,0.01\nY,0.6,0.02\n".as_bytes()).unwrap();
        assert_eq!(fit_line(&p), Err(Error::DegenerateDesign));
        assert_eq!(fit_line(&p[..1]), Err(Error::DegenerateDesign));
    }

    #[test]
    fn flat_line_has_no_interior_root() {
        let c = Calibration::baseline(PreferenceKind::LogLog);
        let r = annualize(1.0 / c.beta - 1.0);
        let err = calibrate_to_rates(&c, PreferenceKind::LogLog, DEFAULT_ANCHORS, (r, r)).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }));
    }
}
