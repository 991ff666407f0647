/// Ten significant digits in scientific notation; `NaN` and infinities
/// print as `NaN`, `inf`, `-inf`.
pub fn sig10(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        format!("{v}")
    }
}
