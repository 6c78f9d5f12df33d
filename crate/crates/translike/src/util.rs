//! Small numeric helpers shared by the geometry modules.

/// `z / (e^z - 1)` extended by 1 at `z = 0`.
///
/// Every `|z| / |e^z - 1|`-type factor in the distance and surface formulas is
/// a removable singularity of this function; below `|z| < 1e-5` the truncated
/// Bernoulli series is exact to machine precision.
pub fn exp_ratio(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 - z / 2.0 + z * z / 12.0
    } else {
        z / z.exp_m1()
    }
}

/// `z / (1 - e^{-z})` extended by 1 at `z = 0`; equals `exp_ratio(-z)`.
pub fn exp_ratio_neg(z: f64) -> f64 {
    exp_ratio(-z)
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Clamps to the `arccosh` domain `[1, inf)`.
pub fn clamp_cosh(x: f64) -> f64 {
    x.max(1.0)
}

/// `tanh(k*s)/k` extended by `s` at `k = 0`.
pub fn tanh_ratio(k: f64, s: f64) -> f64 {
    if k.abs() < 1e-8 {
        let u = k * s;
        s * (1.0 - u * u / 3.0)
    } else {
        (k * s).tanh() / k
    }
}

/// `tan(k*s)/k` extended by `s` at `k = 0`.
pub fn tan_ratio(k: f64, s: f64) -> f64 {
    if k.abs() < 1e-8 {
        let u = k * s;
        s * (1.0 + u * u / 3.0)
    } else {
        (k * s).tan() / k
    }
}

/// `atan(x)/x` extended by 1 at `x = 0`.
pub fn atan_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        x.atan() / x
    }
}

/// `atanh(x)/x` extended by 1 at `x = 0`.
pub fn atanh_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 3.0
    } else {
        x.atanh() / x
    }
}

/// Formats with the given number of significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    if mag.abs() > 15 {
        format!("{v:.*e}", digits.saturating_sub(1))
    } else {
        format!("{v:.decimals$}")
    }
}
