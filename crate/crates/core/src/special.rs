//! Special-function constants shared by the operator and the samplers.

use std::f64::consts::PI;

/// Gamma function (libm's `tgamma`), valid for non-integer negative
/// arguments as needed by the kernel normalization.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere S^{d-1}; equals 2 for d = 1.
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Normalization of the jump kernel `c_{d,alpha} |y|^{-d-alpha}` chosen so
/// that the operator's Fourier symbol is exactly `|xi|^alpha`.
pub fn kernel_constant(d: usize, alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0, "kernel constant needs alpha in (0,2)");
    let df = d as f64;
    2f64.powf(alpha) * gamma((df + alpha) / 2.0)
        / (PI.powf(df / 2.0) * gamma(-alpha / 2.0).abs())
}

/// Value of the fractional Laplacian of `(1 - |x|^2)_+^{alpha/2}` inside the
/// unit ball: `2^alpha Gamma(alpha/2 + 1) Gamma((d+alpha)/2) / Gamma(d/2)`.
/// (Covers alpha = 2, where it reduces to `2d`.)
pub fn ball_profile_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2f64.powf(alpha) * gamma(alpha / 2.0 + 1.0) * gamma((df + alpha) / 2.0) / gamma(df / 2.0)
}

/// Expected exit time from the unit ball started at the center,
/// `1 / ball_profile_constant`.
pub fn ball_mean_exit_time(d: usize, alpha: f64) -> f64 {
    1.0 / ball_profile_constant(d, alpha)
}
