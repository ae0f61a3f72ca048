//! Independent reference computations used to validate the numerical
//! kernels: Bessel evaluations, direct quadratures of the defining
//! singular integrals, and closed-form transition densities. Nothing here
//! shares code with the discretization or the samplers it checks.

use crate::quad::{gauss_legendre, integrate_1d_dyadic};
use crate::special::{gamma, kernel_constant, unit_sphere_area};
use std::f64::consts::PI;

/// Bessel J0: power series below 8, Hankel asymptotics above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 8.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        // Two-term Hankel expansion; plenty for the tail integrals here.
        let chi = x - PI / 4.0;
        let p = 1.0 - 9.0 / (128.0 * x * x);
        let q = -1.0 / (8.0 * x);
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// First positive zero of J0 by bisection: 2.404825557695773.
pub fn first_bessel_j0_zero() -> f64 {
    let mut lo = 2.0;
    let mut hi = 3.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Direct quadrature of `c_{d,alpha} int (1 - cos(xi . y)) |y|^{-d-alpha} dy`
/// at `|xi| = 1`, which must equal 1 when the kernel normalization realizes
/// the symbol `|xi|^alpha`. Supports d = 1 (cosine kernel) and d = 2
/// (radial Bessel kernel).
pub fn symbol_quadrature(d: usize, alpha: f64) -> f64 {
    assert!((1..=2).contains(&d), "symbol quadrature implemented for d in {{1,2}}");
    let c = kernel_constant(d, alpha);
    let sigma = unit_sphere_area(d);
    let profile = move |r: f64| -> f64 {
        if d == 1 {
            1.0 - r.cos()
        } else {
            1.0 - bessel_j0(r)
        }
    };
    // Singular head: (1 - profile) ~ r^2/2 near zero.
    let head = integrate_1d_dyadic(&|r: f64| profile(r) * r.powf(-1.0 - alpha), 0.0, 1.0, 40, 16);
    // Oscillatory body in pi-length panels.
    let r_cut = 10_000.0;
    let (nodes, weights) = gauss_legendre(16);
    let mut body = 0.0;
    let mut a = 1.0;
    while a < r_cut {
        let b = (a + PI).min(r_cut);
        let c2 = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..nodes.len() {
            let r = mid + c2 * nodes[i];
            body += weights[i] * c2 * profile(r) * r.powf(-1.0 - alpha);
        }
        a = b;
    }
    // Tail: the "1" integrates exactly; the oscillatory remainder is
    // O(r_cut^{-1/2 - alpha}) and handled by one integration by parts
    // for d = 1, and bounded by the same order for d = 2.
    let mut tail = r_cut.powf(-alpha) / alpha;
    if d == 1 {
        // int_R cos(r) r^{-1-alpha} dr = -sin(R) R^{-1-alpha} + O(R^{-2-alpha})
        tail += r_cut.sin() * r_cut.powf(-1.0 - alpha);
    }
    c * sigma * (head + body + tail)
}

/// Free-space heat kernel of the generator Delta (per-coordinate variance
/// `2t`) at distance `r`.
pub fn gaussian_density(d: usize, t: f64, r: f64) -> f64 {
    (4.0 * PI * t).powf(-(d as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}

/// Isotropic Cauchy (alpha = 1) transition density at distance `r`:
/// `Gamma((d+1)/2) / pi^{(d+1)/2} * t / (t^2 + r^2)^{(d+1)/2}`.
pub fn cauchy_density(d: usize, t: f64, r: f64) -> f64 {
    let df = d as f64;
    gamma((df + 1.0) / 2.0) / PI.powf((df + 1.0) / 2.0) * t
        / (t * t + r * r).powf((df + 1.0) / 2.0)
}

/// Reference survival lower bound from the eigenfunction expansion:
/// `P_x(tau > t) >= exp(-lambda_1 t) phi_1(x)` for the sup-normalized
/// positive eigenfunction.
pub fn spectral_survival_floor(lambda1: f64, phi_at_x: f64, t: f64) -> f64 {
    (-lambda1 * t).exp() * phi_at_x
}

/// Trapezoid cross-check of a 1D integral on a uniform grid (used by tests
/// to validate measure-weighted sums).
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_matches_known_values() {
        // Abramowitz & Stegun spot values.
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-12);
        assert!((bessel_j0(5.0) - (-0.1775967713143383)).abs() < 1e-12);
        // Asymptotic branch.
        assert!((bessel_j0(10.0) - (-0.24593576445134835)).abs() < 1e-4);
    }

    #[test]
    fn first_zero_is_the_textbook_value() {
        let j0 = first_bessel_j0_zero();
        assert!((j0 - 2.404825557695773).abs() < 1e-10, "{j0}");
    }

    #[test]
    fn symbol_quadrature_confirms_kernel_normalization() {
        for d in [1usize, 2] {
            for alpha in [0.5, 1.0, 1.5] {
                let v = symbol_quadrature(d, alpha);
                assert!(
                    (v - 1.0).abs() < 2e-3,
                    "(d,alpha)=({d},{alpha}): quadrature {v}"
                );
            }
        }
    }

    #[test]
    fn cauchy_density_is_the_poisson_kernel() {
        // d=1: t / (pi (t^2 + r^2)).
        let t = 0.7;
        let r = 0.3;
        let exact = t / (PI * (t * t + r * r));
        assert!((cauchy_density(1, t, r) - exact).abs() < 1e-14);
        // Normalization in d=2 by radial quadrature plus the analytic
        // r^{-3} tail beyond the truncation radius.
        let r_cut = 400.0;
        let mass = trapezoid(|rr| cauchy_density(2, t, rr) * 2.0 * PI * rr, 0.0, r_cut, 4_000_000);
        let tail = 2.0 * PI * gamma(1.5) / PI.powf(1.5) * t / r_cut;
        assert!((mass + tail - 1.0).abs() < 1e-5, "mass {mass} + tail {tail}");
    }
}
