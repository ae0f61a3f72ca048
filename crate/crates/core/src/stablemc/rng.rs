//! Per-path random streams and stable-law sampling.
//!
//! Each path owns a ChaCha stream derived from the base seed and the path
//! index, so batches are reproducible for any worker count and partition.
//! Gaussian factors use Box-Muller; the positive stable subordinator uses
//! the Chambers-Mallows-Stuck representation.

use crate::grid::Point;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub struct PathRng(ChaCha8Rng);

#[inline]
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

impl PathRng {
    pub fn for_path(seed: u64, path: u64) -> PathRng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        PathRng(rng)
    }

    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        clamp_open01(self.0.random::<f64>())
    }

    /// Box-Muller pair of standard normals.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform_open();
        (r * theta.cos(), r * theta.sin())
    }

    /// Positive stable variable with Laplace transform `exp(-lambda^rho)`,
    /// `rho` in (0,1), by the Chambers-Mallows-Stuck formula.
    #[inline]
    pub fn positive_stable(&mut self, rho: f64) -> f64 {
        let u = self.uniform_open() * PI;
        let w = -self.uniform_open().ln();
        let s1 = (rho * u).sin() / u.sin().powf(1.0 / rho);
        let s2 = (((1.0 - rho) * u).sin() / w).powf((1.0 - rho) / rho);
        s1 * s2
    }

    /// One increment of the isotropic alpha-stable process over `dt`:
    /// characteristic function `exp(-dt |xi|^alpha)`. For alpha = 2 this is
    /// the Brownian motion with generator Delta (per-coordinate variance
    /// `2 dt`); otherwise a Gaussian subordinated by an (alpha/2)-stable
    /// time change.
    pub fn stable_increment(&mut self, alpha: f64, d: usize, dt: f64) -> Point {
        let var = if alpha == 2.0 {
            2.0 * dt
        } else {
            2.0 * dt.powf(2.0 / alpha) * self.positive_stable(alpha / 2.0)
        };
        let sd = var.sqrt();
        let mut out = [0.0; 3];
        let mut m = 0;
        while m < d {
            let (a, b) = self.normal_pair();
            out[m] = sd * a;
            m += 1;
            if m < d {
                out[m] = sd * b;
                m += 1;
            }
        }
        out
    }
}
