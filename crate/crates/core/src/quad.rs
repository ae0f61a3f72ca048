//! Deterministic quadrature: Gauss-Legendre rules, tensor-product box
//! integrals, and dyadic splitting for endpoint singularities.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with an n-point Gauss-Legendre rule.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..n {
        s += w[i] * f(mid + c * x[i]);
    }
    s * c
}

/// Integrate over `[a, b]` splitting dyadically toward both endpoints, for
/// integrands with algebraic endpoint singularities (in value or
/// derivative). `levels` controls how close the panels approach the ends.
pub fn integrate_1d_dyadic<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, levels: usize, n: usize) -> f64 {
    let len = b - a;
    let mut total = 0.0;
    // Panels shrinking toward `a`.
    let mut right = a + 0.5 * len;
    let mut width = 0.25 * len;
    for _ in 0..levels {
        total += integrate_1d(f, right - width, right, n);
        right -= width;
        width *= 0.5;
    }
    total += integrate_1d(f, a, right, n);
    // Panels shrinking toward `b`.
    let mut left = b - 0.5 * len;
    let mut width = 0.25 * len;
    for _ in 0..levels {
        total += integrate_1d(f, left, left + width, n);
        left += width;
        width *= 0.5;
    }
    total += integrate_1d(f, left, b, n);
    total
}

/// Tensor-product Gauss-Legendre integral of `f` over a `d`-dimensional box.
pub fn integrate_box<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    lo: &[f64; 3],
    hi: &[f64; 3],
    d: usize,
    n: usize,
) -> f64 {
    let (x, w) = gauss_legendre(n);
    let mut pts = [[0.0f64; 64]; 3];
    let mut wts = [[0.0f64; 64]; 3];
    assert!(n <= 64);
    for m in 0..d {
        let c = 0.5 * (hi[m] - lo[m]);
        let mid = 0.5 * (hi[m] + lo[m]);
        for i in 0..n {
            pts[m][i] = mid + c * x[i];
            wts[m][i] = w[i] * c;
        }
    }
    let counts = [n, if d > 1 { n } else { 1 }, if d > 2 { n } else { 1 }];
    let mut s = 0.0;
    let mut p = [0.0f64; 3];
    for i in 0..counts[0] {
        p[0] = pts[0][i];
        let wi = wts[0][i];
        for j in 0..counts[1] {
            let wj = if d > 1 { p[1] = pts[1][j]; wts[1][j] } else { 1.0 };
            for k in 0..counts[2] {
                let wk = if d > 2 { p[2] = pts[2][k]; wts[2][k] } else { 1.0 };
                s += wi * wj * wk * f(&p);
            }
        }
    }
    s
}
