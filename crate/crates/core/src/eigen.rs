//! Principal eigenpairs of the discrete operator, eigenfunction
//! maximizers, and Rayleigh quotients.
//!
//! The solver is inverse power iteration with a deterministic all-ones
//! start vector: dense operators are Cholesky-factored once, sparse ones
//! use conjugate-gradient inner solves. A Gershgorin shift keeps the
//! factorization positive definite when a potential makes the form
//! indefinite; the reported eigenvalue is always for the unshifted form.

use crate::error::{Error, Result};
use crate::fraclap::DiscreteOperator;
use crate::geometry::Domain;
use crate::grid::Point;
use crate::linalg::{cg_solve, dot, norm_inf};

/// Principal eigenvalue and positive, sup-normalized eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Location data of an eigenfunction maximizer.
#[derive(Debug, Clone)]
pub struct MaximizerReport {
    pub x0: Point,
    pub value: f64,
    pub dist_to_boundary: f64,
    /// All interior nodes whose |value| is within 1e-8 of the maximum.
    pub ties: Vec<Point>,
}

const MAX_OUTER: usize = 2000;
const TIE_REL: f64 = 1e-8;

/// Smallest eigenpair of `(-Delta)^{alpha/2} - V` with the fixed all-ones
/// start; `tol` is the relative residual target on the eigenvalue.
pub fn principal_eigenpair(op: &DiscreteOperator, tol: f64) -> Result<EigenPair> {
    assert!(tol > 0.0);
    let n = op.n();
    let diag = op.eigenform_diag();
    let diag_scale = norm_inf(&diag).max(f64::MIN_POSITIVE);

    // Shift so the factored/solved form is safely positive definite.
    let lower = op.gershgorin_lower();
    let mut sigma = if lower > 0.0 { 0.0 } else { -lower + 1e-10 * diag_scale };

    enum Solver {
        Dense(crate::linalg::DenseSym),
        Cg { sigma: f64 },
    }

    let solver = if op.is_dense() {
        let mut factor = None;
        for _ in 0..4 {
            let mut m = op.eigenform_dense().expect("dense storage");
            for i in 0..n {
                let v = m.at(i, i) + sigma;
                m.set(i, i, v);
            }
            match m.cholesky_in_place() {
                Ok(()) => {
                    factor = Some(m);
                    break;
                }
                Err(_) => {
                    sigma = (2.0 * sigma).max(1e-8 * diag_scale);
                }
            }
        }
        match factor {
            Some(m) => Solver::Dense(m),
            None => {
                return Err(Error::SolverDidNotConverge { iterations: 0, residual: f64::NAN })
            }
        }
    } else {
        Solver::Cg { sigma }
    };

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut mw = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=MAX_OUTER {
        iterations = it;
        match &solver {
            Solver::Dense(f) => f.cholesky_solve(&v, &mut w),
            Solver::Cg { sigma } => {
                let shifted_diag: Vec<f64> = diag.iter().map(|d| d + sigma).collect();
                w.copy_from_slice(&v);
                cg_solve(
                    |x, y| {
                        op.eigenform_matvec(x, y);
                        for i in 0..n {
                            y[i] += sigma * x[i];
                        }
                    },
                    &shifted_diag,
                    &v,
                    &mut w,
                    1e-12,
                    4 * n + 200,
                )?;
            }
        }
        // Rayleigh quotient of w for the shifted form is <v,w>/<w,w>.
        let ww = dot(&w, &w);
        lambda = dot(&v, &w) / ww - sigma;
        let nw = ww.sqrt();
        for x in w.iter_mut() {
            *x /= nw;
        }
        op.eigenform_matvec(&w, &mut mw);
        let mut r = 0.0f64;
        for i in 0..n {
            r = r.max((mw[i] - lambda * w[i]).abs());
        }
        residual = r;
        std::mem::swap(&mut v, &mut w);
        if r <= tol * lambda.abs().max(1e-8 * diag_scale) {
            break;
        }
        if it == MAX_OUTER {
            return Err(Error::SolverDidNotConverge { iterations: it, residual });
        }
    }

    // Positivity and sup-normalization: divide by the signed extreme value
    // so the maximum is exactly +1.
    let mut arg = 0usize;
    let mut best = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            arg = i;
        }
    }
    let pivot = v[arg];
    if pivot == 0.0 {
        return Err(Error::NullEigenfunction);
    }
    for x in v.iter_mut() {
        *x /= pivot;
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::NullEigenfunction);
    }

    Ok(EigenPair { lambda, phi: v, residual, iterations })
}

/// Argmax of |phi| (first in row-major interior order among ties), its
/// boundary distance, and the tie set.
pub fn maximizer(phi: &[f64], domain: &Domain) -> Result<MaximizerReport> {
    assert_eq!(phi.len(), domain.interior_count());
    let mut best = 0.0f64;
    let mut arg = None;
    for (r, &x) in phi.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            arg = Some(r);
        }
    }
    let arg = arg.ok_or(Error::NullEigenfunction)?;
    let x0 = domain.interior_point(arg);
    let cutoff = (1.0 - TIE_REL) * best;
    let ties: Vec<Point> = phi
        .iter()
        .enumerate()
        .filter(|(_, &x)| x.abs() >= cutoff)
        .map(|(r, _)| domain.interior_point(r))
        .collect();
    Ok(MaximizerReport {
        x0,
        value: phi[arg],
        dist_to_boundary: domain.dist_to_boundary(x0)?,
        ties,
    })
}

/// `<(P - V) u, u> / <u, u>`; a variational upper bound witness for the
/// principal eigenvalue.
pub fn rayleigh_quotient(op: &DiscreteOperator, u: &[f64]) -> Result<f64> {
    assert_eq!(u.len(), op.n());
    let uu = dot(u, u);
    if uu == 0.0 {
        return Err(Error::NullEigenfunction);
    }
    let mut au = vec![0.0; u.len()];
    op.eigenform_matvec(u, &mut au);
    Ok(dot(&au, u) / uu)
}

/// JSON export `{lambda, residual, iterations}`.
pub fn eigenpair_to_json(pair: &EigenPair) -> serde_json::Value {
    serde_json::json!({
        "lambda": pair.lambda,
        "residual": pair.residual,
        "iterations": pair.iterations,
    })
}

/// CSV export of the eigenfunction: one row per interior node,
/// coordinates then value.
pub fn write_phi_csv<W: std::io::Write>(
    domain: &Domain,
    phi: &[f64],
    w: &mut W,
) -> std::io::Result<()> {
    let d = domain.d();
    let cols: Vec<String> = (0..d).map(|m| format!("x{m}")).collect();
    writeln!(w, "{},value", cols.join(","))?;
    for (r, &v) in phi.iter().enumerate() {
        let p = domain.interior_point(r);
        let coords: Vec<String> = (0..d).map(|m| format!("{:.17e}", p[m])).collect();
        writeln!(w, "{},{:.17e}", coords.join(","), v)?;
    }
    Ok(())
}
