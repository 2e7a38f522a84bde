//! Small numerical utilities shared by the statistical modules.

use crate::{Error, Result};

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut evals = 0usize;
    let v = simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50, &mut evals)?;
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    if *evals > 4_000_000 {
        return Err(Error::Numeric(
            "quadrature exceeded evaluation budget".into(),
        ));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Numeric("quadrature failed to converge".into()));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals)?;
    Ok(l + r)
}

/// Empirical quantile with linear interpolation between order statistics
/// (R type 7): for p in `[0,1]`, `q = v[h] + (h - floor(h)) (v[h+1] - v[h])`
/// with h = (len - 1) p on the sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Sort a copy of `values` ascending (total order; inputs must be non-NaN).
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN values"));
    v
}

/// Gauss-Hermite nodes and weights (physicists' convention: the rule
/// integrates exp(-x^2) f(x) over the real line), computed by
/// Golub-Welsch from the Jacobi matrix of the Hermite recurrence.
pub fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 2);
    let mut jacobi = nalgebra::DMatrix::zeros(m, m);
    for k in 1..m {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_log_singularity() {
        // int_0^1 -ln t dt = 1, integrable endpoint singularity
        let v = adaptive_simpson(&|t: f64| -t.ln(), 1e-12, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(&|t: f64| 3.0 * t * t, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-10);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_hermite_moments() {
        let (nodes, weights) = gauss_hermite(32);
        let total: f64 = weights.iter().sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // int exp(-x^2) x^2 dx = sqrt(pi)/2; odd moments vanish
        let m2: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
        assert!((m2 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
        let m1: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x).sum();
        assert!(m1.abs() < 1e-10);
        // E[Phi(Z)] = 1/2 for Z standard normal via the rule
        let half: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| {
                let z = std::f64::consts::SQRT_2 * x;
                w * 0.5 * (1.0 + statrs::function::erf::erf(z / std::f64::consts::SQRT_2))
            })
            .sum::<f64>()
            / std::f64::consts::PI.sqrt();
        assert!((half - 0.5).abs() < 1e-12, "{half}");
    }
}
