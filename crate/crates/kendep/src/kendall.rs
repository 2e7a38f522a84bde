//! The product-uniform Kendall law, pseudo-observations, the empirical
//! Kendall cdf and the AUK estimator.
//!
//! For T = F(X) and the product of d independent uniforms P = U_1...U_d,
//! the cdf and density of P are available in closed form:
//!
//!   K(t) = t * sum_{k=0}^{d-1} (-ln t)^k / k!,   k(t) = (-ln t)^{d-1} / (d-1)!
//!
//! Since -2 ln P is chi-square with 2d degrees of freedom, the same cdf is
//! also 1 - F_{chi2_{2d}}(-2 ln t); the two routes are evaluated by entirely
//! different numerics (direct series versus regularized incomplete gamma)
//! and serve as mutual cross-checks. The area under the Kendall curve,
//! Pr(T <= P) = E{1 - K(T)}, equals 1/2 under total independence and is
//! estimated by plugging in the empirical joint cdf at the sample points.

use crate::special::reg_upper_gamma;
use crate::{Error, Result, Sample};

/// Switch point between the direct series and the chi-square survival form
/// when evaluating the cdf: the tail form is used for t below this value.
const SERIES_CUTOFF: f64 = 1e-3;

/// Closed-form law of the product of d independent uniforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductKendallLaw {
    d: usize,
}

impl ProductKendallLaw {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension d = {d} must be >= 2")));
        }
        Ok(ProductKendallLaw { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The cdf K(t) on [0, 1]; series for t >= 1e-3, chi-square tail below.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!(
                "cdf argument t = {t} outside [0, 1]"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t >= SERIES_CUTOFF {
            Ok(self.cdf_series(t))
        } else {
            self.cdf_chi_square(t)
        }
    }

    /// Direct evaluation of t * sum_{k<d} (-ln t)^k / k! (all terms positive).
    pub fn cdf_series(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let lt = -t.ln();
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..self.d {
            term *= lt / k as f64;
            sum += term;
        }
        (t * sum).min(1.0)
    }

    /// The same cdf via the chi-square survival route,
    /// 1 - F_{chi2_{2d}}(-2 ln t) = Q(d, -ln t).
    pub fn cdf_chi_square(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t >= 1.0 {
            return Ok(1.0);
        }
        reg_upper_gamma(self.d as f64, -t.ln())
    }

    /// The density k(t) = (-ln t)^{d-1} / (d-1)! on (0, 1).
    pub fn pdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!(
                "pdf argument t = {t} outside (0, 1)"
            )));
        }
        Ok(self.pdf_series(t))
    }

    pub fn pdf_series(&self, t: f64) -> f64 {
        let lt = -t.ln();
        let mut v = 1.0;
        for k in 1..self.d {
            v *= lt / k as f64;
        }
        v
    }

    /// The density via the chi-square route, (2/t) f_{chi2_{2d}}(-2 ln t),
    /// evaluated in log space.
    pub fn pdf_chi_square(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!(
                "pdf argument t = {t} outside (0, 1)"
            )));
        }
        let x = -2.0 * t.ln();
        let df = self.d as f64; // half the chi-square degrees of freedom
        let ln_f = (df - 1.0) * (x / 2.0).ln()
            - x / 2.0
            - statrs::function::gamma::ln_gamma(df)
            - 2f64.ln();
        Ok(2.0 / t * ln_f.exp())
    }
}

/// The integral I_{k,n}(t) = int_0^t s^k ln^n(1/s) ds in closed form:
///
///   I_{k,n}(t) = t^{k+1} sum_{j=0}^{n} (n)_j / (k+1)^{j+1} * ln^{n-j}(1/t),
///
/// where (n)_j is the falling factorial, so I_{k,n}(1) = n! / (k+1)^{n+1}.
pub fn descending_factorial_integral(k: u32, n: u32, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let kp1 = (k + 1) as f64;
    let lt = -t.ln();
    let mut falling = 1.0; // (n)_j
    let mut sum = 0.0;
    for j in 0..=n {
        if j > 0 {
            falling *= (n - j + 1) as f64;
        }
        sum += falling / kp1.powi(j as i32 + 1) * lt.powi((n - j) as i32);
    }
    Ok(t.powi(k as i32 + 1) * sum)
}

/// Which points count toward the empirical joint cdf at a sample point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// T_i = #{j : X_j <= X_i componentwise} / n (the point itself counts).
    IncludeSelf,
    /// T_i = #{j != i : X_j <= X_i componentwise} / (n - 1).
    ExcludeSelf,
}

/// The empirical joint cdf evaluated at each sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    values: Vec<f64>,
    convention: Convention,
    d: usize,
}

impl PseudoObservations {
    pub fn from_parts(values: Vec<f64>, convention: Convention, d: usize) -> Result<Self> {
        let lower = match convention {
            Convention::IncludeSelf => 1.0 / values.len() as f64,
            Convention::ExcludeSelf => 0.0,
        };
        if values.iter().any(|&v| v < lower - 1e-12 || v > 1.0 + 1e-12) {
            return Err(Error::Domain(
                "pseudo-observation outside its admissible range".into(),
            ));
        }
        Ok(PseudoObservations {
            values,
            convention,
            d,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Dominance counts for the unrotated data: counts[i] = #{j : X_j <= X_i}.
/// Ties use non-strict <= in every coordinate; the point itself counts.
///
/// Computed with packed bit sets: per coordinate, walk the points in sorted
/// order maintaining the bit mask of points already at or below the current
/// value (whole tie groups enter before any member is resolved), and AND
/// the masks across coordinates. Still the quadratic count, word-packed;
/// exact integer agreement with the direct pair loop is unit-tested.
pub(crate) fn dominance_counts(sample: &Sample) -> Vec<u32> {
    let n = sample.n();
    let d = sample.d();
    let words = n.div_ceil(64);
    let mut acc = vec![0u64; n * words];
    let mut cur = vec![0u64; words];
    let mut order: Vec<u32> = (0..n as u32).collect();
    for m in 0..d {
        let col: Vec<f64> = (0..n).map(|i| sample.row(i)[m]).collect();
        order.sort_unstable_by(|&a, &b| {
            col[a as usize]
                .partial_cmp(&col[b as usize])
                .expect("finite")
        });
        cur.iter_mut().for_each(|w| *w = 0);
        let mut g = 0usize;
        while g < n {
            // the whole tie group becomes visible at once
            let mut h = g;
            while h < n && col[order[h] as usize] == col[order[g] as usize] {
                let k = order[h] as usize;
                cur[k >> 6] |= 1u64 << (k & 63);
                h += 1;
            }
            for &iu in &order[g..h] {
                let row = &mut acc[iu as usize * words..(iu as usize + 1) * words];
                if m == 0 {
                    row.copy_from_slice(&cur);
                } else {
                    for (r, c) in row.iter_mut().zip(&cur) {
                        *r &= c;
                    }
                }
            }
            g = h;
        }
    }
    (0..n)
        .map(|i| {
            acc[i * words..(i + 1) * words]
                .iter()
                .map(|w| w.count_ones())
                .sum()
        })
        .collect()
}

/// The direct O(n^2 d) pair loop; retained as the exactness oracle for the
/// packed counter.
#[cfg(test)]
fn dominance_counts_naive(sample: &Sample) -> Vec<u32> {
    let n = sample.n();
    let d = sample.d();
    let x = sample.values();
    let mut counts = vec![0u32; n];
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        let mut c = 0u32;
        for k in 0..n {
            let xk = &x[k * d..(k + 1) * d];
            let mut le = true;
            for m in 0..d {
                if xk[m] > xi[m] {
                    le = false;
                    break;
                }
            }
            c += le as u32;
        }
        counts[i] = c;
    }
    counts
}

/// Include-self pseudo-observations T_i = #{j : X_j <= X_i} / n.
pub fn multivariate_ecdf_at_points(sample: &Sample) -> PseudoObservations {
    let n = sample.n() as f64;
    let values = dominance_counts(sample)
        .into_iter()
        .map(|c| c as f64 / n)
        .collect();
    PseudoObservations {
        values,
        convention: Convention::IncludeSelf,
        d: sample.d(),
    }
}

/// Exclude-self pseudo-observations T_i = #{j != i : X_j <= X_i} / (n - 1).
pub fn pseudo_obs_excluding_self(sample: &Sample) -> PseudoObservations {
    let n = sample.n();
    let values = dominance_counts(sample)
        .into_iter()
        .map(|c| (c - 1) as f64 / (n - 1) as f64)
        .collect();
    PseudoObservations {
        values,
        convention: Convention::ExcludeSelf,
        d: sample.d(),
    }
}

/// The empirical Kendall cdf: the fraction of pseudo-observations <= t.
pub fn empirical_kendall_cdf(pseudo: &PseudoObservations, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    let hits = pseudo.values.iter().filter(|&&v| v <= t).count();
    Ok(hits as f64 / pseudo.n() as f64)
}

/// The AUK estimate 1 - mean K(T_i) over the pseudo-observations.
pub fn auk_estimate(pseudo: &PseudoObservations, law: &ProductKendallLaw) -> Result<f64> {
    if pseudo.d() != law.d() {
        return Err(Error::Config(format!(
            "pseudo-observations are {}-dimensional but the law has d = {}",
            pseudo.d(),
            law.d()
        )));
    }
    let mut sum = 0.0;
    for &t in &pseudo.values {
        sum += law.cdf(t)?;
    }
    Ok(1.0 - sum / pseudo.n() as f64)
}

/// AUK straight from dominance counts (include-self); the hot path used by
/// the calibration loops.
pub fn auk_from_counts(counts: &[u32], n: usize, law: &ProductKendallLaw) -> Result<f64> {
    let mut sum = 0.0;
    for &c in counts {
        sum += law.cdf(c as f64 / n as f64)?;
    }
    Ok(1.0 - sum / n as f64)
}

/// Include-self AUK of a sample under the product law of its own dimension.
pub fn auk_of_sample(sample: &Sample) -> Result<f64> {
    let law = ProductKendallLaw::new(sample.d())?;
    auk_from_counts(&dominance_counts(sample), sample.n(), &law)
}

/// Tie-adjusted sample Kendall tau (tau_b) for paired data.
pub fn kendall_tau_pairwise(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain("tau requires equal-length columns".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Domain("tau requires n >= 2".into()));
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_x = 0u64; // tied in x only
    let mut ties_y = 0u64; // tied in y only
    let mut ties_xy = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (x[i] - x[j]).partial_cmp(&0.0).unwrap();
            let dy = (y[i] - y[j]).partial_cmp(&0.0).unwrap();
            use std::cmp::Ordering::*;
            match (dx, dy) {
                (Equal, Equal) => ties_xy += 1,
                (Equal, _) => ties_x += 1,
                (_, Equal) => ties_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom_x = n0 - (ties_x + ties_xy) as f64;
    let denom_y = n0 - (ties_y + ties_xy) as f64;
    if denom_x <= 0.0 || denom_y <= 0.0 {
        return Err(Error::Degenerate(
            "a column is constant; Kendall tau is undefined".into(),
        ));
    }
    Ok((concordant as f64 - discordant as f64) / (denom_x * denom_y).sqrt())
}
