//! The z-statistic test of total independence.
//!
//! Under the null of total independence, sqrt(n) (AUK_hat - 1/2) is
//! asymptotically normal with a standard deviation sigma that depends only
//! on the dimension. For d = 2 the variance is exactly 19/432; it is also
//! recovered here by adaptive quadrature of
//!
//!   2 * int_{0<s<t<1} k(s) Gamma(s,t) k(t) ds dt,  Gamma(s,t) = s (t - 1 - ln t),
//!
//! which serves as an independent numerical check. For d >= 3 the crate
//! ships Monte Carlo estimates as constants and can rerun the estimation.
//! Small samples use empirical percentiles of |z_n| simulated from the
//! standard d-dimensional uniform; large samples (n > max(1000, 100 d))
//! use the asymptotic normal quantile.

use crate::kendall::{auk_of_sample, multivariate_ecdf_at_points, ProductKendallLaw};
use crate::numeric::{adaptive_simpson, quantile_sorted};
use crate::rng::{stream_rng, streams};
use crate::{Error, Result, Sample};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// The exact null variance of sqrt(n)(AUK_hat - 1/2) for d = 2.
pub const SIGMA_SQUARED_D2: f64 = 19.0 / 432.0;

/// Reference sigma values for d = 2..10 (10^4 replicates of size 5 * 10^4),
/// shipped as defaults for dimensions without a closed form.
///
/// Provenance caveat: the procedure that generated these reference values
/// evaluated the d-dimensional survival transform on *bivariate* null
/// samples (see [`estimate_sigma_pi_bivariate_proxy`], which reproduces
/// them). For d >= 3 they therefore differ from fresh estimates of the
/// d-dimensional statistic itself ([`estimate_sigma_pi`]; e.g. ~0.32 at
/// d = 3). Small-sample decisions calibrated through
/// [`calibrate_percentiles`] are invariant to this scale because the same
/// sigma divides both the statistic and its simulated percentiles; only
/// raw z magnitudes and asymptotic p-values for d >= 3 are affected, and a
/// fresh estimate can be supplied for those.
pub const SIGMA_TABLE: [(usize, f64); 9] = [
    (2, 0.20988),
    (3, 0.19383),
    (4, 0.16254),
    (5, 0.12511),
    (6, 0.09407),
    (7, 0.06853),
    (8, 0.04912),
    (9, 0.03395),
    (10, 0.02377),
];

/// How a sigma value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSource {
    ExactD2,
    QuadratureD2,
    ShippedTable,
    MonteCarlo { reps: usize, n: usize, seed: u64 },
    MonteCarloBivariateProxy { reps: usize, n: usize, seed: u64 },
}

/// The null standard deviation of sqrt(n)(AUK_hat - 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPi {
    pub d: usize,
    pub value: f64,
    pub source: SigmaSource,
}

/// sigma for d = 2 from the closed form sqrt(19/432).
pub fn sigma_pi_exact_d2() -> SigmaPi {
    SigmaPi {
        d: 2,
        value: SIGMA_SQUARED_D2.sqrt(),
        source: SigmaSource::ExactD2,
    }
}

/// The d = 2 covariance kernel of the null Kendall process,
/// Gamma(s, t) = s (t - 1 - ln t) for s <= t (symmetric in its arguments).
pub fn gamma_cov_d2(s: f64, t: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    lo * (hi - 1.0 - hi.ln())
}

/// sigma for d = 2 by adaptive quadrature over the triangle 0 < s < t < 1,
/// with a 1e-10 cutoff at the logarithmic endpoint singularities. Agrees
/// with the exact value to 1e-6.
pub fn sigma_pi_quadrature_d2() -> Result<SigmaPi> {
    const CUT: f64 = 1e-10;
    let outer = adaptive_simpson(
        &|t: f64| {
            let kt = -t.ln();
            let inner = adaptive_simpson(&|s: f64| -s.ln() * gamma_cov_d2(s, t), CUT, t, 1e-12)
                .unwrap_or(f64::NAN);
            kt * inner
        },
        CUT,
        1.0,
        1e-10,
    )?;
    let variance = 2.0 * outer;
    if !variance.is_finite() || variance <= 0.0 {
        return Err(Error::Numeric("sigma quadrature failed".into()));
    }
    Ok(SigmaPi {
        d: 2,
        value: variance.sqrt(),
        source: SigmaSource::QuadratureD2,
    })
}

/// The shipped default sigma for a dimension, if any: exact for d = 2,
/// the Monte Carlo table for d = 3..10.
pub fn sigma_pi_default(d: usize) -> Option<SigmaPi> {
    if d == 2 {
        return Some(sigma_pi_exact_d2());
    }
    SIGMA_TABLE
        .iter()
        .find(|&&(dd, _)| dd == d)
        .map(|&(_, value)| SigmaPi {
            d,
            value,
            source: SigmaSource::ShippedTable,
        })
}

/// Monte Carlo estimate of sigma: the sample standard deviation of
/// sqrt(n)(AUK_hat - 1/2) over `reps` independent standard-uniform samples
/// of size n. Deterministic given the seed.
pub fn estimate_sigma_pi(d: usize, reps: usize, n: usize, seed: u64) -> Result<SigmaPi> {
    if d < 2 || reps < 2 || n < 2 {
        return Err(Error::Domain(
            "estimate_sigma_pi requires d >= 2, reps >= 2, n >= 2".into(),
        ));
    }
    let stats = null_statistics(d, n, reps, seed, streams::SIGMA)?;
    let mean = stats.iter().sum::<f64>() / reps as f64;
    let ss: f64 = stats.iter().map(|a| (a - mean) * (a - mean)).sum();
    Ok(SigmaPi {
        d,
        value: (ss / (reps - 1) as f64).sqrt(),
        source: SigmaSource::MonteCarlo { reps, n, seed },
    })
}

/// Reproduction of the shipped reference table's estimator: the
/// d-dimensional survival transform is averaged over pseudo-observations
/// of a *bivariate* uniform null sample, matching the procedure that
/// produced [`SIGMA_TABLE`]. Coincides with [`estimate_sigma_pi`] in
/// distribution when d = 2; for d > 2 it is a different statistic, kept
/// for cross-checking the table.
pub fn estimate_sigma_pi_bivariate_proxy(
    d: usize,
    reps: usize,
    n: usize,
    seed: u64,
) -> Result<SigmaPi> {
    if d < 2 || reps < 2 || n < 2 {
        return Err(Error::Domain(
            "sigma estimation requires d >= 2, reps >= 2, n >= 2".into(),
        ));
    }
    let law = ProductKendallLaw::new(d)?;
    let stats: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, streams::SIGMA, rep as u64);
            let mut values = vec![0.0; n * 2];
            for v in values.iter_mut() {
                *v = rng.random();
            }
            let sample = Sample::from_flat(values, n, 2)?;
            let pseudo = multivariate_ecdf_at_points(&sample);
            let mut sum = 0.0;
            for &t in pseudo.values() {
                sum += law.cdf(t)?;
            }
            Ok((n as f64).sqrt() * (0.5 - sum / n as f64))
        })
        .collect::<Result<_>>()?;
    let mean = stats.iter().sum::<f64>() / reps as f64;
    let ss: f64 = stats.iter().map(|a| (a - mean) * (a - mean)).sum();
    Ok(SigmaPi {
        d,
        value: (ss / (reps - 1) as f64).sqrt(),
        source: SigmaSource::MonteCarloBivariateProxy { reps, n, seed },
    })
}

/// sqrt(n)(AUK_hat - 1/2) over `reps` standard-uniform null samples.
fn null_statistics(d: usize, n: usize, reps: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let law = ProductKendallLaw::new(d)?;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, stream, rep as u64);
            let mut values = vec![0.0; n * d];
            for v in values.iter_mut() {
                *v = rng.random();
            }
            let sample = Sample::from_flat(values, n, d)?;
            let pseudo = multivariate_ecdf_at_points(&sample);
            let auk = crate::kendall::auk_estimate(&pseudo, &law)?;
            Ok((n as f64).sqrt() * (auk - 0.5))
        })
        .collect()
}

/// Empirical percentiles of |z_n| for one (d, n), with their provenance.
/// The sigma that scaled the simulated statistics is stored so that a test
/// decided against these percentiles divides by the same sigma; the
/// decision is then invariant to the sigma convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub d: usize,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub sigma: SigmaPi,
    /// (confidence level, percentile) pairs for 0.90, 0.95, 0.99.
    pub percentiles: [(f64, f64); 3],
}

impl CalibrationTable {
    pub fn percentile(&self, alpha: f64) -> Result<f64> {
        let level = 1.0 - alpha;
        self.percentiles
            .iter()
            .find(|(l, _)| (l - level).abs() < 1e-9)
            .map(|&(_, p)| p)
            .ok_or_else(|| {
                Error::Config(format!(
                    "alpha = {alpha} not covered by the calibrated percentiles \
                     (0.10, 0.05, 0.01 only)"
                ))
            })
    }
}

/// Empirical (1 - alpha) percentiles of |z_n| over `reps` standard-uniform
/// samples of size n, for alpha in {0.10, 0.05, 0.01}. `sigma = None`
/// scales with the shipped default for the dimension.
pub fn calibrate_percentiles_with_sigma(
    d: usize,
    n: usize,
    reps: usize,
    seed: u64,
    sigma: Option<SigmaPi>,
) -> Result<CalibrationTable> {
    if d < 2 || n < 2 {
        return Err(Error::Domain(
            "calibration requires d >= 2 and n >= 2".into(),
        ));
    }
    if reps < 100 {
        return Err(Error::Domain("calibration requires reps >= 100".into()));
    }
    let sigma = match sigma {
        Some(s) if s.d == d => s,
        Some(s) => {
            return Err(Error::Config(format!(
                "sigma is for d = {}, calibration is for d = {d}",
                s.d
            )))
        }
        None => sigma_pi_default(d)
            .map(Ok)
            .unwrap_or_else(|| estimate_sigma_pi(d, 2000, 5000, seed))?,
    };
    let stats = null_statistics(d, n, reps, seed, streams::PERCENTILES)?;
    let mut abs_z: Vec<f64> = stats.iter().map(|a| (a / sigma.value).abs()).collect();
    abs_z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let percentiles = [
        (0.90, quantile_sorted(&abs_z, 0.90)),
        (0.95, quantile_sorted(&abs_z, 0.95)),
        (0.99, quantile_sorted(&abs_z, 0.99)),
    ];
    Ok(CalibrationTable {
        d,
        n,
        reps,
        seed,
        sigma,
        percentiles,
    })
}

/// [`calibrate_percentiles_with_sigma`] with the default sigma.
pub fn calibrate_percentiles(
    d: usize,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<CalibrationTable> {
    calibrate_percentiles_with_sigma(d, n, reps, seed, None)
}

/// z_n = sqrt(n) (AUK_hat - 1/2) / sigma.
pub fn test_statistic(auk_hat: f64, n: usize, sigma: &SigmaPi) -> f64 {
    (n as f64).sqrt() * (auk_hat - 0.5) / sigma.value
}

/// Sample-size threshold above which the asymptotic critical value is used.
pub fn large_sample_threshold(d: usize) -> usize {
    1000usize.max(100 * d)
}

/// Upper alpha/2 point of the standard normal.
pub fn normal_two_sided_quantile(alpha: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - alpha / 2.0)
}

/// Where the critical value of a test came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSource {
    Asymptotic,
    Calibrated,
}

/// Critical-value policy for [`run_independence_test`].
#[derive(Debug, Clone)]
pub enum TestPolicy {
    /// Small samples use calibrated percentiles (from the supplied table
    /// when it matches, otherwise freshly simulated with `reps`/`seed`);
    /// large samples use the normal quantile.
    Auto {
        table: Option<CalibrationTable>,
        reps: usize,
        seed: u64,
    },
    /// As `Auto`, but never simulate: a missing or mismatched table for a
    /// small sample is a configuration error.
    AutoCachedOnly { table: Option<CalibrationTable> },
    /// Always use the asymptotic normal quantile.
    Asymptotic,
}

impl Default for TestPolicy {
    fn default() -> Self {
        TestPolicy::Auto {
            table: None,
            reps: 10_000,
            seed: 0,
        }
    }
}

/// Everything the total-independence decision is based on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub d: usize,
    pub auk_hat: f64,
    pub z_n: f64,
    pub sigma: SigmaPi,
    pub critical_value: f64,
    pub critical_source: CriticalSource,
    pub alpha: f64,
    pub reject: bool,
    /// Two-sided normal tail probability 2(1 - Phi(|z_n|)); reported from
    /// the asymptotic law even when the decision is calibrated.
    pub p_value_asymptotic: f64,
    /// Calibration provenance when the decision used simulated percentiles.
    pub calibration: Option<CalibrationTable>,
}

/// Run the AUK test of total independence on the unrotated sample.
pub fn run_independence_test(
    sample: &Sample,
    alpha: f64,
    policy: &TestPolicy,
) -> Result<TestReport> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    let n = sample.n();
    let d = sample.d();
    let auk_hat = auk_of_sample(sample)?;
    let small_sample = n <= large_sample_threshold(d);

    let want_calibrated = small_sample && !matches!(policy, TestPolicy::Asymptotic);
    let (sigma, critical_value, critical_source, calibration) = if want_calibrated {
        let supported = [0.10, 0.05, 0.01].iter().any(|a| (a - alpha).abs() < 1e-9);
        if !supported {
            return Err(Error::Config(format!(
                "calibrated critical values cover alpha in {{0.10, 0.05, 0.01}}; \
                 got {alpha} (use the asymptotic policy for other levels)"
            )));
        }
        let table = match policy {
            TestPolicy::Auto { table, reps, seed } => match table {
                Some(t) if t.d == d && t.n == n => t.clone(),
                _ => calibrate_percentiles(d, n, *reps, *seed)?,
            },
            TestPolicy::AutoCachedOnly { table } => match table {
                Some(t) if t.d == d && t.n == n => t.clone(),
                _ => {
                    return Err(Error::Config(format!(
                        "no calibrated percentiles for (d = {d}, n = {n}) and \
                         calibration is disabled"
                    )))
                }
            },
            TestPolicy::Asymptotic => unreachable!(),
        };
        let p = table.percentile(alpha)?;
        // divide by the sigma the percentiles were scaled with
        (table.sigma, p, CriticalSource::Calibrated, Some(table))
    } else {
        let sigma = sigma_pi_default(d).map(Ok).unwrap_or_else(|| {
            // beyond the shipped table: estimate once at moderate cost
            estimate_sigma_pi(d, 2000, 5000, 0)
        })?;
        (
            sigma,
            normal_two_sided_quantile(alpha),
            CriticalSource::Asymptotic,
            None,
        )
    };
    let z_n = test_statistic(auk_hat, n, &sigma);

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value_asymptotic = 2.0 * (1.0 - normal.cdf(z_n.abs()));
    Ok(TestReport {
        n,
        d,
        auk_hat,
        z_n,
        sigma,
        critical_value,
        critical_source,
        alpha,
        reject: z_n.abs() > critical_value,
        p_value_asymptotic,
        calibration,
    })
}
