//! The command implementations behind the CLI surface, usable directly as
//! library functions (the acceptance suite drives them without a process
//! boundary).

use crate::cache::CalibrationCache;
use crate::csvio::{sample_to_csv, Dataset};
use crate::error::{CliError, Result};
use kendep::diagnostics::{classify_class_membership, kendall_curves_all, ClassDecision};
use kendep::independence::{
    calibrate_percentiles, estimate_sigma_pi, run_independence_test, TestPolicy, TestReport,
};
use kendep::kendall::kendall_tau_pairwise;
use kendep::standardize::{
    calibrate_phi, calibrate_phi_population, DEFAULT_CALIBRATION_N, DEFAULT_CALIBRATION_REPS,
    DEFAULT_POPULATION_DRAWS,
};
use kendep::{
    auk_vector, classify_level, index_i, index_i_star, phi_builtin, DependenceLevel, Sample,
    StandardizerPhi,
};
use serde::Serialize;
use serde_json::json;

/// Which calibration produces a missing standardizer.
#[derive(Debug, Clone, Copy)]
pub enum PhiMethod {
    /// Population index values via the exact Gaussian cdf (default: no
    /// plug-in bias, so the fitted map does not drift with a sample size).
    Population { draws: usize },
    /// Finite-sample plug-in averages (sample size n, reps per rho).
    EcdfAverage { n: usize, reps: usize },
}

impl Default for PhiMethod {
    fn default() -> Self {
        PhiMethod::Population {
            draws: DEFAULT_POPULATION_DRAWS,
        }
    }
}

/// How a standardizer is obtained for a given dimension.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhiPolicy {
    /// Refuse to calibrate on a cache miss for d > 3 when set.
    pub no_calibration: bool,
    pub seed: u64,
    pub method: PhiMethod,
}

impl PhiPolicy {
    pub fn allow_calibration(&self) -> bool {
        !self.no_calibration
    }

    /// The finite-sample method with its standard parameters.
    pub fn ecdf_default() -> PhiMethod {
        PhiMethod::EcdfAverage {
            n: DEFAULT_CALIBRATION_N,
            reps: DEFAULT_CALIBRATION_REPS,
        }
    }
}

/// Standardizer for dimension d: built-in for d in {2, 3}, otherwise the
/// cache, otherwise fresh calibration when the policy allows it.
pub fn resolve_phi(
    d: usize,
    cache: &mut CalibrationCache,
    policy: &PhiPolicy,
) -> Result<(StandardizerPhi, bool)> {
    if d == 2 || d == 3 {
        return Ok((phi_builtin(d).map_err(CliError::Stat)?, false));
    }
    if let Some(phi) = cache.phi_for(d) {
        return Ok((phi.clone(), false));
    }
    if !policy.allow_calibration() {
        return Err(CliError::Config(format!(
            "no standardizer for d = {d} in the cache and calibration is disabled; \
             run `kendep calibrate --dim {d}` first"
        )));
    }
    let phi = match policy.method {
        PhiMethod::Population { draws } => {
            calibrate_phi_population(d, draws, policy.seed).map_err(CliError::Stat)?
        }
        PhiMethod::EcdfAverage { n, reps } => {
            calibrate_phi(d, n, reps, policy.seed).map_err(CliError::Stat)?
        }
    };
    cache.set_phi(phi.clone());
    Ok((phi, true))
}

/// Index results for one column subset.
#[derive(Debug, Clone, Serialize)]
pub struct SubvectorResult {
    pub columns: Vec<String>,
    pub index: f64,
    pub index_star: f64,
    pub level: DependenceLevel,
    pub index_exceeds_one: bool,
    /// Origin of the standardizer behind `index_star`.
    pub phi: kendep::PhiProvenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall_tau: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct IndexResults {
    pub full: SubvectorResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subvectors: Vec<SubvectorResult>,
}

fn subvector_result(
    sample: &Sample,
    names: &[String],
    cols: &[usize],
    phi: &StandardizerPhi,
) -> Result<SubvectorResult> {
    let sub = if cols.len() == sample.d() {
        sample.clone()
    } else {
        sample.select_columns(cols).map_err(CliError::Stat)?
    };
    let auk = auk_vector(&sub).map_err(CliError::Stat)?;
    let index = index_i(&auk);
    let index_star = index_i_star(index, phi);
    let kendall_tau = if sub.d() == 2 {
        Some(kendall_tau_pairwise(&sub.column(0), &sub.column(1)).map_err(CliError::Stat)?)
    } else {
        None
    };
    Ok(SubvectorResult {
        columns: cols.iter().map(|&c| names[c].to_string()).collect(),
        index,
        index_star,
        level: classify_level(index_star),
        index_exceeds_one: index > 1.0,
        phi: phi.provenance(),
        kendall_tau,
    })
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance the combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + d - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Indices for the full vector, plus every 2- and 3-column subvector when
/// `subvectors` is set. Kendall tau accompanies every bivariate result.
pub fn cmd_index(
    dataset: &Dataset,
    subvectors: bool,
    cache: &mut CalibrationCache,
    phi_policy: &PhiPolicy,
) -> Result<IndexResults> {
    let d = dataset.sample.d();
    let (phi_full, _) = resolve_phi(d, cache, phi_policy)?;
    let all: Vec<usize> = (0..d).collect();
    let full = subvector_result(&dataset.sample, &dataset.columns, &all, &phi_full)?;
    let mut subs = Vec::new();
    if subvectors {
        for k in [2usize, 3] {
            if k >= d {
                continue;
            }
            let (phi_k, _) = resolve_phi(k, cache, phi_policy)?;
            for cols in combinations(d, k) {
                subs.push(subvector_result(
                    &dataset.sample,
                    &dataset.columns,
                    &cols,
                    &phi_k,
                )?);
            }
        }
    }
    Ok(IndexResults {
        full,
        subvectors: subs,
    })
}

/// Options for the total-independence test command.
#[derive(Debug, Clone)]
pub struct TestOptions {
    pub alpha: f64,
    /// Force the asymptotic critical value regardless of sample size.
    pub asymptotic: bool,
    /// Calibrate missing percentile tables (and persist them).
    pub allow_calibration: bool,
    pub reps: usize,
    pub seed: u64,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            alpha: 0.05,
            asymptotic: false,
            allow_calibration: true,
            reps: 10_000,
            seed: 0,
        }
    }
}

/// Run the test, consulting and updating the percentile cache.
pub fn cmd_test(
    dataset: &Dataset,
    options: &TestOptions,
    cache: &mut CalibrationCache,
) -> Result<TestReport> {
    let d = dataset.sample.d();
    let n = dataset.sample.n();
    let policy = if options.asymptotic {
        TestPolicy::Asymptotic
    } else {
        let cached = cache.percentiles_for(d, n).cloned();
        let needs_fresh = cached.is_none() && n <= kendep::independence::large_sample_threshold(d);
        if needs_fresh && !options.allow_calibration {
            return Err(CliError::Config(format!(
                "no calibrated percentiles for (d = {d}, n = {n}) in the cache and \
                 calibration is disabled; run `kendep calibrate --dim {d} -n {n}`"
            )));
        }
        if needs_fresh {
            let table =
                calibrate_percentiles(d, n, options.reps, options.seed).map_err(CliError::Stat)?;
            cache.set_percentiles(table.clone());
            TestPolicy::AutoCachedOnly { table: Some(table) }
        } else {
            TestPolicy::AutoCachedOnly { table: cached }
        }
    };
    run_independence_test(&dataset.sample, options.alpha, &policy).map_err(CliError::Stat)
}

/// Parameters for the calibrate command.
#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub d: usize,
    /// Sample size for a percentile table; `None` skips percentiles.
    pub n: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Replicates and sample size for the sigma estimate.
    pub sigma_reps: usize,
    pub sigma_n: usize,
    /// Calibration method for the standardizer.
    pub phi_method: PhiMethod,
}

impl CalibrateOptions {
    pub fn new(d: usize) -> Self {
        CalibrateOptions {
            d,
            n: None,
            reps: 10_000,
            seed: 0,
            sigma_reps: 2000,
            sigma_n: 5000,
            phi_method: PhiMethod::default(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CalibrateResults {
    pub d: usize,
    pub sigma: kendep::independence::SigmaPi,
    pub phi_coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percentiles: Option<kendep::independence::CalibrationTable>,
}

/// Calibrate sigma, the standardizer, and optionally a percentile table
/// for one dimension; persists everything into the cache.
pub fn cmd_calibrate(
    options: &CalibrateOptions,
    cache: &mut CalibrationCache,
) -> Result<CalibrateResults> {
    let d = options.d;
    let sigma = estimate_sigma_pi(d, options.sigma_reps, options.sigma_n, options.seed)
        .map_err(CliError::Stat)?;
    cache.set_sigma(sigma);
    let phi = match options.phi_method {
        PhiMethod::Population { draws } => {
            calibrate_phi_population(d, draws, options.seed).map_err(CliError::Stat)?
        }
        PhiMethod::EcdfAverage { n, reps } => {
            calibrate_phi(d, n, reps, options.seed).map_err(CliError::Stat)?
        }
    };
    cache.set_phi(phi.clone());
    let percentiles = match options.n {
        Some(n) => {
            let table =
                calibrate_percentiles(d, n, options.reps, options.seed).map_err(CliError::Stat)?;
            cache.set_percentiles(table.clone());
            Some(table)
        }
        None => None,
    };
    Ok(CalibrateResults {
        d,
        sigma,
        phi_coefficients: phi.coefficients().to_vec(),
        percentiles,
    })
}

/// Simulation output: the sample as CSV plus the spec echo.
pub fn cmd_simulate(sample: &Sample) -> String {
    let columns: Vec<String> = (1..=sample.d()).map(|j| format!("x{j}")).collect();
    sample_to_csv(sample, &columns)
}

#[derive(Debug, Serialize)]
pub struct KplotResults {
    pub decision: ClassDecision,
    pub curve_rows: usize,
}

/// Kendall curves for all rotations as long-format CSV
/// (pattern_index, t, k_emp, k_pi) plus the class decision.
pub fn cmd_kplot(
    dataset: &Dataset,
    grid_size: usize,
    tolerance: Option<f64>,
) -> Result<(String, KplotResults)> {
    let curves = kendall_curves_all(&dataset.sample, grid_size).map_err(CliError::Stat)?;
    let decision =
        classify_class_membership(&dataset.sample, tolerance, grid_size).map_err(CliError::Stat)?;
    let mut csv = String::from("pattern_index,t,k_emp,k_pi\n");
    let mut rows = 0usize;
    for curve in &curves {
        for ((t, e), r) in curve
            .grid
            .iter()
            .zip(&curve.empirical)
            .zip(&curve.reference)
        {
            csv.push_str(&format!("{},{},{},{}\n", curve.pattern.index(), t, e, r));
            rows += 1;
        }
    }
    Ok((
        csv,
        KplotResults {
            decision,
            curve_rows: rows,
        },
    ))
}

/// Echoed dataset metadata for report envelopes.
pub fn dataset_inputs(dataset: &Dataset) -> serde_json::Value {
    json!({
        "source": dataset.source,
        "n": dataset.sample.n(),
        "d": dataset.sample.d(),
        "columns": dataset.columns,
    })
}
