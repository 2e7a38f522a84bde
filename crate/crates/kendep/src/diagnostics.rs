//! Kendall curves per rotation and the class-membership check.
//!
//! Plotting the empirical Kendall cdf of every rotated sample against the
//! product law tells where the index is a genuine measure of dependence: if
//! at least one curve never crosses the reference the distribution is in
//! class 1 (index zero iff independent); if at least two curves lie below
//! it the distribution is in class 2 (index bounded by one, comonotone
//! vectors at the bound). The published rule is visual; here it is
//! quantized with an explicit tolerance band, defaulting to the 95% DKW
//! band sqrt(ln(2/0.05) / (2n)), and the witnessing rotation indices are
//! reported so borderline cases can be inspected.

use crate::kendall::empirical_kendall_cdf;
use crate::kendall::ProductKendallLaw;
use crate::orthant::{orthant_pseudo_obs_all_rotations, SignPattern};
use crate::{Error, Result, Sample};
use serde::{Deserialize, Serialize};

/// Default curve grid resolution (t = 0 excluded: the reference density is
/// singular there).
pub const DEFAULT_GRID: usize = 512;

/// One rotation's empirical Kendall cdf against the product-law reference
/// on a shared grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KendallCurve {
    pub pattern: SignPattern,
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
}

fn curve_grid(grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 16 {
        return Err(Error::Domain(format!(
            "grid_size = {grid_size} must be >= 16"
        )));
    }
    Ok((1..=grid_size)
        .map(|i| i as f64 / grid_size as f64)
        .collect())
}

/// The curve of a single rotation.
pub fn kendall_curve(
    sample: &Sample,
    pattern: &SignPattern,
    grid_size: usize,
) -> Result<KendallCurve> {
    let all = kendall_curves_all(sample, grid_size)?;
    all.into_iter()
        .nth(pattern.index())
        .ok_or_else(|| Error::Config("pattern index out of range".into()))
}

/// Curves for all 2^d rotations from a single dominance pass.
pub fn kendall_curves_all(sample: &Sample, grid_size: usize) -> Result<Vec<KendallCurve>> {
    let grid = curve_grid(grid_size)?;
    let law = ProductKendallLaw::new(sample.d())?;
    let reference: Vec<f64> = grid.iter().map(|&t| law.cdf(t)).collect::<Result<_>>()?;
    let pseudo = orthant_pseudo_obs_all_rotations(sample)?;
    let patterns = crate::orthant::sign_patterns(sample.d())?;
    patterns
        .into_iter()
        .zip(pseudo)
        .map(|(pattern, p)| {
            let empirical: Vec<f64> = grid
                .iter()
                .map(|&t| empirical_kendall_cdf(&p, t))
                .collect::<Result<_>>()?;
            Ok(KendallCurve {
                pattern,
                grid: grid.clone(),
                empirical,
                reference: reference.clone(),
            })
        })
        .collect()
}

/// Outcome of the class-membership check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassDecision {
    pub in_class_one: bool,
    pub in_class_two: bool,
    /// Rotations whose curve stays on one side of the reference (up to the
    /// tolerance band).
    pub one_sided_witnesses: Vec<usize>,
    /// Rotations whose curve stays below the reference.
    pub below_witnesses: Vec<usize>,
    pub tolerance: f64,
    pub grid_size: usize,
}

/// 95% Dvoretzky-Kiefer-Wolfowitz band half-width, the default tolerance.
pub fn dkw_tolerance(n: usize) -> f64 {
    ((2.0 / 0.05f64).ln() / (2.0 * n as f64)).sqrt()
}

/// Check class membership: class 1 needs one curve of constant sign
/// relative to the reference, class 2 needs two curves below it.
/// `tolerance = None` uses the DKW default.
pub fn classify_class_membership(
    sample: &Sample,
    tolerance: Option<f64>,
    grid_size: usize,
) -> Result<ClassDecision> {
    let tolerance = tolerance.unwrap_or_else(|| dkw_tolerance(sample.n()));
    if tolerance < 0.0 {
        return Err(Error::Domain("tolerance must be >= 0".into()));
    }
    let curves = kendall_curves_all(sample, grid_size)?;
    let mut one_sided = Vec::new();
    let mut below = Vec::new();
    for (j, curve) in curves.iter().enumerate() {
        let mut always_above = true;
        let mut always_below = true;
        for (e, r) in curve.empirical.iter().zip(&curve.reference) {
            let diff = e - r;
            if diff < -tolerance {
                always_above = false;
            }
            if diff > tolerance {
                always_below = false;
            }
        }
        if always_above || always_below {
            one_sided.push(j);
        }
        if always_below {
            below.push(j);
        }
    }
    Ok(ClassDecision {
        in_class_one: !one_sided.is_empty(),
        in_class_two: below.len() >= 2,
        one_sided_witnesses: one_sided,
        below_witnesses: below,
        tolerance,
        grid_size,
    })
}
