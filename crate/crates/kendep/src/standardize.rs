//! Monotone polynomial standardizers mapping the raw index I to I*.
//!
//! The standardized index is calibrated so that equicorrelated normal
//! dependence maps I onto |rho|. No closed form exists; degree-5
//! approximations are built in for d = 2 and d = 3, and any other dimension
//! is calibrated by Monte Carlo: estimate I at rho = (0, 0.4, 0.8, 0.95,
//! 0.99, 1), pin the endpoints to (0,0) and (1,1), and fit a monotone
//! polynomial of degree 7 through the points (I(rho_j), rho_j).
//!
//! The monotone fit is a convex QP: least squares on the points plus a tiny
//! curvature penalty (the tie-breaker when six points under-determine eight
//! coefficients), subject to nonnegative derivative on a 2049-point grid of
//! [0, 1], solved by a primal active-set method started from the identity
//! polynomial, which is feasible. Afterwards the constant term is removed
//! and the coefficients rescaled so that phi(0) = 0 and phi(1) = 1 exactly.

use crate::distributions::{sample_equicorrelated_normal, EquicorrelatedSpec};
use crate::orthant::{auk_vector, index_i};
use crate::rng::{stream_rng, streams};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Polynomial degree of every standardizer.
pub const PHI_DEGREE: usize = 7;
/// Grid resolution for the derivative constraints; dense enough that a
/// degree-7 polynomial cannot dip negative between adjacent points
/// unnoticed.
pub const MONOTONE_GRID: usize = 2049;
/// rho grid of the calibration procedure, endpoints pinned by definition.
pub const CALIBRATION_RHO: [f64; 6] = [0.0, 0.4, 0.8, 0.95, 0.99, 1.0];
/// Default Monte Carlo parameters for calibration (sample size, replicates
/// per rho). The procedure itself leaves them free; these defaults are
/// recorded in the provenance of every calibrated standardizer.
pub const DEFAULT_CALIBRATION_N: usize = 2000;
pub const DEFAULT_CALIBRATION_REPS: usize = 50;

/// Where a standardizer came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiProvenance {
    Builtin,
    /// Fitted to plug-in index estimates averaged over finite samples.
    Calibrated {
        seed: u64,
        n: usize,
        reps: usize,
    },
    /// Fitted to population index values (exact Gaussian cdf, Monte Carlo
    /// only over the outer expectation).
    CalibratedPopulation {
        seed: u64,
        draws: usize,
    },
}

/// A monotone degree-7 polynomial with phi(0) = 0 and phi(1) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizerPhi {
    d: usize,
    /// Coefficients, constant term first.
    coefficients: [f64; PHI_DEGREE + 1],
    provenance: PhiProvenance,
}

impl StandardizerPhi {
    pub fn from_parts(
        d: usize,
        coefficients: [f64; PHI_DEGREE + 1],
        provenance: PhiProvenance,
    ) -> Result<Self> {
        let phi = StandardizerPhi {
            d,
            coefficients,
            provenance,
        };
        phi.validate()?;
        Ok(phi)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[f64; PHI_DEGREE + 1] {
        &self.coefficients
    }

    pub fn provenance(&self) -> PhiProvenance {
        self.provenance
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for &c in self.coefficients.iter().rev() {
            v = v * t + c;
        }
        v
    }

    fn derivative_at(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for j in (1..=PHI_DEGREE).rev() {
            v = v * t + j as f64 * self.coefficients[j];
        }
        v
    }

    /// Endpoint pins to 1e-9 and derivative >= 0 on the 2049-point grid
    /// (up to a small slack for rounding in the normalized coefficients).
    pub fn validate(&self) -> Result<()> {
        if self.eval(0.0).abs() > 1e-9 {
            return Err(Error::Fit(format!("phi(0) = {} != 0", self.eval(0.0))));
        }
        if (self.eval(1.0) - 1.0).abs() > 1e-9 {
            return Err(Error::Fit(format!("phi(1) = {} != 1", self.eval(1.0))));
        }
        for i in 0..MONOTONE_GRID {
            let t = i as f64 / (MONOTONE_GRID - 1) as f64;
            let dv = self.derivative_at(t);
            if dv < -1e-8 {
                return Err(Error::Fit(format!(
                    "derivative {dv} < 0 at grid point t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Built-in standardizers, d = 2 and d = 3 only. Other dimensions must be
/// calibrated.
pub fn phi_builtin(d: usize) -> Result<StandardizerPhi> {
    let coefficients = match d {
        2 => [0.0, 2.070, 0.061, -2.471, 1.307, 0.033, 0.0, 0.0],
        3 => [0.0, 1.62, 4.45, -13.48, 12.13, -3.72, 0.0, 0.0],
        _ => {
            return Err(Error::Config(format!(
                "no built-in standardizer for d = {d}; run calibration instead"
            )))
        }
    };
    StandardizerPhi::from_parts(d, coefficients, PhiProvenance::Builtin)
}

/// Monte Carlo index values on a rho grid, with the parameters that
/// produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoIndexGrid {
    pub rho: Vec<f64>,
    pub index: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Average of the estimated index over `reps` samples of size `n` from the
/// equicorrelated d-normal with correlation `rho`.
pub fn mc_index_for_equicorrelated_normal(
    d: usize,
    rho: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    if reps == 0 || n == 0 {
        return Err(Error::Domain("n and reps must be positive".into()));
    }
    let spec = EquicorrelatedSpec::new(d, rho)?; // validates the rho range
    let values: Vec<Result<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let sample = sample_equicorrelated_normal(
                &spec,
                n,
                seed ^ (rep as u64).wrapping_mul(0x9e37_79b9),
            )?;
            Ok(index_i(&auk_vector(&sample)?))
        })
        .collect();
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum / reps as f64)
}

/// Least-squares monotone polynomial of degree 7 through `points`
/// (x strictly increasing in `[0,1]`, containing (0,0) and (1,1)).
pub fn fit_monotone_polynomial(points: &[(f64, f64)]) -> Result<[f64; PHI_DEGREE + 1]> {
    if points.len() < 4 {
        return Err(Error::Fit("need at least 4 points".into()));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Fit("x values must be strictly increasing".into()));
        }
    }
    let has = |x: f64, y: f64| {
        points
            .iter()
            .any(|&(a, b)| (a - x).abs() < 1e-12 && (b - y).abs() < 1e-12)
    };
    if !has(0.0, 0.0) || !has(1.0, 1.0) {
        return Err(Error::Fit("points must include (0,0) and (1,1)".into()));
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    if ys.iter().all(|&y| (y - ys[0]).abs() < 1e-12) {
        return Err(Error::Fit("all y values equal; fit is degenerate".into()));
    }

    let m = PHI_DEGREE + 1;
    let k = points.len();
    let mut a = DMatrix::zeros(k, m);
    let mut y = DVector::zeros(k);
    for (r, &(px, py)) in points.iter().enumerate() {
        let mut pw = 1.0;
        for c in 0..m {
            a[(r, c)] = pw;
            pw *= px;
        }
        y[r] = py;
    }
    // derivative rows on the grid
    let grid: Vec<f64> = (0..MONOTONE_GRID)
        .map(|i| i as f64 / (MONOTONE_GRID - 1) as f64)
        .collect();
    let mut deriv = DMatrix::zeros(MONOTONE_GRID, m);
    for (r, &t) in grid.iter().enumerate() {
        for j in 1..m {
            deriv[(r, j)] = j as f64 * t.powi(j as i32 - 1);
        }
    }
    // curvature Gram matrix: int_0^1 p''(t)^2 dt
    let mut gram = DMatrix::zeros(m, m);
    for j in 2..m {
        for l in 2..m {
            gram[(j, l)] = (j * l * (j - 1) * (l - 1)) as f64 / (j + l - 3) as f64;
        }
    }
    const CURVATURE: f64 = 1e-6;
    const RIDGE: f64 = 1e-9;
    let mut h = 2.0 * (a.transpose() * &a + CURVATURE * gram);
    for i in 0..m {
        h[(i, i)] += 2.0 * RIDGE;
    }
    let b = 2.0 * a.transpose() * y;

    let coefficients = active_set_qp(&h, &b, &deriv)?;

    // normalize: subtract the constant term, divide by the coefficient sum
    let mut c = coefficients;
    c[0] = 0.0;
    let sum: f64 = c.iter().sum();
    if sum.abs() < 1e-10 {
        return Err(Error::Fit("fitted polynomial is constant".into()));
    }
    let mut out = [0.0; PHI_DEGREE + 1];
    for (o, v) in out.iter_mut().zip(c.iter()) {
        *o = v / sum;
    }
    Ok(out)
}

/// Primal active-set QP: minimize (1/2) c'Hc - b'c subject to Dc >= 0,
/// starting from the identity polynomial, which satisfies Dc = 1 > 0.
/// Iterates remain feasible throughout.
fn active_set_qp(h: &DMatrix<f64>, b: &DVector<f64>, d: &DMatrix<f64>) -> Result<[f64; 8]> {
    let m = h.ncols();
    let mut c = DVector::zeros(m);
    c[1] = 1.0;
    let mut working: Vec<usize> = Vec::new();
    for _ in 0..600 {
        // equality-constrained optimum on the working set via KKT
        let k = working.len();
        let mut kkt = DMatrix::zeros(m + k, m + k);
        kkt.view_mut((0, 0), (m, m)).copy_from(h);
        for (r, &idx) in working.iter().enumerate() {
            for col in 0..m {
                kkt[(m + r, col)] = d[(idx, col)];
                kkt[(col, m + r)] = d[(idx, col)];
            }
        }
        let mut rhs = DVector::zeros(m + k);
        rhs.rows_mut(0, m).copy_from(b);
        let svd = kkt.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Numeric(format!("KKT solve failed: {e}")))?;
        let target = sol.rows(0, m).into_owned();
        let multipliers = sol.rows(m, k).into_owned();

        let step = &target - &c;
        if step.amax() < 1e-12 {
            // at the working-set optimum; drop a constraint with a
            // negative multiplier or stop
            if k == 0 {
                break;
            }
            let (worst, &lambda) = multipliers
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .unwrap();
            if lambda >= -1e-9 {
                break;
            }
            working.remove(worst);
            continue;
        }
        // longest feasible step toward the target
        let mut alpha = 1.0;
        let mut blocking = None;
        let dc = d * &c;
        let dp = d * &step;
        for i in 0..d.nrows() {
            if dp[i] < -1e-14 && !working.contains(&i) {
                let ratio = (dc[i] / -dp[i]).max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        c += alpha * step;
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    let mut out = [0.0; 8];
    for (o, v) in out.iter_mut().zip(c.iter()) {
        *o = *v;
    }
    Ok(out)
}

/// Calibrate a standardizer for dimension d from plug-in index estimates:
/// Monte Carlo average of the estimated index at the standard rho grid,
/// endpoints pinned, monotone degree-7 fit. Deterministic given the seed.
///
/// The plug-in index is biased low at moderate-to-strong dependence for
/// finite n (the bias grows with the dimension), so the fitted map drifts
/// with the choice of n; [`calibrate_phi_population`] removes that knob.
pub fn calibrate_phi(d: usize, n: usize, reps: usize, seed: u64) -> Result<StandardizerPhi> {
    let grid = calibration_grid(d, n, reps, seed)?;
    let points: Vec<(f64, f64)> = grid
        .index
        .iter()
        .copied()
        .zip(grid.rho.iter().copied())
        .collect();
    let coefficients = fit_monotone_polynomial(&points)?;
    StandardizerPhi::from_parts(d, coefficients, PhiProvenance::Calibrated { seed, n, reps })
}

/// Default draw count for the population calibration.
pub const DEFAULT_POPULATION_DRAWS: usize = 200_000;

/// Calibrate a standardizer against population index values of the
/// equicorrelated normal family (no empirical-cdf plug-in, hence no
/// finite-n bias). Deterministic given the seed.
pub fn calibrate_phi_population(d: usize, draws: usize, seed: u64) -> Result<StandardizerPhi> {
    if d < 2 {
        return Err(Error::Domain(format!("d = {d} must be >= 2")));
    }
    let mut points = Vec::with_capacity(CALIBRATION_RHO.len());
    for (j, &rho) in CALIBRATION_RHO.iter().enumerate() {
        let value = if rho == 0.0 {
            0.0
        } else if rho == 1.0 {
            1.0
        } else {
            population_index_equicorrelated(d, rho, draws, seed.wrapping_add(j as u64))?
        };
        points.push((value, rho));
    }
    let coefficients = fit_monotone_polynomial(&points)?;
    StandardizerPhi::from_parts(
        d,
        coefficients,
        PhiProvenance::CalibratedPopulation { seed, draws },
    )
}

/// Population index of the equicorrelated d-normal at correlation rho in
/// (0, 1): every rotation's probability integral transform is evaluated
/// with the exact cdf (the shared-factor representation collapses the
/// d-dimensional orthant probability to a one-dimensional Gauss-Hermite
/// quadrature), and only the outer expectation is Monte Carlo.
pub fn population_index_equicorrelated(d: usize, rho: f64, draws: usize, seed: u64) -> Result<f64> {
    if !(0.0 < rho && rho < 1.0) {
        return Err(Error::Domain(format!(
            "population index quadrature requires 0 < rho < 1, got {rho}"
        )));
    }
    if d < 2 || draws == 0 {
        return Err(Error::Domain("need d >= 2 and draws >= 1".into()));
    }
    let (nodes, weights) = crate::numeric::gauss_hermite(48);
    let patterns = 1usize << d;
    let sqrt_rho = rho.sqrt();
    let sqrt_comp = (1.0 - rho).sqrt();
    let law = crate::kendall::ProductKendallLaw::new(d)?;
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal");
    use rayon::prelude::*;
    use statrs::distribution::ContinuousCDF;

    const CHUNK: usize = 4096;
    let chunks = draws.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, streams::PHI_CALIBRATION, chunk as u64);
            let take = CHUNK.min(draws - chunk * CHUNK);
            let mut sums = vec![0.0; patterns];
            let mut x = vec![0.0; d];
            let mut t = vec![0.0; patterns];
            for _ in 0..take {
                use rand_distr::Distribution;
                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                for xm in x.iter_mut() {
                    let e: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    *xm = sqrt_rho * z + sqrt_comp * e;
                }
                t.iter_mut().for_each(|v| *v = 0.0);
                // T_s(x) = int phi(z') prod_i Phi(s_i (x_i - sqrt(rho) z') / sqrt(1-rho)) dz'
                for (&node, &weight) in nodes.iter().zip(&weights) {
                    let zq = std::f64::consts::SQRT_2 * node;
                    // subset products over the per-coordinate cdf values
                    let mut prods = vec![1.0; patterns];
                    for (m, &xm) in x.iter().enumerate() {
                        let a = (xm - sqrt_rho * zq) / sqrt_comp;
                        let plus = normal.cdf(a);
                        let minus = 1.0 - plus;
                        let half = 1usize << m;
                        for s in (0..patterns).rev() {
                            prods[s] *= if s & half == 0 { plus } else { minus };
                        }
                    }
                    for (ts, p) in t.iter_mut().zip(&prods) {
                        *ts += weight * p;
                    }
                }
                let norm = std::f64::consts::PI.sqrt();
                for (sum, &ts) in sums.iter_mut().zip(t.iter()) {
                    *sum += 1.0 - law.cdf((ts / norm).clamp(0.0, 1.0))?;
                }
            }
            Ok(sums)
        })
        .collect();

    let mut auk = vec![0.0; patterns];
    for partial in partials {
        let partial = partial?;
        for (a, p) in auk.iter_mut().zip(partial) {
            *a += p;
        }
    }
    let mut ss = Vec::with_capacity(patterns);
    for a in auk {
        let mean = a / draws as f64;
        ss.push((mean - 0.5) * (mean - 0.5));
    }
    ss.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(crate::orthant::normalizing_constant(d) * ss.iter().sum::<f64>().sqrt())
}

/// The Monte Carlo grid behind [`calibrate_phi`], exposed for reporting.
pub fn calibration_grid(d: usize, n: usize, reps: usize, seed: u64) -> Result<RhoIndexGrid> {
    if d < 2 {
        return Err(Error::Domain(format!("d = {d} must be >= 2")));
    }
    let mut index = Vec::with_capacity(CALIBRATION_RHO.len());
    for (j, &rho) in CALIBRATION_RHO.iter().enumerate() {
        // I(0) = 0 and I(1) = 1 by definition; only the interior needs MC
        let value = if rho == 0.0 {
            0.0
        } else if rho == 1.0 {
            1.0
        } else {
            let sub = seed
                .wrapping_mul(0x0100_0000_01b3)
                .wrapping_add(streams::PHI_CALIBRATION)
                .wrapping_add(j as u64);
            mc_index_for_equicorrelated_normal(d, rho, n, reps, sub)?
        };
        index.push(value);
    }
    Ok(RhoIndexGrid {
        rho: CALIBRATION_RHO.to_vec(),
        index,
        n,
        reps,
        seed,
    })
}

/// I* = phi(min(I, 1)), clamped into [0, 1].
pub fn index_i_star(index: f64, phi: &StandardizerPhi) -> f64 {
    phi.eval(index.min(1.0)).clamp(0.0, 1.0)
}
