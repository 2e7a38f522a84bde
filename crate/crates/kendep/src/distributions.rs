//! Seeded samplers for every distribution used in the simulations and
//! examples: equicorrelated and general multivariate normals, Archimedean
//! copulas via the Marshall-Olkin frailty construction, two trivariate
//! F-G-M copulas via conditional inverses, and the bivariate families of
//! the power study.
//!
//! Every sampler is a pure function of (spec, n, seed): identical inputs
//! produce identical samples on any thread count.

use crate::rng::{stream_rng, streams};
use crate::{Error, Result, Sample};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

/// Equicorrelated covariance spec: unit diagonal, constant off-diagonal.
/// Positive semidefinite exactly when (1-d)^{-1} <= rho <= 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrelatedSpec {
    d: usize,
    rho: f64,
}

impl EquicorrelatedSpec {
    pub fn new(d: usize, rho: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("d = {d} must be >= 2")));
        }
        let lower = 1.0 / (1.0 - d as f64);
        if !(lower..=1.0).contains(&rho) {
            return Err(Error::Domain(format!(
                "rho = {rho} outside [{lower}, 1]: the equicorrelated matrix is not \
                 positive semidefinite for d = {d}"
            )));
        }
        Ok(EquicorrelatedSpec { d, rho })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// n draws from N_d(0, Sigma_d(rho)).
pub fn sample_equicorrelated_normal(
    spec: &EquicorrelatedSpec,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    let d = spec.d;
    if spec.rho == 1.0 {
        // exactly comonotone rows on the boundary
        let mut rng = stream_rng(seed, streams::SAMPLER, 0);
        let mut values = Vec::with_capacity(n * d);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.extend(std::iter::repeat_n(z, d));
        }
        return Sample::from_flat(values, n, d);
    }
    let mut sigma = DMatrix::from_element(d, d, spec.rho);
    for i in 0..d {
        sigma[(i, i)] = 1.0;
    }
    sample_gaussian_with_factor(&sigma, n, seed)
}

/// n draws from N_d(0, Sigma) for a symmetric PSD Sigma with unit diagonal.
pub fn sample_general_normal(sigma_rows: &[Vec<f64>], n: usize, seed: u64) -> Result<Sample> {
    let d = sigma_rows.len();
    if d < 2 {
        return Err(Error::Domain("covariance must be at least 2x2".into()));
    }
    if sigma_rows.iter().any(|r| r.len() != d) {
        return Err(Error::Domain("covariance matrix must be square".into()));
    }
    let sigma = DMatrix::from_fn(d, d, |i, j| sigma_rows[i][j]);
    for i in 0..d {
        if (sigma[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("covariance diagonal must be 1".into()));
        }
        for j in 0..d {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 {
                return Err(Error::Domain("covariance must be symmetric".into()));
            }
        }
    }
    sample_gaussian_with_factor(&sigma, n, seed)
}

/// Factor Sigma = Q diag(lambda) Q' by symmetric eigendecomposition (valid
/// on the singular boundary) and push standard normals through.
fn sample_gaussian_with_factor(sigma: &DMatrix<f64>, n: usize, seed: u64) -> Result<Sample> {
    let d = sigma.ncols();
    let eigen = sigma.clone().symmetric_eigen();
    let mut factor = eigen.eigenvectors.clone();
    for (c, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda < -1e-8 {
            return Err(Error::Domain(format!(
                "covariance is not positive semidefinite (eigenvalue {lambda})"
            )));
        }
        let s = lambda.max(0.0).sqrt();
        for r in 0..d {
            factor[(r, c)] *= s;
        }
    }
    let mut rng = stream_rng(seed, streams::SAMPLER, 0);
    let mut values = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for i in 0..n {
        for zm in z.iter_mut() {
            *zm = StandardNormal.sample(&mut rng);
        }
        for m in 0..d {
            let mut acc = 0.0;
            for (c, zc) in z.iter().enumerate() {
                acc += factor[(m, c)] * zc;
            }
            values[i * d + m] = acc;
        }
    }
    Sample::from_flat(values, n, d)
}

/// Archimedean families sampled through their frailty laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchimedeanFamily {
    Clayton,
    Frank,
    Gumbel,
    Joe,
}

/// An Archimedean copula spec (family, parameter, dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    pub family: ArchimedeanFamily,
    pub theta: f64,
    pub d: usize,
}

impl CopulaSpec {
    pub fn new(family: ArchimedeanFamily, theta: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("d = {d} must be >= 2")));
        }
        let ok = match family {
            ArchimedeanFamily::Clayton => theta > 0.0,
            // the frailty construction requires a completely monotone
            // generator, hence theta > 0 for Frank in any dimension
            ArchimedeanFamily::Frank => theta > 0.0,
            ArchimedeanFamily::Gumbel | ArchimedeanFamily::Joe => theta >= 1.0,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "parameter theta = {theta} invalid for {family:?}"
            )));
        }
        Ok(CopulaSpec { family, theta, d })
    }
}

/// n draws with uniform margins via the frailty construction:
/// V from the family law, U_i = psi(E_i / V) with E_i standard exponential.
pub fn sample_archimedean(spec: &CopulaSpec, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = stream_rng(seed, streams::SAMPLER, 0);
    let theta = spec.theta;
    let d = spec.d;
    let mut values = Vec::with_capacity(n * d);
    // Clayton's gamma frailty is the only one with a reusable distribution
    let gamma = match spec.family {
        ArchimedeanFamily::Clayton => Some(
            Gamma::new(1.0 / theta, 1.0)
                .map_err(|e| Error::Domain(format!("gamma frailty: {e}")))?,
        ),
        _ => None,
    };
    for _ in 0..n {
        let v: f64 = match spec.family {
            ArchimedeanFamily::Clayton => gamma.as_ref().unwrap().sample(&mut rng),
            ArchimedeanFamily::Gumbel => positive_stable(1.0 / theta, &mut rng),
            ArchimedeanFamily::Frank => log_series(1.0 - (-theta).exp(), &mut rng) as f64,
            ArchimedeanFamily::Joe => sibuya(1.0 / theta, &mut rng) as f64,
        };
        for _ in 0..d {
            let e: f64 = Exp1.sample(&mut rng);
            let t = e / v;
            let u = match spec.family {
                ArchimedeanFamily::Clayton => (1.0 + t).powf(-1.0 / theta),
                ArchimedeanFamily::Gumbel => (-t.powf(1.0 / theta)).exp(),
                ArchimedeanFamily::Frank => {
                    // psi(t) = -ln(1 - (1 - e^{-theta}) e^{-t}) / theta
                    let shrink = (1.0 - (-theta).exp()) * (-t).exp();
                    -(-shrink).ln_1p() / theta
                }
                ArchimedeanFamily::Joe => 1.0 - (1.0 - (-t).exp()).powf(1.0 / theta),
            };
            values.push(u.clamp(0.0, 1.0));
        }
    }
    Sample::from_flat(values, n, d)
}

/// One-sided positive stable variate with Laplace transform exp(-s^alpha),
/// 0 < alpha <= 1 (Kanter's representation).
fn positive_stable(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let v = rng.random::<f64>() * std::f64::consts::PI;
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * v).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * v).sin()
        / v.sin().powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

/// Logarithmic-series variate with parameter p in (0, 1) (Kemp's method).
fn log_series(p: f64, rng: &mut ChaCha8Rng) -> u64 {
    let c = (1.0 - p).ln();
    let v = rng.random::<f64>();
    if v >= p {
        return 1;
    }
    let u = rng.random::<f64>();
    let q = 1.0 - (c * u).exp();
    if v <= q * q {
        let k = 1.0 + v.ln() / q.ln();
        return k.max(1.0) as u64;
    }
    if v <= q {
        2
    } else {
        1
    }
}

/// Sibuya(alpha) variate, 0 < alpha <= 1, via the survival identity
/// 1 - F(n) = 1 / (n B(n, 1 - alpha)).
fn sibuya(alpha: f64, rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = rng.random();
    if u <= alpha {
        return 1;
    }
    let v = 1.0 - u;
    let g = (v * ln_gamma(1.0 - alpha).exp()).powf(-1.0 / alpha);
    let floor = g.floor().max(1.0);
    // survival at the candidate integer
    let ln_surv = ln_gamma(floor + 1.0 - alpha) - ln_gamma(floor + 1.0) - ln_gamma(1.0 - alpha);
    if v < ln_surv.exp() {
        g.ceil() as u64
    } else {
        floor as u64
    }
}

/// The two trivariate F-G-M copulas: the theta-term couples either the
/// first pair of coordinates or all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgmVariant {
    /// C_theta(u) = u1 u2 u3 {1 + theta (1-u1)(1-u2)}
    Pair,
    /// C~_theta(u) = u1 u2 u3 {1 + theta (1-u1)(1-u2)(1-u3)}
    Triple,
}

/// n draws (d = 3) via the conditional-inverse construction: the first
/// coordinate solves a quadratic whose admissible root is the one in `[0,1]`.
pub fn sample_fgm(variant: FgmVariant, theta: f64, n: usize, seed: u64) -> Result<Sample> {
    if theta.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "|theta| = {} exceeds 1",
            theta.abs()
        )));
    }
    let mut rng = stream_rng(seed, streams::SAMPLER, 0);
    let mut values = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        let x3: f64 = rng.random();
        let alpha = match variant {
            FgmVariant::Pair => theta * (2.0 * x2 - 1.0),
            FgmVariant::Triple => -theta * (2.0 * x2 - 1.0) * (2.0 * x3 - 1.0),
        };
        let u1 = fgm_conditional_inverse(alpha, x1)?;
        values.extend_from_slice(&[u1, x2, x3]);
    }
    Sample::from_flat(values, n, 3)
}

/// Invert F(u) = alpha u^2 + (1 - alpha) u at the quantile q: both
/// quadratic roots are formed and the single one inside [0,1] is kept.
fn fgm_conditional_inverse(alpha: f64, q: f64) -> Result<f64> {
    if alpha.abs() < 1e-12 {
        return Ok(q);
    }
    let disc = ((1.0 - alpha) * (1.0 - alpha) + 4.0 * alpha * q).sqrt();
    let r1 = (alpha - 1.0 - disc) / (2.0 * alpha);
    let r2 = (alpha - 1.0 + disc) / (2.0 * alpha);
    let tol = 1e-12;
    let ok1 = (-tol..=1.0 + tol).contains(&r1);
    let ok2 = (-tol..=1.0 + tol).contains(&r2);
    match (ok1, ok2) {
        (true, false) => Ok(r1.clamp(0.0, 1.0)),
        (false, true) => Ok(r2.clamp(0.0, 1.0)),
        _ => Err(Error::Numeric(format!(
            "conditional inverse root selection ambiguous: alpha = {alpha}, q = {q}, \
             roots = ({r1}, {r2})"
        ))),
    }
}

/// Bivariate families of the power study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BivariateFamily {
    /// Uniform on the unit circle: (Z1, Z2)/||Z||.
    CircleUniform,
    /// Marshall-Olkin style exponential pair with a shared shock
    /// (requires lambda12 < min(lambda1, lambda2)).
    Exponential {
        lambda1: f64,
        lambda2: f64,
        lambda12: f64,
    },
    /// F-G-M conditional pair; alpha > 0 (values above 1 leave the copula
    /// family but still define a distribution).
    Morgenstern { alpha: f64 },
    /// Plackett-type pair, s > 1. The recipe scales the conditional
    /// inverse by a U-dependent factor, so the second margin is not
    /// uniform; the first is. (The unscaled inverse gives the classical
    /// Plackett copula but a visibly different small-sample power
    /// profile; this family is the one the reference power table uses.)
    Plackett { s: f64 },
    /// Two-parameter conditional family of Ali-Mikhail-Haq type;
    /// a > 0, 0 < p < 1.
    AliHaq { a: f64, p: f64 },
    /// Gumbel's bivariate exponential conditional recipe, e > 0.
    GumbelExponential { e: f64 },
    /// Bivariate Student t, 5 degrees of freedom, Sigma = `[[1,1],[1,4]]`.
    StudentT5,
    /// (X, eps / X^2) with X, eps independent N(5, 1).
    InverseSquareNoise,
    /// (X, X / eps) with X ~ N(2, 1), eps ~ N(5, 1) independent.
    RatioNoise,
}

impl BivariateFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            BivariateFamily::Exponential {
                lambda1,
                lambda2,
                lambda12,
            } => {
                if lambda1 <= 0.0 || lambda2 <= 0.0 || lambda12 <= 0.0 {
                    return Err(Error::Domain("exponential rates must be positive".into()));
                }
                if lambda12 >= lambda1.min(lambda2) {
                    return Err(Error::Domain(format!(
                        "lambda12 = {lambda12} must be < min(lambda1, lambda2) = {}",
                        lambda1.min(lambda2)
                    )));
                }
            }
            BivariateFamily::Morgenstern { alpha } => {
                if alpha <= 0.0 {
                    return Err(Error::Domain("alpha must be > 0".into()));
                }
            }
            BivariateFamily::Plackett { s } => {
                if s <= 1.0 {
                    return Err(Error::Domain("Plackett requires s > 1".into()));
                }
            }
            BivariateFamily::AliHaq { a, p } => {
                if a <= 0.0 || !(0.0..1.0).contains(&p) || p == 0.0 {
                    return Err(Error::Domain("requires a > 0 and 0 < p < 1".into()));
                }
            }
            BivariateFamily::GumbelExponential { e } if e <= 0.0 => {
                return Err(Error::Domain("e must be > 0".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// n draws from a bivariate family.
pub fn sample_bivariate_family(family: BivariateFamily, n: usize, seed: u64) -> Result<Sample> {
    family.validate()?;
    let mut rng = stream_rng(seed, streams::SAMPLER, 0);
    let mut values = Vec::with_capacity(n * 2);
    match family {
        BivariateFamily::CircleUniform => {
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let r = z1.hypot(z2);
                values.extend_from_slice(&[z1 / r, z2 / r]);
            }
        }
        BivariateFamily::Exponential {
            lambda1,
            lambda2,
            lambda12,
        } => {
            for _ in 0..n {
                let raw: [f64; 3] = [
                    Exp1.sample(&mut rng),
                    Exp1.sample(&mut rng),
                    Exp1.sample(&mut rng),
                ];
                let e1 = raw[0] / (lambda1 - lambda12);
                let e2 = raw[1] / (lambda2 - lambda12);
                let e3 = raw[2] / lambda12;
                values.push(e1.min(e3) - 1.0 / lambda1);
                values.push(e2.min(e3) - 1.0 / lambda2);
            }
        }
        BivariateFamily::Morgenstern { alpha } => {
            for _ in 0..n {
                let x: f64 = rng.random();
                let u: f64 = rng.random();
                let s = 2.0 * x - 1.0;
                let z = alpha * s - 1.0;
                let w = 1.0 - 2.0 * alpha * s + alpha * alpha * s * s + 4.0 * alpha * u * s;
                let y = 2.0 * u / (w.max(0.0).sqrt() - z);
                values.extend_from_slice(&[x, y]);
            }
        }
        BivariateFamily::Plackett { s } => {
            for _ in 0..n {
                let x: f64 = rng.random();
                let u: f64 = rng.random();
                let w1 = u * (1.0 - u);
                let w2 = s + w1 * (s - 1.0) * (s - 1.0);
                let w3 = 2.0 * w1 * (s * s * x + 1.0 - x) + s * (1.0 - 2.0 * w1);
                let w4 = s * (s + 4.0 * (1.0 - s) * (1.0 - s) * x * (1.0 - x) * w1);
                let y = w2 * (w3 - (1.0 - 2.0 * u) * w4.sqrt()) / 2.0;
                values.extend_from_slice(&[x, y]);
            }
        }
        BivariateFamily::AliHaq { a, p } => {
            for _ in 0..n {
                let x: f64 = rng.random();
                let u: f64 = rng.random();
                let v = 1.0 - x;
                let w1 = a * (2.0 * v * u + 1.0) + 2.0 * a * a * v * v * u + 1.0;
                let w2 = a * a * (4.0 * v * v * u - 4.0 * v * u + 1.0)
                    + a * (4.0 * v * u - 4.0 * p + 2.0)
                    + 1.0;
                let y = 2.0 * u * (a * v - 1.0) * (a * v - 1.0) / (w1 + w2.max(0.0).sqrt());
                values.extend_from_slice(&[x, y]);
            }
        }
        BivariateFamily::GumbelExponential { e } => {
            for _ in 0..n {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let u3: f64 = rng.random();
                let u4: f64 = rng.random();
                let x = -u1.ln();
                let w1 = 1.0 + e * x;
                let w2 = (w1 - e) / w1;
                let w3 = -u2.ln();
                let y = if u3 < w2 {
                    w1 * w3
                } else {
                    w1 * (w3 - u4.ln())
                };
                values.extend_from_slice(&[x, y]);
            }
        }
        BivariateFamily::StudentT5 => {
            // Sigma = [[1,1],[1,4]]; Cholesky factor [[1,0],[1,sqrt(3)]]
            let sqrt3 = 3f64.sqrt();
            let chi2 = Gamma::new(2.5, 2.0).expect("valid chi-square(5)");
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let w: f64 = chi2.sample(&mut rng);
                let scale = (5.0 / w).sqrt();
                values.push(z1 * scale);
                values.push((z1 + sqrt3 * z2) * scale);
            }
        }
        BivariateFamily::InverseSquareNoise => {
            for _ in 0..n {
                let zx: f64 = StandardNormal.sample(&mut rng);
                let ze: f64 = StandardNormal.sample(&mut rng);
                let (x, eps) = (5.0 + zx, 5.0 + ze);
                values.extend_from_slice(&[x, eps / (x * x)]);
            }
        }
        BivariateFamily::RatioNoise => {
            for _ in 0..n {
                let zx: f64 = StandardNormal.sample(&mut rng);
                let ze: f64 = StandardNormal.sample(&mut rng);
                let (x, eps) = (2.0 + zx, 5.0 + ze);
                values.extend_from_slice(&[x, x / eps]);
            }
        }
    }
    Sample::from_flat(values, n, 2)
}
