//! Sign rotations, the one-pass orthant dominance counter, the AUK vector,
//! the normalizing constant and the index of mutual dependence.
//!
//! Negating any subset of coordinates permutes the set of 2^d rotated
//! samples, so the vector D of per-rotation AUK values is a rank statistic
//! of the data that is equivariant under sign flips. The index
//!
//!   I = c_d ||D - (1/2, ..., 1/2)||,   c_d = (2^{d-2} - 2^{1-d} + 2^{1-2d})^{-1/2}
//!
//! is 0 at the independence reference point and exactly 1 for comonotone
//! vectors, where two rotations have AUK 2^{-d} and the rest have AUK 1.
//!
//! The dominance counts for all rotations are accumulated in a single
//! O(n^2 d) pass: for an ordered pair (i, k), the coordinates where the
//! points differ force the sign of the rotation that can count the pair,
//! and each coordinate tie leaves the corresponding sign free, so the pair
//! contributes to exactly 2^{#ties} rotations. A tie-free pair lives in
//! exactly one orthant.

use crate::kendall::{Convention, ProductKendallLaw, PseudoObservations};
use crate::{Error, Result, Sample};
use serde::{Deserialize, Serialize};

/// Largest supported dimension for the 2^d rotation set.
pub const MAX_ROTATION_DIM: usize = 20;

/// One of the 2^d sign rotations; bit m of `index` set means coordinate m
/// is negated. Pattern 0 is the original data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    index: usize,
    d: usize,
}

impl SignPattern {
    pub fn new(index: usize, d: usize) -> Result<Self> {
        check_dim(d)?;
        if index >= (1 << d) {
            return Err(Error::Domain(format!(
                "pattern index {index} out of range for d = {d}"
            )));
        }
        Ok(SignPattern { index, d })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sign(&self, coordinate: usize) -> f64 {
        if self.index >> coordinate & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn signs(&self) -> Vec<f64> {
        (0..self.d).map(|m| self.sign(m)).collect()
    }

    /// The rotated sample diag(s) X.
    pub fn apply(&self, sample: &Sample) -> Result<Sample> {
        if sample.d() != self.d {
            return Err(Error::Config("pattern/sample dimension mismatch".into()));
        }
        sample.map_entries(|m, v| self.sign(m) * v)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if !(2..=MAX_ROTATION_DIM).contains(&d) {
        return Err(Error::Config(format!(
            "dimension d = {d} outside supported range 2..={MAX_ROTATION_DIM}"
        )));
    }
    Ok(())
}

/// All 2^d sign patterns in index order; pattern 0 is all-positive.
pub fn sign_patterns(d: usize) -> Result<Vec<SignPattern>> {
    check_dim(d)?;
    Ok((0..1usize << d)
        .map(|index| SignPattern { index, d })
        .collect())
}

/// One pass over the n^2 ordered pairs, handing each point's tally row to
/// the visitor: `row[s]` = #{k : rotated X_k <= rotated X_i under pattern
/// s}, the point itself included. Callers that only fold the rows (the AUK
/// vector) avoid holding all n * 2^d counts at once.
pub fn visit_orthant_counts(
    sample: &Sample,
    mut visit: impl FnMut(usize, &[u32]),
) -> Result<()> {
    let d = sample.d();
    check_dim(d)?;
    let n = sample.n();
    let patterns = 1usize << d;
    let x = sample.values();
    let mut row = vec![0u32; patterns];
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        row.iter_mut().for_each(|c| *c = 0);
        for k in 0..n {
            let xk = &x[k * d..(k + 1) * d];
            let mut forced = 0usize; // bits where the sign must be -
            let mut ties = 0usize; // bits free to take either sign
            for m in 0..d {
                if xk[m] < xi[m] {
                    // strict <= holds only with s_m = +1: leave bit clear
                } else if xk[m] > xi[m] {
                    forced |= 1 << m;
                } else {
                    ties |= 1 << m;
                }
            }
            // every submask of the tie set is admissible
            let mut sub = ties;
            loop {
                row[forced | sub] += 1;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & ties;
            }
        }
        visit(i, &row);
    }
    Ok(())
}

/// Dominance counts for every rotation, materialized as one
/// `counts[i * 2^d + s]` matrix.
pub fn orthant_counts(sample: &Sample) -> Result<Vec<u32>> {
    let n = sample.n();
    let patterns = 1usize << sample.d();
    let mut counts = vec![0u32; n * patterns];
    visit_orthant_counts(sample, |i, row| {
        counts[i * patterns..(i + 1) * patterns].copy_from_slice(row);
    })?;
    Ok(counts)
}

/// Include-self pseudo-observations for every rotation, in pattern order.
pub fn orthant_pseudo_obs_all_rotations(sample: &Sample) -> Result<Vec<PseudoObservations>> {
    let n = sample.n();
    let d = sample.d();
    let patterns = 1usize << d;
    let counts = orthant_counts(sample)?;
    let mut out = Vec::with_capacity(patterns);
    for s in 0..patterns {
        let values: Vec<f64> = (0..n)
            .map(|i| counts[i * patterns + s] as f64 / n as f64)
            .collect();
        out.push(PseudoObservations::from_parts(
            values,
            Convention::IncludeSelf,
            d,
        )?);
    }
    Ok(out)
}

/// The 2^d per-rotation AUK estimates, ordered by pattern index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AukVector {
    d: usize,
    auk: Vec<f64>,
}

impl AukVector {
    pub fn from_parts(d: usize, auk: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if auk.len() != 1 << d {
            return Err(Error::Domain(format!(
                "AUK vector must have 2^{d} entries, got {}",
                auk.len()
            )));
        }
        Ok(AukVector { d, auk })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[f64] {
        &self.auk
    }
}

/// Estimate the AUK of every rotation from a single dominance pass,
/// streaming the per-point tallies so memory stays O(n + 2^d).
pub fn auk_vector(sample: &Sample) -> Result<AukVector> {
    let n = sample.n();
    let d = sample.d();
    let patterns = 1usize << d;
    let law = ProductKendallLaw::new(d)?;
    let mut sums = vec![0.0f64; patterns];
    let mut failed = None;
    visit_orthant_counts(sample, |_, row| {
        for (sum, &c) in sums.iter_mut().zip(row) {
            match law.cdf(c as f64 / n as f64) {
                Ok(v) => *sum += v,
                Err(e) => failed = Some(e),
            }
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    let auk = sums.into_iter().map(|s| 1.0 - s / n as f64).collect();
    AukVector::from_parts(d, auk)
}

/// The constant c_d that pins the comonotone vector to index 1.
pub fn normalizing_constant(d: usize) -> f64 {
    let d = d as i32;
    (2f64.powi(d - 2) - 2f64.powi(1 - d) + 2f64.powi(1 - 2 * d)).powf(-0.5)
}

/// The index I = c_d ||D - Delta||, Delta = (1/2, ..., 1/2). Reported raw:
/// finite-sample values may exceed 1 outside the comonotone-bounded class.
///
/// Coordinate permutations and sign flips permute the AUK vector, so the
/// squared deviations are summed in sorted order to make the index
/// bit-identical under those symmetries.
pub fn index_i(auk: &AukVector) -> f64 {
    let mut sq: Vec<f64> = auk.auk.iter().map(|a| (a - 0.5) * (a - 0.5)).collect();
    sq.sort_by(|a, b| a.partial_cmp(b).expect("finite AUK entries"));
    let ss: f64 = sq.iter().sum();
    normalizing_constant(auk.d) * ss.sqrt()
}

/// Dependence levels of the standardized index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceLevel {
    Weak,
    Mild,
    Strong,
    VeryStrong,
}

impl std::fmt::Display for DependenceLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DependenceLevel::Weak => "weak",
            DependenceLevel::Mild => "mild",
            DependenceLevel::Strong => "strong",
            DependenceLevel::VeryStrong => "very strong",
        };
        f.write_str(s)
    }
}

/// Bin I* into [0,0.25) weak, [0.25,0.5) mild, [0.5,0.75) strong,
/// [0.75,1] very strong.
pub fn classify_level(i_star: f64) -> DependenceLevel {
    if i_star < 0.25 {
        DependenceLevel::Weak
    } else if i_star < 0.5 {
        DependenceLevel::Mild
    } else if i_star < 0.75 {
        DependenceLevel::Strong
    } else {
        DependenceLevel::VeryStrong
    }
}

/// The index, its standardized value, the level and the AUK vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependenceReport {
    pub index: f64,
    pub index_star: f64,
    pub level: DependenceLevel,
    pub auk_vector: AukVector,
    /// Raw index above 1: possible for finite samples outside the class
    /// where the upper bound is proved; flagged rather than clipped.
    pub index_exceeds_one: bool,
}

/// Full report for a sample given a standardizer of matching dimension.
pub fn dependence_report(
    sample: &Sample,
    phi: &crate::standardize::StandardizerPhi,
) -> Result<DependenceReport> {
    if phi.d() != sample.d() {
        return Err(Error::Config(format!(
            "standardizer is for d = {}, sample has d = {}",
            phi.d(),
            sample.d()
        )));
    }
    let auk = auk_vector(sample)?;
    let index = index_i(&auk);
    let index_star = crate::standardize::index_i_star(index, phi);
    Ok(DependenceReport {
        index,
        index_star,
        level: classify_level(index_star),
        auk_vector: auk,
        index_exceeds_one: index > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::multivariate_ecdf_at_points;
    use rand::Rng;

    #[test]
    fn pattern_guards_and_encoding() {
        assert_eq!(sign_patterns(2).unwrap().len(), 4);
        let p3 = sign_patterns(3).unwrap();
        assert_eq!(p3.len(), 8);
        assert_eq!(p3[7].signs(), vec![-1.0, -1.0, -1.0]);
        assert_eq!(p3[0].signs(), vec![1.0, 1.0, 1.0]);
        assert!(sign_patterns(21).is_err());
        assert!(sign_patterns(1).is_err());
    }

    #[test]
    fn hand_counts_two_points() {
        let s = Sample::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let pseudo = orthant_pseudo_obs_all_rotations(&s).unwrap();
        // pattern 0 = (+,+): T = (1/2, 1)
        assert_eq!(pseudo[0].values(), &[0.5, 1.0]);
        // pattern 2 = (+,-): flipped data {(0,0),(1,-1)}; only self dominates
        assert_eq!(pseudo[2].values(), &[0.5, 0.5]);
    }

    /// Brute-force oracle: recompute the ecdf of each explicitly flipped
    /// sample with the naive include-self counter.
    fn naive_rotation_pseudo(sample: &Sample) -> Vec<Vec<f64>> {
        sign_patterns(sample.d())
            .unwrap()
            .iter()
            .map(|p| {
                let flipped = p.apply(sample).unwrap();
                multivariate_ecdf_at_points(&flipped).values().to_vec()
            })
            .collect()
    }

    #[test]
    fn one_pass_equals_naive_oracle() {
        let mut rng = crate::rng::stream_rng(2024, 7, 0);
        for case in 0..200 {
            let n = rng.random_range(2..=50);
            let d = rng.random_range(2..=4);
            let with_ties = case % 2 == 0;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            let v = rng.random::<f64>();
                            if with_ties {
                                (v * 4.0).floor()
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect();
            let s = Sample::from_rows(&rows).unwrap();
            let fast = orthant_pseudo_obs_all_rotations(&s).unwrap();
            let naive = naive_rotation_pseudo(&s);
            for (p, (f, nv)) in fast.iter().zip(&naive).enumerate() {
                assert_eq!(f.values(), nv.as_slice(), "case {case} pattern {p}");
            }
        }
    }

    #[test]
    fn tie_free_pair_lives_in_one_orthant() {
        let mut rng = crate::rng::stream_rng(5, 7, 1);
        let d = 3;
        let n = 30;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        let s = Sample::from_rows(&rows).unwrap();
        let counts = orthant_counts(&s).unwrap();
        let patterns = 1usize << d;
        // row sums: self contributes to all 2^d patterns, every other
        // tie-free point to exactly one, so sum = 2^d + (n - 1)
        for i in 0..n {
            let sum: u32 = counts[i * patterns..(i + 1) * patterns].iter().sum();
            assert_eq!(sum as usize, patterns + (n - 1));
        }
    }

    #[test]
    fn normalizing_constant_values() {
        assert!((normalizing_constant(2) - (8f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!((normalizing_constant(3) - (32f64 / 57.0).sqrt()).abs() < 1e-15);
        let mut prev = normalizing_constant(2);
        for d in 3..=10 {
            let c = normalizing_constant(d);
            assert!(c < prev, "c_d must decrease: d={d}");
            prev = c;
        }
    }

    #[test]
    fn index_reference_points() {
        // D = Delta -> 0
        let auk = AukVector::from_parts(2, vec![0.5; 4]).unwrap();
        assert_eq!(index_i(&auk), 0.0);
        // ideal comonotone: two entries 2^{-d}, the rest 1 -> exactly 1
        for d in 2..=6 {
            let mut v = vec![1.0; 1 << d];
            v[0] = 2f64.powi(-(d as i32));
            v[(1 << d) - 1] = 2f64.powi(-(d as i32));
            let auk = AukVector::from_parts(d, v).unwrap();
            assert!((index_i(&auk) - 1.0).abs() < 1e-12, "d={d}");
        }
        // circle population: all four entries 11/16 - ln2/4
        let a = 11.0 / 16.0 - 2f64.ln() / 4.0;
        let auk = AukVector::from_parts(2, vec![a; 4]).unwrap();
        assert!((index_i(&auk) - 0.035_956_880_166_574_24).abs() < 1e-12);
    }

    #[test]
    fn level_bins() {
        assert_eq!(classify_level(0.0), DependenceLevel::Weak);
        assert_eq!(classify_level(0.25), DependenceLevel::Mild);
        assert_eq!(classify_level(0.499_999), DependenceLevel::Mild);
        assert_eq!(classify_level(0.561), DependenceLevel::Strong);
        assert_eq!(classify_level(0.75), DependenceLevel::VeryStrong);
        assert_eq!(classify_level(1.0), DependenceLevel::VeryStrong);
    }

    #[test]
    fn index_invariances_bitwise() {
        let mut rng = crate::rng::stream_rng(13, 7, 2);
        for _ in 0..20 {
            let n = rng.random_range(5..40);
            let d = rng.random_range(2..=4);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| (rng.random::<f64>() * 6.0).floor())
                        .collect()
                })
                .collect();
            let s = Sample::from_rows(&rows).unwrap();
            let base = index_i(&auk_vector(&s).unwrap());

            // coordinate permutation (rotate left)
            let perm: Vec<usize> = (0..d).map(|m| (m + 1) % d).collect();
            let sp = s.permute_columns(&perm).unwrap();
            assert_eq!(base.to_bits(), index_i(&auk_vector(&sp).unwrap()).to_bits());

            // strictly increasing transforms per coordinate
            let st = s
                .map_entries(|m, v| if m % 2 == 0 { 2.0 * v + 1.0 } else { v.exp() })
                .unwrap();
            assert_eq!(base.to_bits(), index_i(&auk_vector(&st).unwrap()).to_bits());

            // negating a subset of coordinates permutes D
            let flip = SignPattern::new(rng.random_range(0..(1 << d)), d).unwrap();
            let sf = flip.apply(&s).unwrap();
            assert_eq!(base.to_bits(), index_i(&auk_vector(&sf).unwrap()).to_bits());
        }
    }

    #[test]
    fn comonotone_index_grows_toward_one() {
        // exactly comonotone sample: I rises with n (0.739 at n=100, 0.947 at n=1000)
        let mut rng = crate::rng::stream_rng(21, 7, 3);
        let mut values = Vec::new();
        for &n in &[100usize, 1000] {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let v: f64 = rng.random();
                    vec![v, v, v]
                })
                .collect();
            let s = Sample::from_rows(&rows).unwrap();
            values.push(index_i(&auk_vector(&s).unwrap()));
        }
        assert!(values[1] > values[0]);
        assert!((values[0] - 0.739).abs() < 0.05, "n=100: {}", values[0]);
        assert!((values[1] - 0.947).abs() < 0.05, "n=1000: {}", values[1]);
    }
}
