//! Correlated Gaussian geometry: the closed-form trivariate orthant
//! probability, sampling from arbitrary PSD covariance matrices, and seeded
//! Monte-Carlo orthant estimation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Symmetry tolerance for covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues above this (negative) threshold are treated as zero; anything
/// below is rejected as genuinely indefinite.
pub const PSD_TOL: f64 = -1e-9;

/// A symmetric covariance matrix, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    matrix: DMatrix<f64>,
}

impl Covariance {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        assert_eq!(matrix.nrows(), matrix.ncols(), "covariance must be square");
        for i in 0..matrix.nrows() {
            for j in i + 1..matrix.ncols() {
                let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if diff > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(Self { matrix })
    }

    /// A covariance whose diagonal must additionally be 1 (a correlation /
    /// Gram matrix). Solver output carries up to 1e-6 of diagonal error.
    pub fn correlation(matrix: DMatrix<f64>) -> Result<Self> {
        for i in 0..matrix.nrows() {
            if (matrix[(i, i)] - 1.0).abs() > 1e-6 {
                return Err(Error::NotCorrelation {
                    index: i,
                    value: matrix[(i, i)],
                });
            }
        }
        Self::new(matrix)
    }

    /// `dim x dim` matrix with unit diagonal and constant off-diagonal `rho`.
    pub fn equicorrelated(dim: usize, rho: f64) -> Result<Self> {
        let mut m = DMatrix::from_element(dim, dim, rho);
        m.fill_diagonal(1.0);
        Self::new(m)
    }

    /// The 3x3 correlation matrix with `Cov(X,Y) = rho1`, `Cov(Y,Z) = rho2`,
    /// `Cov(X,Z) = rho3`, matching the argument order of
    /// [`trivariate_orthant`].
    pub fn correlation_triple(rho1: f64, rho2: f64, rho3: f64) -> Result<Self> {
        check_correlation_triple(rho1, rho2, rho3)?;
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = rho1;
        m[(1, 0)] = rho1;
        m[(1, 2)] = rho2;
        m[(2, 1)] = rho2;
        m[(0, 2)] = rho3;
        m[(2, 0)] = rho3;
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl McEstimate {
    /// Estimate from a sum and a sum of squares of `samples` observations.
    pub fn from_sums(sum: f64, sum_sq: f64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = sum / n;
        let std_error = if samples > 1 {
            let variance = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
            (variance / n).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            samples,
        }
    }

    /// Distance to `target` in units of the standard error.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

/// `Pr[X, Y, Z <= 0]` for standard normals with `Cov(X,Y) = rho1`,
/// `Cov(Y,Z) = rho2`, `Cov(X,Z) = rho3`:
/// `1/2 - (acos rho1 + acos rho2 + acos rho3) / (4 pi)`.
///
/// The triple must form a valid 3x3 correlation matrix; this is checked via
/// the determinant and leading minors, rejecting inputs outside the elliptope
/// where the formula is meaningless.
pub fn trivariate_orthant(rho1: f64, rho2: f64, rho3: f64) -> Result<f64> {
    check_correlation_triple(rho1, rho2, rho3)?;
    let sum = clamped_acos(rho1) + clamped_acos(rho2) + clamped_acos(rho3);
    let value = 0.5 - sum / (4.0 * std::f64::consts::PI);
    // Round-off can push an exact-boundary result marginally outside [0,1].
    Ok(if value < 0.0 && value > -1e-12 {
        0.0
    } else if value > 1.0 && value < 1.0 + 1e-12 {
        1.0
    } else {
        value
    })
}

pub(crate) fn check_correlation_triple(rho1: f64, rho2: f64, rho3: f64) -> Result<()> {
    let invalid = Error::InvalidCorrelationTriple(rho1, rho2, rho3);
    for r in [rho1, rho2, rho3] {
        if !r.is_finite() || r.abs() > 1.0 + 1e-12 {
            return Err(invalid);
        }
    }
    let det = 1.0 + 2.0 * rho1 * rho2 * rho3 - rho1 * rho1 - rho2 * rho2 - rho3 * rho3;
    if det < PSD_TOL {
        return Err(invalid);
    }
    Ok(())
}

/// `acos` with inputs clamped to `[-1, 1]`; rank-deficient Gram matrices
/// produce correlations that overshoot by round-off.
pub(crate) fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Sampler for `N(0, Sigma)` built from a symmetric eigendecomposition with
/// negative eigenvalues clamped to zero, so rank-deficient SDP output is
/// handled without a triangular factorization.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    factor: DMatrix<f64>,
}

impl MvnSampler {
    pub fn new(cov: &Covariance) -> Result<Self> {
        let eigen = cov.matrix.clone().symmetric_eigen();
        let mut scaled = eigen.eigenvectors.clone();
        for (idx, &lambda) in eigen.eigenvalues.iter().enumerate() {
            if lambda < PSD_TOL {
                return Err(Error::NotPsd(lambda));
            }
            let root = lambda.max(0.0).sqrt();
            scaled.column_mut(idx).scale_mut(root);
        }
        Ok(Self { factor: scaled })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// One draw of `N(0, Sigma)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor * z
    }

    /// Draw written into a caller-owned buffer, avoiding per-sample
    /// allocation in tight loops.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut DVector<f64>,
        out: &mut DVector<f64>,
    ) {
        for z in scratch.iter_mut() {
            *z = rng.sample::<f64, _>(StandardNormal);
        }
        self.factor.mul_to(scratch, out);
    }
}

/// One draw of `N(0, Sigma)`; builds the factorization internally, so prefer
/// [`MvnSampler`] for repeated draws.
pub fn sample_mvn<R: Rng + ?Sized>(cov: &Covariance, rng: &mut R) -> Result<DVector<f64>> {
    Ok(MvnSampler::new(cov)?.sample(rng))
}

const MC_BLOCK: u64 = 1 << 16;

/// Monte-Carlo estimate of `Pr[all coordinates <= 0]` under `N(0, Sigma)`.
///
/// Sampling runs over fixed-size blocks with one ChaCha stream per block and
/// an index-ordered reduction, so the estimate is reproducible for a given
/// seed regardless of thread count (and equal to [`mc_orthant_seq`]).
pub fn mc_orthant(cov: &Covariance, samples: u64, seed: u64) -> Result<McEstimate> {
    let sampler = MvnSampler::new(cov)?;
    let (blocks, last) = exec::block_layout(samples, MC_BLOCK);
    let hits = exec::map_blocks(blocks as usize, |b| {
        orthant_block(&sampler, b as u64, blocks, last, seed)
    });
    Ok(estimate_from_hits(&hits, samples))
}

/// Always-sequential twin of [`mc_orthant`]; same blocks, same streams, same
/// result.
pub fn mc_orthant_seq(cov: &Covariance, samples: u64, seed: u64) -> Result<McEstimate> {
    let sampler = MvnSampler::new(cov)?;
    let (blocks, last) = exec::block_layout(samples, MC_BLOCK);
    let hits = exec::map_blocks_seq(blocks as usize, |b| {
        orthant_block(&sampler, b as u64, blocks, last, seed)
    });
    Ok(estimate_from_hits(&hits, samples))
}

fn orthant_block(sampler: &MvnSampler, block: u64, blocks: u64, last: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let len = if block + 1 == blocks { last } else { MC_BLOCK };
    let dim = sampler.dim();
    let mut scratch = DVector::zeros(dim);
    let mut out = DVector::zeros(dim);
    let mut hits = 0u64;
    for _ in 0..len {
        sampler.sample_into(&mut rng, &mut scratch, &mut out);
        if out.iter().all(|&v| v <= 0.0) {
            hits += 1;
        }
    }
    hits
}

fn estimate_from_hits(hits: &[u64], samples: u64) -> McEstimate {
    let total: u64 = hits.iter().sum();
    // Bernoulli observations: the sum of squares equals the sum.
    McEstimate::from_sums(total as f64, total as f64, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_independent_and_degenerate() {
        assert!((trivariate_orthant(0.0, 0.0, 0.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((trivariate_orthant(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // Two perfectly anticorrelated coordinates force probability 0.
        assert_eq!(trivariate_orthant(-1.0, -1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn orthant_rejects_invalid_triples() {
        assert!(trivariate_orthant(0.9, 0.9, -0.9).is_err());
        assert!(trivariate_orthant(1.5, 0.0, 0.0).is_err());
        assert!(trivariate_orthant(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn orthant_complement_identity() {
        // 2 P[all <= 0] = 1 - (acos r1 + acos r2 + acos r3)/(2 pi), checked
        // across a grid of valid triples.
        let mut checked = 0usize;
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.05).collect();
        for &r1 in &grid {
            for &r2 in &grid {
                for &r3 in &grid {
                    if check_correlation_triple(r1, r2, r3).is_err() {
                        continue;
                    }
                    let p = trivariate_orthant(r1, r2, r3).unwrap();
                    let rhs =
                        1.0 - (r1.acos() + r2.acos() + r3.acos()) / (2.0 * std::f64::consts::PI);
                    assert!((2.0 * p - rhs).abs() < 1e-14);
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn orthant_against_monte_carlo() {
        let cov = Covariance::equicorrelated(3, 0.6).unwrap();
        let exact = trivariate_orthant(0.6, 0.6, 0.6).unwrap();
        // Independent oracle for the closed form, computed before freezing
        // the constant below.
        assert!((exact - 0.278_624_573_524_350_1).abs() < 1e-12);
        let est = mc_orthant(&cov, 2_000_000, 42).unwrap();
        assert!(
            est.sigmas_from(exact) <= 4.0,
            "MC {} vs closed form {exact} ({}σ)",
            est.mean,
            est.sigmas_from(exact)
        );
    }

    #[test]
    fn mc_orthant_identity_cases() {
        let est2 = mc_orthant(&Covariance::identity(2), 1_000_000, 1).unwrap();
        assert!(est2.sigmas_from(0.25) <= 4.0);
        let est3 = mc_orthant(&Covariance::identity(3), 1_000_000, 2).unwrap();
        assert!(est3.sigmas_from(0.125) <= 4.0);
    }

    #[test]
    fn mc_orthant_mixed_triple() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 0.3;
        m[(1, 0)] = 0.3;
        m[(1, 2)] = 0.5;
        m[(2, 1)] = 0.5;
        m[(0, 2)] = 0.2;
        m[(2, 0)] = 0.2;
        let cov = Covariance::new(m).unwrap();
        let exact = trivariate_orthant(0.3, 0.5, 0.2).unwrap();
        let est = mc_orthant(&cov, 1_000_000, 3).unwrap();
        assert!(est.sigmas_from(exact) <= 4.0);
    }

    #[test]
    fn mc_orthant_deterministic_and_matches_sequential() {
        let cov = Covariance::equicorrelated(3, 0.6).unwrap();
        let a = mc_orthant(&cov, 300_000, 9).unwrap();
        let b = mc_orthant(&cov, 300_000, 9).unwrap();
        let c = mc_orthant_seq(&cov, 300_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = mc_orthant(&cov, 300_000, 10).unwrap();
        assert_ne!(a.mean, d.mean);
    }

    #[test]
    fn sampler_standard_normal_moments() {
        let cov = Covariance::identity(2);
        let sampler = MvnSampler::new(&cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000usize;
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            for d in 0..2 {
                sums[d] += x[d];
                sq[d] += x[d] * x[d];
            }
        }
        for d in 0..2 {
            let mean = sums[d] / n as f64;
            let var = sq[d] / n as f64 - mean * mean;
            // std error of the mean is 1/sqrt(n); of the variance ~ sqrt(2/n).
            assert!(mean.abs() <= 4.0 / (n as f64).sqrt());
            assert!((var - 1.0).abs() <= 4.0 * (2.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn rank_one_covariance_collapses_coordinates() {
        let all_ones = DMatrix::from_element(4, 4, 1.0);
        let cov = Covariance::new(all_ones).unwrap();
        let sampler = MvnSampler::new(&cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = sampler.sample(&mut rng);
            for d in 1..4 {
                assert!((x[d] - x[0]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampler_ties_to_closed_form() {
        let cov = Covariance::equicorrelated(3, 0.6).unwrap();
        let sampler = MvnSampler::new(&cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            if x.iter().all(|&v| v <= 0.0) {
                hits += 1;
            }
        }
        let est = McEstimate::from_sums(hits as f64, hits as f64, n);
        let exact = trivariate_orthant(0.6, 0.6, 0.6).unwrap();
        assert!(est.sigmas_from(exact) <= 4.0);
    }

    #[test]
    fn empirical_covariance_matches_input() {
        let targets = [
            Covariance::identity(3),
            Covariance::new(DMatrix::from_element(3, 3, 1.0)).unwrap(),
            Covariance::equicorrelated(3, 0.6).unwrap(),
        ];
        for cov in &targets {
            let sampler = MvnSampler::new(cov).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let n = 400_000usize;
            let mut acc = DMatrix::zeros(3, 3);
            for _ in 0..n {
                let x = sampler.sample(&mut rng);
                acc += &x * x.transpose();
            }
            acc /= n as f64;
            for i in 0..3 {
                for j in 0..3 {
                    let rho = cov.matrix()[(i, j)];
                    // Var(X_i X_j) = 1 + rho^2 for unit-variance Gaussians.
                    let se = ((1.0 + rho * rho) / n as f64).sqrt();
                    assert!(
                        (acc[(i, j)] - rho).abs() <= 4.0 * se,
                        "entry ({i},{j}): {} vs {rho}",
                        acc[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 2.0;
        m[(1, 0)] = 2.0;
        let cov = Covariance::new(m).unwrap();
        assert!(matches!(MvnSampler::new(&cov), Err(Error::NotPsd(_))));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.5;
        assert!(matches!(
            Covariance::new(m),
            Err(Error::NotSymmetric { .. })
        ));
    }
}
