//! Sign rounding of correlated Gaussians and its exact expected value.
//!
//! Given a solved Gram matrix, draw one jointly normal vector with that
//! covariance and assign each variable the sign of its coordinate. A
//! constraint holds after rounding when its three (sign-adjusted) Gaussians
//! agree in sign, which has the closed-form probability
//! `kappa = 1 - (acos r1 + acos r2 + acos r3) / (2 pi)` in the signed
//! correlations — the doubled orthant identity, used directly instead of
//! summing two orthant calls.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::csp::{Assignment, Instance};
use crate::error::{Error, Result};
use crate::exec;
use crate::gaussian::{clamped_acos, Covariance, McEstimate, MvnSampler};
use crate::sdp::recover_abcd;

/// Constraints with SDP contribution at or below this floor are excluded
/// from the worst-ratio statistic; the ratio is only meaningful for
/// positively weighted constraints.
pub const LAMBDA_FLOOR: f64 = 1e-9;

/// Closed-form rounding analysis of one Gram matrix against one instance.
#[derive(Debug, Clone, Serialize)]
pub struct RoundingReport {
    /// Expected fraction of satisfied constraints under Gaussian rounding.
    pub expected_value_closed_form: f64,
    /// Per-constraint satisfaction probability `kappa`.
    pub per_constraint_kappa: Vec<f64>,
    /// Per-constraint SDP contribution `lambda`.
    pub per_constraint_lambda: Vec<f64>,
    /// Smallest `kappa/lambda` over constraints with `lambda > LAMBDA_FLOOR`;
    /// `None` when no constraint clears the floor.
    pub min_ratio: Option<f64>,
    /// Monte-Carlo cross-check, when one was run.
    pub empirical: Option<McEstimate>,
}

impl RoundingReport {
    pub fn with_empirical(mut self, estimate: McEstimate) -> Self {
        self.empirical = Some(estimate);
        self
    }
}

fn check_dims(inst: &Instance, gram: &DMatrix<f64>) -> Result<()> {
    if gram.nrows() != inst.n || gram.ncols() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: gram.nrows(),
        });
    }
    Ok(())
}

fn signs_to_assignment(values: &DVector<f64>) -> Assignment {
    Assignment {
        values: values.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect(),
    }
}

/// One draw of the Gaussian rounding: sample `N(0, X)` and take signs.
pub fn round_gaussian<R: Rng + ?Sized>(
    inst: &Instance,
    gram: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Assignment> {
    check_dims(inst, gram)?;
    let cov = Covariance::correlation(gram.clone())?;
    let sampler = MvnSampler::new(&cov)?;
    Ok(signs_to_assignment(&sampler.sample(rng)))
}

/// Splits a Gram matrix into row vectors `V` with `V V^T = X`, via the
/// symmetric eigendecomposition with negative eigenvalues clamped to zero.
pub fn gram_factors(gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cov = Covariance::new(gram.clone())?;
    let eigen = cov.matrix().clone().symmetric_eigen();
    let mut factors = eigen.eigenvectors.clone();
    for (idx, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda < crate::gaussian::PSD_TOL {
            return Err(Error::NotPsd(lambda));
        }
        factors.column_mut(idx).scale_mut(lambda.max(0.0).sqrt());
    }
    Ok(factors)
}

/// One draw of hyperplane rounding: a single standard normal direction `g`,
/// and `x_i = sign(<g, v_i>)` for the rows `v_i` of `factors`.
///
/// Distributionally identical to [`round_gaussian`] when `V V^T` equals the
/// Gram matrix; the rows must be unit vectors.
pub fn round_hyperplane<R: Rng + ?Sized>(
    inst: &Instance,
    factors: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Assignment> {
    if factors.nrows() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: factors.nrows(),
        });
    }
    for row in 0..factors.nrows() {
        let norm = factors.row(row).norm_squared();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::FactorMismatch { row, norm });
        }
    }
    let g = DVector::from_fn(factors.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(signs_to_assignment(&(factors * g)))
}

/// Satisfaction probability of one constraint from its three signed
/// correlations, by the doubled orthant identity. Correlations within
/// round-off of `+-1` are clamped before the arccosine.
fn kappa_of(rho: [f64; 3]) -> Result<f64> {
    crate::gaussian::check_correlation_triple(rho[0], rho[1], rho[2])?;
    let sum: f64 = rho.into_iter().map(clamped_acos).sum();
    let kappa = 1.0 - sum / (2.0 * std::f64::consts::PI);
    Ok(kappa.clamp(0.0, 1.0))
}

/// Signed correlation triple of a constraint under a Gram matrix: entry
/// products pick up the product of the two polarities.
fn signed_correlations(c: &crate::csp::Constraint, gram: &DMatrix<f64>) -> [f64; 3] {
    let [i, j, k] = c.vars;
    let [si, sj, sk] = c.signs.map(f64::from);
    [
        si * sj * gram[(i, j)],
        sj * sk * gram[(j, k)],
        si * sk * gram[(i, k)],
    ]
}

/// Exact expected rounded value and the per-constraint ratio analysis.
pub fn expected_value_closed_form(inst: &Instance, gram: &DMatrix<f64>) -> Result<RoundingReport> {
    check_dims(inst, gram)?;
    if inst.constraints.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let mut kappas = Vec::with_capacity(inst.constraints.len());
    let mut lambdas = Vec::with_capacity(inst.constraints.len());
    for c in &inst.constraints {
        let rho = signed_correlations(c, gram);
        kappas.push(kappa_of(rho)?);
        // recover_abcd of the signed correlations puts the constraint's own
        // weight first.
        lambdas.push(recover_abcd(rho[0], rho[1], rho[2])[0]);
    }
    let expected = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let min_ratio = kappas
        .iter()
        .zip(&lambdas)
        .filter(|(_, &l)| l > LAMBDA_FLOOR)
        .map(|(&k, &l)| k / l)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))));
    Ok(RoundingReport {
        expected_value_closed_form: expected,
        per_constraint_kappa: kappas,
        per_constraint_lambda: lambdas,
        min_ratio,
        empirical: None,
    })
}

const TRIAL_BLOCK: u64 = 4096;

/// Monte-Carlo mean of `evaluate` over independent Gaussian roundings, with
/// one ChaCha stream per trial block and index-ordered reduction; the result
/// depends only on the seed (see [`empirical_round_seq`]).
pub fn empirical_round(
    inst: &Instance,
    gram: &DMatrix<f64>,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    empirical_round_impl(inst, gram, trials, seed, false)
}

/// Always-sequential twin of [`empirical_round`]; same streams, same result.
pub fn empirical_round_seq(
    inst: &Instance,
    gram: &DMatrix<f64>,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    empirical_round_impl(inst, gram, trials, seed, true)
}

fn empirical_round_impl(
    inst: &Instance,
    gram: &DMatrix<f64>,
    trials: u64,
    seed: u64,
    sequential: bool,
) -> Result<McEstimate> {
    check_dims(inst, gram)?;
    if inst.constraints.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let cov = Covariance::correlation(gram.clone())?;
    let sampler = MvnSampler::new(&cov)?;
    let (blocks, last) = exec::block_layout(trials, TRIAL_BLOCK);
    let worker = |b: usize| -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let len = if b as u64 + 1 == blocks { last } else { TRIAL_BLOCK };
        let dim = sampler.dim();
        let mut scratch = DVector::zeros(dim);
        let mut gauss = DVector::zeros(dim);
        let mut values = vec![0i8; dim];
        let m = inst.constraints.len() as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..len {
            sampler.sample_into(&mut rng, &mut scratch, &mut gauss);
            for (v, &z) in values.iter_mut().zip(gauss.iter()) {
                *v = if z >= 0.0 { 1 } else { -1 };
            }
            let sat = inst
                .constraints
                .iter()
                .filter(|c| {
                    let [i, j, k] = c.vars;
                    let a = c.signs[0] * values[i];
                    let b2 = c.signs[1] * values[j];
                    let d = c.signs[2] * values[k];
                    a == b2 && b2 == d
                })
                .count();
            let value = sat as f64 / m;
            sum += value;
            sum_sq += value * value;
        }
        (sum, sum_sq)
    };
    let partials = if sequential {
        exec::map_blocks_seq(blocks as usize, worker)
    } else {
        exec::map_blocks(blocks as usize, worker)
    };
    let (sum, sum_sq) = partials
        .into_iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(McEstimate::from_sums(sum, sum_sq, trials))
}
