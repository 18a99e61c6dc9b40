//! The Gram-matrix SDP relaxation of MAX-3-EQUAL and an operator-splitting
//! solver for it.
//!
//! Per constrained triple `(i,j,k)` the relaxation carries four non-negative
//! weights summing to 1 whose signed combinations equal the three Gram
//! entries; the weight picked out by a constraint's polarities is its
//! objective contribution. That linear system is a scaled Hadamard matrix,
//! so the weights can be eliminated exactly: only the Gram matrix remains,
//! with four linear cuts per triple saying the recovered weights stay
//! non-negative (equivalently, `1 + s1 X_ij + s2 X_jk + s3 X_ik >= 0` for
//! every sign pattern with `s1 s2 s3 = +1`). Geometrically the cuts confine
//! each triple's Gram entries to the tetrahedron spanned by the four sign
//! vectors, and the weight map is a uniform scaling onto the standard
//! simplex, which gives a closed-form projection.
//!
//! The solver is a two-block ADMM: one block projects a consensus copy of
//! the Gram matrix onto the PSD cone (eigendecomposition) and each triple's
//! entries onto its tetrahedron; the other solves the entrywise-separable
//! quadratic with the unit diagonal pinned. The penalty parameter rescales
//! adaptively when the primal and dual residuals diverge by 10x.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::csp::Instance;
use crate::error::{Error, Result};

/// Recovers the four triple weights from the three Gram entries:
/// `(1 +- x_ij +- x_jk +- x_ik)/4` over the even sign patterns. The outputs
/// always sum to 1; they are non-negative exactly when the cuts hold.
pub fn recover_abcd(x_ij: f64, x_jk: f64, x_ik: f64) -> [f64; 4] {
    [
        (1.0 + x_ij + x_jk + x_ik) / 4.0,
        (1.0 + x_ij - x_jk - x_ik) / 4.0,
        (1.0 - x_ij + x_jk - x_ik) / 4.0,
        (1.0 - x_ij - x_jk + x_ik) / 4.0,
    ]
}

/// One constraint's objective term: the three unordered pairs of its triple
/// and the products of the corresponding polarities.
#[derive(Debug, Clone, Copy)]
struct ConstraintTerm {
    pairs: [(usize, usize); 3],
    signs: [f64; 3],
}

/// The assembled relaxation: a linear objective over Gram entries plus
/// per-triple tetrahedron cuts. Only triples that appear in constraints get
/// cuts; unconstrained triples never influence the objective or the
/// per-constraint rounding analysis.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    n: usize,
    /// Objective: `1/4 + sum w_pq X_pq` over unordered pairs `p < q`.
    pair_weights: Vec<(usize, usize, f64)>,
    /// Unique constrained triples, each contributing four cuts.
    triples: Vec<[usize; 3]>,
    terms: Vec<ConstraintTerm>,
}

/// Builds the relaxation for an instance. The objective is the mean over
/// constraints of `(1 + s_ij X_ij + s_jk X_jk + s_ik X_ik)/4` with
/// `s_pq` the product of the two polarities.
pub fn build(inst: &Instance) -> Result<SdpProblem> {
    if inst.constraints.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let m = inst.constraints.len() as f64;
    let mut weight_map: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let mut triples: Vec<[usize; 3]> = Vec::new();
    let mut seen: std::collections::BTreeSet<[usize; 3]> = Default::default();
    let mut terms = Vec::with_capacity(inst.constraints.len());
    for c in &inst.constraints {
        let [i, j, k] = c.vars;
        let [si, sj, sk] = c.signs.map(f64::from);
        let pairs = [(i, j), (j, k), (i, k)];
        let signs = [si * sj, sj * sk, si * sk];
        for (pair, sign) in pairs.iter().zip(signs) {
            *weight_map.entry(*pair).or_insert(0.0) += sign / (4.0 * m);
        }
        if seen.insert(c.vars) {
            triples.push(c.vars);
        }
        terms.push(ConstraintTerm { pairs, signs });
    }
    Ok(SdpProblem {
        n: inst.n,
        pair_weights: weight_map.into_iter().map(|((p, q), w)| (p, q, w)).collect(),
        triples,
        terms,
    })
}

impl SdpProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    /// Objective value of a Gram matrix: the mean of the per-constraint
    /// contributions. On a rank-one `+-1` Gram every contribution is exactly
    /// 0 or 1, so this reproduces the combinatorial value bit for bit.
    pub fn objective_of(&self, gram: &DMatrix<f64>) -> f64 {
        let lams = self.per_constraint_lambda(gram);
        lams.iter().sum::<f64>() / lams.len() as f64
    }

    /// Per-constraint objective contributions `(1 + sum signed entries)/4`.
    pub fn per_constraint_lambda(&self, gram: &DMatrix<f64>) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| {
                let s: f64 = t
                    .pairs
                    .iter()
                    .zip(t.signs)
                    .map(|(&(p, q), sign)| sign * gram[(p, q)])
                    .sum();
                (1.0 + s) / 4.0
            })
            .collect()
    }

    /// Worst cut value `min over triples, even sign patterns of
    /// 1 + s1 X_ij + s2 X_jk + s3 X_ik` (non-negative iff all cuts hold).
    pub fn min_cut(&self, gram: &DMatrix<f64>) -> f64 {
        self.triples
            .iter()
            .map(|&[i, j, k]| {
                let w = recover_abcd(gram[(i, j)], gram[(j, k)], gram[(i, k)]);
                4.0 * w.into_iter().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solver options; the defaults are adequate at desk scale.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub penalty: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 50_000,
            penalty: 1.0,
        }
    }
}

/// A solved relaxation: unit-diagonal PSD Gram matrix, objective, residual
/// diagnostics, and the per-constraint contributions.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub gram: DMatrix<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `max(0, -min cut)` on the returned Gram matrix.
    pub cut_violation: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub per_constraint_lambda: Vec<f64>,
}

/// Flat export format: Gram matrix row-major plus diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionExport {
    pub n: usize,
    pub gram_row_major: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub cut_violation: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub per_constraint_lambda: Vec<f64>,
}

impl SdpSolution {
    pub fn export(&self) -> SolutionExport {
        SolutionExport {
            n: self.gram.nrows(),
            gram_row_major: self.gram.transpose().as_slice().to_vec(),
            objective: self.objective,
            primal_residual: self.primal_residual,
            dual_residual: self.dual_residual,
            cut_violation: self.cut_violation,
            min_eigenvalue: self.min_eigenvalue,
            iterations: self.iterations,
            converged: self.converged,
            per_constraint_lambda: self.per_constraint_lambda.clone(),
        }
    }
}

/// Projects onto the standard simplex in R^4.
fn project_simplex4(w: [f64; 4]) -> [f64; 4] {
    let mut sorted = w;
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (idx, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (1.0 - cumulative) / (idx as f64 + 1.0);
        if u + candidate > 0.0 {
            theta = candidate;
        }
    }
    w.map(|u| (u + theta).max(0.0))
}

/// Projects a triple of Gram entries onto the cut tetrahedron. The weight
/// map scales distances uniformly, so projecting the weights onto the
/// simplex and mapping back is the exact Euclidean projection.
fn project_triple(x: [f64; 3]) -> [f64; 3] {
    let w = project_simplex4(recover_abcd(x[0], x[1], x[2]));
    [
        w[0] + w[1] - w[2] - w[3],
        w[0] - w[1] + w[2] - w[3],
        w[0] - w[1] - w[2] + w[3],
    ]
}

/// Projects a symmetric matrix onto the PSD cone, returning the projection
/// and the smallest eigenvalue seen.
fn project_psd(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let eigen = m.clone().symmetric_eigen();
    let min_eig = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut scaled = eigen.eigenvectors.clone();
    for (idx, &lambda) in eigen.eigenvalues.iter().enumerate() {
        scaled.column_mut(idx).scale_mut(lambda.max(0.0));
    }
    let projected = &scaled * eigen.eigenvectors.transpose();
    // Symmetrize away round-off from the two multiplications.
    let projected = (&projected + projected.transpose()) * 0.5;
    (projected, min_eig)
}

/// Solves the relaxation by ADMM. Returns the best iterate with
/// `converged = false` when the tolerance is not reached in `max_iter`
/// iterations; input validation is the only error path.
pub fn solve(prob: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterDomain {
            name: "tol",
            value: opts.tol.to_string(),
            domain: "positive",
        });
    }
    let n = prob.n;
    let t_count = prob.triples.len();

    // How many triples touch each unordered pair, for the X-step divisor.
    let mut multiplicity: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for &[i, j, k] in &prob.triples {
        for pair in [(i, j), (j, k), (i, k)] {
            *multiplicity.entry(pair).or_insert(0.0) += 1.0;
        }
    }
    let mut weights = DMatrix::zeros(n, n);
    for &(p, q, w) in &prob.pair_weights {
        weights[(p, q)] = w;
        weights[(q, p)] = w;
    }
    let mut divisor = DMatrix::from_element(n, n, 2.0);
    for (&(p, q), &count) in &multiplicity {
        divisor[(p, q)] += count;
        divisor[(q, p)] += count;
    }

    let mut x = DMatrix::<f64>::identity(n, n);
    let mut z = x.clone();
    let mut uz = DMatrix::<f64>::zeros(n, n);
    let mut y = vec![[0.0f64; 3]; t_count];
    let mut uy = vec![[0.0f64; 3]; t_count];
    let mut mu = opts.penalty;

    let extract = |x: &DMatrix<f64>, t: &[usize; 3]| -> [f64; 3] {
        let [i, j, k] = *t;
        [x[(i, j)], x[(j, k)], x[(i, k)]]
    };

    let mut primal_inf = f64::INFINITY;
    let mut dual_inf = f64::INFINITY;
    let mut iterations = opts.max_iter;
    let mut converged = false;

    for iter in 0..opts.max_iter {
        // Cone block: PSD consensus copy and per-triple tetrahedra.
        let (z_new, _) = project_psd(&(&x + &uz));
        let mut dual_max = (&z_new - &z).amax() * mu;
        z = z_new;
        for (t_idx, triple) in prob.triples.iter().enumerate() {
            let e = extract(&x, triple);
            let target = [
                e[0] + uy[t_idx][0],
                e[1] + uy[t_idx][1],
                e[2] + uy[t_idx][2],
            ];
            let projected = project_triple(target);
            for l in 0..3 {
                dual_max = dual_max.max(mu * (projected[l] - y[t_idx][l]).abs());
            }
            y[t_idx] = projected;
        }

        // Entrywise quadratic with the diagonal pinned to 1: accumulate the
        // consensus pulls, then divide.
        let mut numer = (&z - &uz) * 2.0 + &weights / mu;
        for (t_idx, &[i, j, k]) in prob.triples.iter().enumerate() {
            for (l, &(p, q)) in [(i, j), (j, k), (i, k)].iter().enumerate() {
                let pull = y[t_idx][l] - uy[t_idx][l];
                numer[(p, q)] += pull;
                numer[(q, p)] += pull;
            }
        }
        x = numer.zip_map(&divisor, |a, d| a / d);
        x.fill_diagonal(1.0);

        // Duals and residuals.
        let mut primal_max = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let gap = x[(p, q)] - z[(p, q)];
                uz[(p, q)] += gap;
                primal_max = primal_max.max(gap.abs());
            }
        }
        for (t_idx, triple) in prob.triples.iter().enumerate() {
            let e = extract(&x, triple);
            for l in 0..3 {
                let gap = e[l] - y[t_idx][l];
                uy[t_idx][l] += gap;
                primal_max = primal_max.max(gap.abs());
            }
        }
        primal_inf = primal_max;
        dual_inf = dual_max;

        if primal_inf <= 0.25 * opts.tol && dual_inf <= 0.25 * opts.tol {
            iterations = iter + 1;
            converged = true;
            break;
        }

        // Keep the residuals balanced; rescaling the penalty requires
        // rescaling the scaled duals the opposite way.
        if iter % 20 == 19 {
            if primal_inf > 10.0 * dual_inf && mu < 1e6 {
                mu *= 2.0;
                uz /= 2.0;
                for u in &mut uy {
                    for c in u.iter_mut() {
                        *c /= 2.0;
                    }
                }
            } else if dual_inf > 10.0 * primal_inf && mu > 1e-4 {
                mu /= 2.0;
                uz *= 2.0;
                for u in &mut uy {
                    for c in u.iter_mut() {
                        *c *= 2.0;
                    }
                }
            }
        }
    }

    // Polish: exact PSD projection, then renormalize to a unit diagonal.
    let (mut polished, _) = project_psd(&x);
    let scale: Vec<f64> = (0..n).map(|i| polished[(i, i)].max(1e-12).sqrt()).collect();
    for p in 0..n {
        for q in 0..n {
            polished[(p, q)] /= scale[p] * scale[q];
        }
    }
    let (_, min_eig) = project_psd(&polished);

    let objective = prob.objective_of(&polished);
    let min_cut = prob.min_cut(&polished);
    Ok(SdpSolution {
        objective,
        per_constraint_lambda: prob.per_constraint_lambda(&polished),
        gram: polished,
        primal_residual: primal_inf,
        dual_residual: dual_inf,
        cut_violation: (-min_cut).max(0.0),
        min_eigenvalue: min_eig,
        iterations,
        converged,
    })
}
