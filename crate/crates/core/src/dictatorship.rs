//! Acceptance-probability harnesses for the equality and AND testers.
//!
//! The equality tester draws three correlated bit strings from the
//! three-bit gadget distribution applied coordinate-wise and accepts when a
//! function agrees on all of them; the AND tester draws `k` rows from the
//! mixed pairwise-independent gadget and accepts when the function is 1 on
//! every row. Dictators pass with probability `1 - 3 delta/4` (equality)
//! and `rho(k)(1-xi) + xi 2^-k` (AND); low-influence balanced functions
//! cannot do much better than the correlated-Gaussian benchmark, which the
//! harness checks empirically on majorities.
//!
//! Acceptance is computed exactly, in rationals, whenever the function
//! depends on few enough coordinates; otherwise by seeded Monte Carlo.

use num::traits::Pow;
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::{d_delta, d_k, mix, ratio, AliasSampler, Pmf, Rational};
use crate::error::{Error, Result};
use crate::exec;
use crate::fourier::{BooleanFunction, ARITY_LIMIT};

/// Largest junta handled exactly.
pub const JUNTA_LIMIT: usize = 10;
/// Cap on joint atoms enumerated by the exact AND path.
pub const EXACT_ATOM_BUDGET: u128 = 1 << 24;

/// The function zoo exercised by the testers. Structured variants evaluate
/// lazily, so arities far beyond the dense-table limit work under Monte
/// Carlo (a dictator inside 10^2 coordinates, majority on 101, ...).
#[derive(Debug, Clone)]
pub enum TestFunction {
    Dictator { n: usize, coord: usize },
    ConstHalf { n: usize },
    Majority { n: usize },
    Dense(BooleanFunction),
}

impl TestFunction {
    pub fn dictator(n: usize, coord: usize) -> Result<Self> {
        if coord >= n {
            return Err(Error::CoordinateRange(coord, n));
        }
        Ok(Self::Dictator { n, coord })
    }

    pub fn majority(n: usize) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::ParameterDomain {
                name: "n",
                value: n.to_string(),
                domain: "odd",
            });
        }
        Ok(Self::Majority { n })
    }

    /// A uniformly random table with exactly half ones (mean exactly 1/2).
    pub fn random_balanced(n: usize, seed: u64) -> Result<Self> {
        use rand::seq::SliceRandom;
        if n > ARITY_LIMIT {
            return Err(Error::ArityLimit(n, ARITY_LIMIT));
        }
        let size = 1usize << n;
        let mut table = vec![0.0; size];
        table[size / 2..].fill(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        table.shuffle(&mut rng);
        Ok(Self::Dense(BooleanFunction::new(n, table)?))
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Dictator { n, .. } | Self::ConstHalf { n } | Self::Majority { n } => *n,
            Self::Dense(f) => f.arity(),
        }
    }

    /// Value at a `{-1,+1}` point.
    pub fn eval(&self, x: &[i8]) -> f64 {
        match self {
            Self::Dictator { coord, .. } => {
                if x[*coord] == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::ConstHalf { .. } => 0.5,
            Self::Majority { .. } => {
                let sum: i32 = x.iter().map(|&v| i32::from(v)).sum();
                if sum > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Dense(f) => f.eval_signs(x),
        }
    }

    /// Pointwise complement `1 - f`, materialized as a dense table.
    pub fn negated(&self) -> Result<Self> {
        let n = self.arity();
        if n > ARITY_LIMIT {
            return Err(Error::ArityLimit(n, ARITY_LIMIT));
        }
        let mut x = vec![-1i8; n];
        let table = (0..1usize << n)
            .map(|bits| {
                for (i, v) in x.iter_mut().enumerate() {
                    *v = if bits >> i & 1 == 1 { 1 } else { -1 };
                }
                1.0 - self.eval(&x)
            })
            .collect();
        Ok(Self::Dense(BooleanFunction::new(n, table)?))
    }

    /// Restriction to the coordinates the function depends on, as a dense
    /// table indexed by junta bit patterns. Fails when the junta exceeds
    /// `JUNTA_LIMIT`.
    fn junta_table(&self) -> Result<Vec<f64>> {
        match self {
            Self::Dictator { .. } => Ok(vec![0.0, 1.0]),
            Self::ConstHalf { .. } => Ok(vec![0.5]),
            Self::Majority { n } => {
                if *n > JUNTA_LIMIT {
                    return Err(Error::JuntaTooLarge {
                        junta: *n,
                        limit: JUNTA_LIMIT,
                    });
                }
                Ok(BooleanFunction::majority(*n)?.table().to_vec())
            }
            Self::Dense(f) => {
                let coords = f.relevant_coordinates();
                if coords.len() > JUNTA_LIMIT {
                    return Err(Error::JuntaTooLarge {
                        junta: coords.len(),
                        limit: JUNTA_LIMIT,
                    });
                }
                // Re-index onto the junta coordinates, irrelevant ones at -1.
                let table = (0..1usize << coords.len())
                    .map(|jb| {
                        let mut bits = 0usize;
                        for (pos, &c) in coords.iter().enumerate() {
                            if jb >> pos & 1 == 1 {
                                bits |= 1 << c;
                            }
                        }
                        f.value(bits)
                    })
                    .collect();
                Ok(table)
            }
        }
    }
}

/// How to evaluate an acceptance probability.
#[derive(Debug, Clone, Copy)]
pub enum EvalMode {
    /// Exact rational enumeration over the junta.
    Exact,
    /// Seeded Monte Carlo with block-parallel, reproducible streams.
    MonteCarlo { trials: u64, seed: u64 },
}

/// Acceptance probability, exact or estimated.
#[derive(Debug, Clone)]
pub enum Acceptance {
    Exact(Rational),
    Estimate(crate::gaussian::McEstimate),
}

impl Acceptance {
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Self::Estimate(e) => e.mean,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Estimate(_) => None,
        }
    }
}

/// One tester run: the acceptance probability plus the relevant dictator
/// (completeness) and low-influence (soundness) benchmarks.
#[derive(Debug, Clone)]
pub struct TestReport {
    pub acceptance: Acceptance,
    pub completeness_bound: f64,
    pub soundness_bound: f64,
}

impl TestReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "accept": self.acceptance.value(),
            "completeness_bound": self.completeness_bound,
            "soundness_bound": self.soundness_bound,
        });
        match &self.acceptance {
            Acceptance::Exact(r) => {
                v["method"] = "exact-junta".into();
                v["accept_num"] = r.numer().to_string().into();
                v["accept_den"] = r.denom().to_string().into();
            }
            Acceptance::Estimate(e) => {
                v["method"] = "monte-carlo".into();
                v["std_error"] = e.std_error.into();
                v["samples"] = e.samples.into();
            }
        }
        v
    }
}

fn rational_in_unit(name: &'static str, v: &Rational, allow_zero: bool) -> Result<()> {
    let ok = (v.is_positive() || (allow_zero && v.is_zero())) && *v <= Rational::one();
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value: v.to_string(),
            domain: if allow_zero { "[0, 1]" } else { "(0, 1]" },
        })
    }
}

/// Rational Walsh-Hadamard coefficients of a junta table. The table values
/// are dyadic (every f64 is a rational), so this is exact.
fn rational_fourier(table: &[f64]) -> Vec<Rational> {
    let mut coeffs: Vec<Rational> = table
        .iter()
        .map(|&t| Rational::from_float(t).expect("table entries are finite"))
        .collect();
    let len = coeffs.len();
    let mut half = 1;
    while half < len {
        for start in (0..len).step_by(half * 2) {
            for off in start..start + half {
                let u = coeffs[off].clone();
                let v = coeffs[off + half].clone();
                coeffs[off] = &u + &v;
                coeffs[off + half] = v - u;
            }
        }
        half *= 2;
    }
    let scale = ratio(1, len as i64);
    for c in &mut coeffs {
        *c *= scale.clone();
    }
    coeffs
}

/// `E[f(X) f(Y) f(Z)]` when the three rows are coordinate-wise samples of a
/// distribution with uniform marginals, pairwise correlation `r`, and zero
/// triple moment. Only coefficient triples `(S, T, S xor T)` survive, each
/// weighted by `r^|S union T|`.
fn triple_product_moment(coeffs: &[Rational], r: &Rational) -> Rational {
    let arity = coeffs.len().trailing_zeros() as usize;
    let mut powers = Vec::with_capacity(arity + 1);
    let mut p = Rational::one();
    for _ in 0..=arity {
        powers.push(p.clone());
        p *= r.clone();
    }
    let nonzero: Vec<(usize, &Rational)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let mut total = Rational::zero();
    for &(s, cs) in &nonzero {
        for &(t, ct) in &nonzero {
            let u = coeffs[s ^ t].clone();
            if u.is_zero() {
                continue;
            }
            let weight = &powers[(s | t).count_ones() as usize];
            total += cs * ct * u * weight;
        }
    }
    total
}

/// Acceptance of the equality tester
/// `E[f(X) f(Y) f(Z) + (1-f(X))(1-f(Y))(1-f(Z))]` with pairwise row
/// correlation `1 - delta`.
pub fn accept_equal(f: &TestFunction, delta: &Rational, mode: EvalMode) -> Result<TestReport> {
    rational_in_unit("delta", delta, false)?;
    let delta_f = delta.to_f64().expect("delta fits f64");
    let completeness = 1.0 - 0.75 * delta_f;
    let soundness = 1.0 - 3.0 * (1.0 - delta_f).acos() / (2.0 * std::f64::consts::PI);
    let acceptance = match mode {
        EvalMode::Exact => Acceptance::Exact(accept_equal_exact(f, delta)?),
        EvalMode::MonteCarlo { trials, seed } => {
            let pmf = d_delta(delta)?;
            Acceptance::Estimate(monte_carlo(f, &pmf, trials, seed, equal_trial_value))
        }
    };
    Ok(TestReport {
        acceptance,
        completeness_bound: completeness,
        soundness_bound: soundness,
    })
}

fn accept_equal_exact(f: &TestFunction, delta: &Rational) -> Result<Rational> {
    let table = f.junta_table()?;
    let r = Rational::one() - delta;
    let coeffs = rational_fourier(&table);
    let complement: Vec<Rational> = coeffs
        .iter()
        .enumerate()
        .map(|(mask, c)| if mask == 0 { Rational::one() - c } else { -c.clone() })
        .collect();
    Ok(triple_product_moment(&coeffs, &r) + triple_product_moment(&complement, &r))
}

/// Acceptance of the AND tester `Pr[f(X_1) = ... = f(X_k) = 1]` under the
/// mixed pairwise-independent distribution.
pub fn accept_and(
    f: &TestFunction,
    k: usize,
    xi: &Rational,
    mode: EvalMode,
) -> Result<TestReport> {
    rational_in_unit("xi", xi, false)?;
    if k < 3 {
        return Err(Error::ParameterDomain {
            name: "k",
            value: k.to_string(),
            domain: "k >= 3",
        });
    }
    let xi_f = xi.to_f64().expect("xi fits f64");
    let rho = rho_k(k);
    let completeness = rho * (1.0 - xi_f) + xi_f / (1u64 << k) as f64;
    let soundness = 1.0 / (1u64 << k) as f64;
    let pmf = mix(&d_k(k)?, xi)?;
    let acceptance = match mode {
        EvalMode::Exact => Acceptance::Exact(accept_and_exact(f, &pmf)?),
        EvalMode::MonteCarlo { trials, seed } => {
            Acceptance::Estimate(monte_carlo(f, &pmf, trials, seed, and_trial_value))
        }
    };
    Ok(TestReport {
        acceptance,
        completeness_bound: completeness,
        soundness_bound: soundness,
    })
}

/// Dictator acceptance of the unmixed AND gadget: `1/(2 ceil((k+1)/2))`.
pub fn rho_k(k: usize) -> f64 {
    1.0 / (2.0 * ((k + 2) / 2) as f64)
}

fn accept_and_exact(f: &TestFunction, pmf: &Pmf) -> Result<Rational> {
    let table = f.junta_table()?;
    let junta = table.len().trailing_zeros() as usize;
    let k = pmf.arity();
    let atoms = (pmf.support_len() as u128).pow(junta.max(1) as u32);
    if atoms > EXACT_ATOM_BUDGET {
        return Err(Error::ExactBudget {
            atoms,
            budget: EXACT_ATOM_BUDGET,
        });
    }
    let rational_table: Vec<Rational> = table
        .iter()
        .map(|&t| Rational::from_float(t).expect("table entries are finite"))
        .collect();
    let support: Vec<(u32, Rational)> = pmf.iter().map(|(p, m)| (p, m.clone())).collect();
    // Walk the junta columns; each row of the tester accumulates one bit per
    // column, indexing the restricted table at the leaves.
    fn recurse(
        col: usize,
        junta: usize,
        k: usize,
        prob: &Rational,
        row_bits: &mut [usize],
        support: &[(u32, Rational)],
        table: &[Rational],
        total: &mut Rational,
    ) {
        if col == junta {
            let mut term = prob.clone();
            for &bits in row_bits.iter() {
                if table[bits].is_zero() {
                    return;
                }
                term *= table[bits].clone();
            }
            *total += term;
            return;
        }
        for (point, mass) in support {
            for (a, rb) in row_bits.iter_mut().enumerate().take(k) {
                if point >> a & 1 == 1 {
                    *rb |= 1 << col;
                }
            }
            let next = prob * mass;
            recurse(col + 1, junta, k, &next, row_bits, support, table, total);
            for rb in row_bits.iter_mut().take(k) {
                *rb &= !(1 << col);
            }
        }
    }
    let mut total = Rational::zero();
    let mut row_bits = vec![0usize; k];
    recurse(
        0,
        junta,
        k,
        &Rational::one(),
        &mut row_bits,
        &support,
        &rational_table,
        &mut total,
    );
    Ok(total)
}

/// One equality-tester trial given the `k = 3` rows.
fn equal_trial_value(f: &TestFunction, rows: &[Vec<i8>]) -> f64 {
    let a = f.eval(&rows[0]);
    let b = f.eval(&rows[1]);
    let c = f.eval(&rows[2]);
    a * b * c + (1.0 - a) * (1.0 - b) * (1.0 - c)
}

/// One AND-tester trial: the product of `f` on every row.
fn and_trial_value(f: &TestFunction, rows: &[Vec<i8>]) -> f64 {
    rows.iter().map(|row| f.eval(row)).product()
}

const TRIAL_BLOCK: u64 = 1024;

fn monte_carlo(
    f: &TestFunction,
    pmf: &Pmf,
    trials: u64,
    seed: u64,
    trial_value: fn(&TestFunction, &[Vec<i8>]) -> f64,
) -> crate::gaussian::McEstimate {
    let sampler = AliasSampler::new(pmf);
    let n = f.arity();
    let k = pmf.arity();
    let (blocks, last) = exec::block_layout(trials, TRIAL_BLOCK);
    let partials = exec::map_blocks(blocks as usize, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let len = if b as u64 + 1 == blocks { last } else { TRIAL_BLOCK };
        let mut rows = vec![vec![0i8; n]; k];
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        for _ in 0..len {
            for col in 0..n {
                let point = sampler.draw(&mut rng);
                for (a, row) in rows.iter_mut().enumerate() {
                    row[col] = if point >> a & 1 == 1 { 1 } else { -1 };
                }
            }
            let v = trial_value(f, &rows);
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = partials
        .into_iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    crate::gaussian::McEstimate::from_sums(sum, sum_sq, trials)
}

/// Completeness, soundness, and their ratio for the equality tester at
/// noise level `delta`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EqualBounds {
    pub completeness: f64,
    pub soundness: f64,
    pub ratio: f64,
}

pub fn equal_bounds(delta: f64) -> Result<EqualBounds> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::ParameterDomain {
            name: "delta",
            value: delta.to_string(),
            domain: "(0, 1]",
        });
    }
    let completeness = 1.0 - 0.75 * delta;
    let soundness = 1.0 - 3.0 * (1.0 - delta).acos() / (2.0 * std::f64::consts::PI);
    Ok(EqualBounds {
        completeness,
        soundness,
        ratio: soundness / completeness,
    })
}

/// Minimum of the soundness-to-completeness ratio over the grid
/// `delta = step, 2 step, ..., 1`.
pub fn equal_bounds_grid_min(step: f64) -> (f64, EqualBounds) {
    let points = (1.0 / step).round() as usize;
    let mut best_delta = step;
    let mut best = equal_bounds(step).expect("step inside (0,1]");
    for i in 2..=points {
        let delta = (i as f64 * step).min(1.0);
        let b = equal_bounds(delta).expect("grid inside (0,1]");
        if b.ratio < best.ratio {
            best = b;
            best_delta = delta;
        }
    }
    (best_delta, best)
}

/// Exact completeness/soundness pair of the AND tester and the hardness
/// factor `ceil((k+1)/2) / 2^(k-1)` they certify.
#[derive(Debug, Clone)]
pub struct AndHardness {
    pub completeness: Rational,
    pub soundness: Rational,
    pub factor: Rational,
}

pub fn and_hardness(k: usize) -> Result<AndHardness> {
    if k < 3 {
        return Err(Error::ParameterDomain {
            name: "k",
            value: k.to_string(),
            domain: "k >= 3",
        });
    }
    let ceil_half = BigInt::from((k + 2) / 2);
    let completeness = Rational::new(BigInt::one(), 2 * ceil_half.clone());
    let soundness = Rational::new(BigInt::one(), BigInt::from(2).pow(k as u32));
    let factor = Rational::new(ceil_half, BigInt::from(2).pow(k as u32 - 1));
    Ok(AndHardness {
        completeness,
        soundness,
        factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(f: &TestFunction, delta: &Rational) -> Rational {
        accept_equal(f, delta, EvalMode::Exact)
            .unwrap()
            .acceptance
            .exact()
            .unwrap()
            .clone()
    }

    #[test]
    fn equal_dictator_completeness_exact() {
        let f = TestFunction::dictator(7, 2).unwrap();
        for den in [10i64, 4, 3, 2, 1] {
            let delta = ratio(1, den);
            let expected = Rational::one() - ratio(3, 4) * &delta;
            assert_eq!(exact(&f, &delta), expected, "delta = 1/{den}");
        }
    }

    #[test]
    fn equal_const_half_quarter() {
        let f = TestFunction::ConstHalf { n: 5 };
        assert_eq!(exact(&f, &ratio(2, 5)), ratio(1, 4));
    }

    #[test]
    fn equal_negation_symmetry_exact() {
        for seed in 0..5 {
            let f = TestFunction::random_balanced(6, seed).unwrap();
            let g = f.negated().unwrap();
            let delta = ratio(3, 7);
            assert_eq!(exact(&f, &delta), exact(&g, &delta));
        }
        let dict = TestFunction::dictator(4, 1).unwrap();
        let neg = dict.negated().unwrap();
        let delta = ratio(1, 3);
        assert_eq!(exact(&dict, &delta), exact(&neg, &delta));
    }

    #[test]
    fn equal_exact_junta_matches_monte_carlo() {
        // Small juntas embedded in a wider input.
        for seed in [1u64, 9] {
            let small = TestFunction::random_balanced(4, seed).unwrap();
            let TestFunction::Dense(ref small_fn) = small else { unreachable!() };
            // Embed: depends on coordinates 3..7 of a 12-bit input.
            let embedded = (0..1usize << 12)
                .map(|bits| small_fn.value(bits >> 3 & 0xf))
                .collect();
            let f = TestFunction::Dense(BooleanFunction::new(12, embedded).unwrap());
            let delta = ratio(2, 5);
            let exact_value = exact(&f, &delta).to_f64().unwrap();
            let report = accept_equal(
                &f,
                &delta,
                EvalMode::MonteCarlo {
                    trials: 200_000,
                    seed: 77,
                },
            )
            .unwrap();
            let Acceptance::Estimate(est) = report.acceptance else { unreachable!() };
            assert!(
                est.sigmas_from(exact_value) <= 4.0,
                "MC {} vs exact {exact_value}",
                est.mean
            );
        }
    }

    #[test]
    fn equal_majority_approaches_gaussian_soundness() {
        let f = TestFunction::majority(101).unwrap();
        let delta = ratio(2, 5);
        let report = accept_equal(
            &f,
            &delta,
            EvalMode::MonteCarlo {
                trials: 200_000,
                seed: 5,
            },
        )
        .unwrap();
        let target = 1.0 - 3.0 * 0.6f64.acos() / (2.0 * std::f64::consts::PI);
        assert!((report.soundness_bound - target).abs() < 1e-15);
        assert!((report.acceptance.value() - target).abs() < 0.02);
    }

    #[test]
    fn equal_junta_too_large_for_exact() {
        let f = TestFunction::majority(101).unwrap();
        assert!(matches!(
            accept_equal(&f, &ratio(1, 2), EvalMode::Exact),
            Err(Error::JuntaTooLarge { .. })
        ));
    }

    #[test]
    fn and_dictator_completeness_exact() {
        for k in 3..=8 {
            let f = TestFunction::dictator(6, 0).unwrap();
            let xi = ratio(1, 20);
            let report = accept_and(&f, k, &xi, EvalMode::Exact).unwrap();
            let rho = ratio(1, 2 * ((k as i64 + 2) / 2));
            let expected =
                rho * (Rational::one() - &xi) + &xi * ratio(1, 1i64 << k);
            assert_eq!(report.acceptance.exact().unwrap(), &expected, "k={k}");
        }
    }

    #[test]
    fn and_const_half_factorizes() {
        let f = TestFunction::ConstHalf { n: 4 };
        for k in [3usize, 5] {
            let report = accept_and(&f, k, &ratio(1, 10), EvalMode::Exact).unwrap();
            assert_eq!(report.acceptance.exact().unwrap(), &ratio(1, 1i64 << k));
        }
    }

    #[test]
    fn and_majority_near_independent_soundness() {
        let f = TestFunction::majority(101).unwrap();
        let report = accept_and(
            &f,
            4,
            &ratio(1, 20),
            EvalMode::MonteCarlo {
                trials: 300_000,
                seed: 3,
            },
        )
        .unwrap();
        assert!((report.acceptance.value() - 0.0625).abs() < 0.01);
    }

    #[test]
    fn and_exact_budget_guard() {
        // Junta of 10 with a full-support k=4 mixture blows the atom budget.
        let f = TestFunction::majority(9).unwrap();
        let result = accept_and(&f, 4, &ratio(1, 2), EvalMode::Exact);
        assert!(matches!(result, Err(Error::ExactBudget { .. })));
    }

    #[test]
    fn and_exact_matches_monte_carlo_on_small_junta() {
        let f = TestFunction::random_balanced(2, 4).unwrap();
        let xi = ratio(1, 4);
        let exact_value = accept_and(&f, 3, &xi, EvalMode::Exact)
            .unwrap()
            .acceptance
            .value();
        let mc = accept_and(
            &f,
            3,
            &xi,
            EvalMode::MonteCarlo {
                trials: 200_000,
                seed: 8,
            },
        )
        .unwrap();
        let Acceptance::Estimate(est) = mc.acceptance else { unreachable!() };
        assert!(est.sigmas_from(exact_value) <= 4.0);
    }

    #[test]
    fn equal_bounds_named_points() {
        let b = equal_bounds(1.0).unwrap();
        assert!((b.completeness - 0.25).abs() < 1e-15);
        assert!((b.soundness - 0.25).abs() < 1e-15);
        assert!((b.ratio - 1.0).abs() < 1e-12);
        let near_min = equal_bounds(0.3996).unwrap();
        assert!((near_min.ratio - 0.796070).abs() < 1e-4);
        assert!(equal_bounds(0.0).is_err());
    }

    #[test]
    fn equal_bounds_grid_minimum() {
        let (delta, bounds) = equal_bounds_grid_min(1e-4);
        assert!((delta - 0.3996).abs() < 1e-3);
        assert!(bounds.ratio >= 0.79587 && bounds.ratio <= 0.79627);
    }

    #[test]
    fn and_hardness_table() {
        for k in 3..=12usize {
            let h = and_hardness(k).unwrap();
            let ceil_half = (k as i64 + 2) / 2;
            assert_eq!(h.factor, ratio(ceil_half, 1i64 << (k - 1)));
            // The factor is exactly soundness / completeness.
            assert_eq!(h.factor, &h.soundness / &h.completeness);
        }
        let h3 = and_hardness(3).unwrap();
        assert_eq!(h3.factor, ratio(1, 2));
        let h4 = and_hardness(4).unwrap();
        assert_eq!(h4.factor, ratio(3, 8));
        let h5 = and_hardness(5).unwrap();
        assert_eq!(h5.factor, ratio(3, 16));
        assert_eq!(h5.completeness, ratio(1, 6));
        assert_eq!(h5.soundness, ratio(1, 32));
        assert!(and_hardness(2).is_err());
    }

    #[test]
    fn report_serializes() {
        let f = TestFunction::dictator(3, 0).unwrap();
        let exact_report = accept_equal(&f, &ratio(2, 5), EvalMode::Exact).unwrap();
        let v = exact_report.to_json_value();
        assert_eq!(v["method"], "exact-junta");
        assert_eq!(v["accept_num"], "7");
        assert_eq!(v["accept_den"], "10");
        let mc_report = accept_equal(
            &f,
            &ratio(2, 5),
            EvalMode::MonteCarlo { trials: 1000, seed: 0 },
        )
        .unwrap();
        let w = mc_report.to_json_value();
        assert_eq!(w["method"], "monte-carlo");
        assert!(w["std_error"].as_f64().is_some());
    }
}
