//! Dense `[0,1]`-valued functions on the Boolean cube with Walsh-Hadamard
//! transforms, influences and the noise operator.
//!
//! Table index `b` encodes the point whose coordinate `i` is `+1` iff bit `i`
//! of `b` is set. Coefficient index `S` encodes a subset of coordinates by its
//! bitmask. Influence follows the squared-coefficient convention, so a
//! `[0,1]`-valued dictator has influence 1/4, not 1; both conventions appear
//! in the literature and everything downstream assumes this one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest arity for dense tables; a transform is O(n 2^n) and 2^24 reals is
/// the desk-scale memory budget.
pub const ARITY_LIMIT: usize = 24;

/// A function `{-1,1}^n -> [0,1]` stored as a dense table of `2^n` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<f64>,
}

/// The multilinear expansion of a [`BooleanFunction`]: one coefficient per
/// subset of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierExpansion {
    n: usize,
    coeffs: Vec<f64>,
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n > ARITY_LIMIT {
            return Err(Error::ArityLimit(n, ARITY_LIMIT));
        }
        if table.len() != 1 << n {
            return Err(Error::TableLength {
                n,
                got: table.len(),
                expected: 1 << n,
            });
        }
        for (index, &value) in table.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::TableRange { index, value });
            }
        }
        Ok(Self { n, table })
    }

    /// The dictator `(1 + x_i)/2`.
    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::CoordinateRange(i, n));
        }
        let table = (0..1usize << n)
            .map(|b| if b >> i & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        Self::new(n, table)
    }

    /// The constant function `c`.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; 1 << n])
    }

    /// Majority on an odd arity, `{0,1}`-valued.
    pub fn majority(n: usize) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::ParameterDomain {
                name: "n",
                value: n.to_string(),
                domain: "odd",
            });
        }
        let table = (0..1usize << n)
            .map(|b: usize| if 2 * b.count_ones() as usize > n { 1.0 } else { 0.0 })
            .collect();
        Self::new(n, table)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Value at the point encoded by `bits`.
    pub fn value(&self, bits: usize) -> f64 {
        self.table[bits]
    }

    /// Value at a `{-1,+1}` point given coordinate-wise.
    pub fn eval_signs(&self, x: &[i8]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut bits = 0usize;
        for (i, &v) in x.iter().enumerate() {
            if v == 1 {
                bits |= 1 << i;
            }
        }
        self.table[bits]
    }

    pub fn mean(&self) -> f64 {
        self.table.iter().sum::<f64>() / self.table.len() as f64
    }

    /// Coordinates the function actually depends on.
    pub fn relevant_coordinates(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| {
                let bit = 1 << i;
                (0..self.table.len()).any(|b| b & bit == 0 && self.table[b] != self.table[b | bit])
            })
            .collect()
    }
}

/// In-place Walsh-Hadamard butterfly. With the `(u+v, v-u)` kernel and a
/// `2^-n` scale this sends a table to its coefficients; the `(u-v, u+v)`
/// kernel inverts it.
fn butterfly(data: &mut [f64], forward: bool) {
    let len = data.len();
    let mut half = 1;
    while half < len {
        let step = half * 2;
        for start in (0..len).step_by(step) {
            for off in start..start + half {
                let (u, v) = (data[off], data[off + half]);
                if forward {
                    data[off] = u + v;
                    data[off + half] = v - u;
                } else {
                    data[off] = u - v;
                    data[off + half] = u + v;
                }
            }
        }
        half = step;
    }
}

/// Fourier coefficients of `f`: coefficient `S` is the mean of `f(x) x_S`
/// under the uniform measure.
pub fn fourier(f: &BooleanFunction) -> FourierExpansion {
    let mut coeffs = f.table.clone();
    butterfly(&mut coeffs, true);
    let scale = 1.0 / coeffs.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    FourierExpansion { n: f.n, coeffs }
}

impl FourierExpansion {
    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the subset encoded by `mask`.
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    /// Evaluates the expansion back to a table. Entries are clamped to
    /// `[0,1]` when within `1e-9` of the boundary to absorb round-off.
    pub fn to_function(&self) -> Result<BooleanFunction> {
        let mut table = self.coeffs.clone();
        butterfly(&mut table, false);
        for t in &mut table {
            if *t < 0.0 && *t > -1e-9 {
                *t = 0.0;
            } else if *t > 1.0 && *t < 1.0 + 1e-9 {
                *t = 1.0;
            }
        }
        BooleanFunction::new(self.n, table)
    }
}

/// Influence of coordinate `i`: the sum of squared coefficients of subsets
/// containing `i`.
pub fn influence(f: &BooleanFunction, i: usize) -> Result<f64> {
    if i >= f.n {
        return Err(Error::CoordinateRange(i, f.n));
    }
    let fe = fourier(f);
    Ok(influence_of_expansion(&fe, i, 1.0))
}

fn influence_of_expansion(fe: &FourierExpansion, i: usize, rho: f64) -> f64 {
    let bit = 1usize << i;
    fe.coeffs
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask & bit != 0)
        .map(|(mask, &c)| {
            let attenuation = rho.powi(2 * mask.count_ones() as i32);
            attenuation * c * c
        })
        .sum()
}

/// Applies the noise operator: coefficient `S` is scaled by `rho^|S|`.
pub fn noise(f: &BooleanFunction, rho: f64) -> Result<BooleanFunction> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::ParameterDomain {
            name: "rho",
            value: rho.to_string(),
            domain: "[-1, 1]",
        });
    }
    let mut fe = fourier(f);
    for (mask, c) in fe.coeffs.iter_mut().enumerate() {
        *c *= rho.powi(mask.count_ones() as i32);
    }
    fe.to_function()
}

/// The set `{i : Inf_i(T_{1-gamma} f) >= tau}`. Its size is at most
/// `1/(gamma tau)`.
pub fn high_influence_set(f: &BooleanFunction, gamma: f64, tau: f64) -> Result<Vec<usize>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::ParameterDomain {
            name: "gamma",
            value: gamma.to_string(),
            domain: "(0, 1)",
        });
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::ParameterDomain {
            name: "tau",
            value: tau.to_string(),
            domain: "(0, 1)",
        });
    }
    let fe = fourier(f);
    Ok((0..f.n)
        .filter(|&i| influence_of_expansion(&fe, i, 1.0 - gamma) >= tau)
        .collect())
}
