//! MAX-3-EQUAL instances: data model, evaluation, exhaustive optimum,
//! random generation.
//!
//! A constraint is a triple of literals required to be all equal. Signs are
//! canonicalized so the first literal is positive; the predicate
//! `s_i x_i = s_j x_j = s_k x_k` is invariant under flipping all three signs,
//! so this loses nothing and halves the case analysis downstream.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`brute_force_opt`]: 2^24 assignments finish in
/// seconds at desk scale.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// One all-equal constraint over three distinct variables `i < j < k`,
/// each with a polarity in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub vars: [usize; 3],
    pub signs: [i8; 3],
}

impl Constraint {
    /// Builds a constraint, validating `i < j < k` and canonicalizing the
    /// signs so the first one is `+1`.
    pub fn new(vars: [usize; 3], signs: [i8; 3]) -> Result<Self> {
        if !(vars[0] < vars[1] && vars[1] < vars[2]) {
            return Err(Error::InvalidConstraint(vars, usize::MAX));
        }
        for &s in &signs {
            if s != 1 && s != -1 {
                return Err(Error::InvalidSign(s));
            }
        }
        let signs = if signs[0] == -1 {
            [1, -signs[1], -signs[2]]
        } else {
            signs
        };
        Ok(Self { vars, signs })
    }

    /// True when the three literals agree under `asg`.
    pub fn satisfied(&self, asg: &Assignment) -> bool {
        let [i, j, k] = self.vars;
        let [si, sj, sk] = self.signs;
        let a = si * asg.values[i];
        let b = sj * asg.values[j];
        let c = sk * asg.values[k];
        a == b && b == c
    }
}

/// A MAX-3-EQUAL instance: `n` Boolean variables and a list of constraints.
/// Repeated constraints are allowed and weight the uniform average.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub constraints: Vec<Constraint>,
}

impl Instance {
    /// Builds an instance, validating every constraint against `n`.
    pub fn new(n: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            if c.vars[2] >= n {
                return Err(Error::InvalidConstraint(c.vars, n));
            }
        }
        Ok(Self { n, constraints })
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Parses the JSON instance format
    /// `{"n": ..., "constraints": [{"vars": [i,j,k], "signs": [s,s,s]}, ...]}`,
    /// re-validating and re-canonicalizing every constraint.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Instance = serde_json::from_str(text)?;
        let constraints = raw
            .constraints
            .into_iter()
            .map(|c| Constraint::new(c.vars, c.signs))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(raw.n, constraints)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }
}

/// An assignment of `{-1, +1}` values to the variables of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<i8>,
}

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        for &v in &values {
            if v != 1 && v != -1 {
                return Err(Error::InvalidSign(v));
            }
        }
        Ok(Self { values })
    }

    /// Decodes bit `i` of `bits` as the value of variable `i`: set bit means
    /// `+1`, clear bit means `-1`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        let values = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        Self { values }
    }

    /// Flips every value; the all-equal predicate is invariant under this.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

/// Fraction of constraints whose three literals agree under `asg`.
pub fn evaluate(inst: &Instance, asg: &Assignment) -> Result<f64> {
    if asg.values.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: asg.values.len(),
        });
    }
    if inst.constraints.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let sat = inst.constraints.iter().filter(|c| c.satisfied(asg)).count();
    Ok(sat as f64 / inst.constraints.len() as f64)
}

/// Per-constraint satisfaction test on a bit-packed assignment; the workhorse
/// of the exhaustive search.
#[inline]
fn satisfied_bits(c: &Constraint, bits: u64) -> bool {
    // Literal i is true iff assignment bit XOR negation bit is 1.
    let [i, j, k] = c.vars;
    let a = (bits >> i & 1) as u8 ^ (c.signs[0] == -1) as u8;
    let b = (bits >> j & 1) as u8 ^ (c.signs[1] == -1) as u8;
    let d = (bits >> k & 1) as u8 ^ (c.signs[2] == -1) as u8;
    a == b && b == d
}

/// Exhaustive optimum over all `2^n` assignments.
///
/// Ties are broken toward the smallest assignment in binary order with `-1`
/// encoded as bit 0. Requires `n <= EXHAUSTIVE_LIMIT`.
pub fn brute_force_opt(inst: &Instance) -> Result<(f64, Assignment)> {
    if inst.n > EXHAUSTIVE_LIMIT {
        return Err(Error::ExhaustiveLimit(inst.n, EXHAUSTIVE_LIMIT));
    }
    if inst.constraints.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let total: u64 = 1 << inst.n;
    let block: u64 = 1 << 16;
    let (blocks, _) = crate::exec::block_layout(total, block);

    // Per block: (best satisfied count, smallest attaining bit pattern).
    let best = crate::exec::map_blocks(blocks as usize, |b| {
        let lo = b as u64 * block;
        let hi = (lo + block).min(total);
        let mut best_count = 0usize;
        let mut best_bits = lo;
        for bits in lo..hi {
            let count = inst
                .constraints
                .iter()
                .filter(|c| satisfied_bits(c, bits))
                .count();
            if count > best_count {
                best_count = count;
                best_bits = bits;
            }
        }
        (best_count, best_bits)
    });
    // Blocks are folded in index order, so the first block attaining the
    // maximum wins and the tie-break is global.
    let (count, bits) = best
        .into_iter()
        .fold((0usize, 0u64), |acc, cur| if cur.0 > acc.0 { cur } else { acc });
    let witness = Assignment::from_bits(bits, inst.n);
    Ok((count as f64 / inst.constraints.len() as f64, witness))
}

/// Generates `m` uniformly random constraints on `n >= 3` variables,
/// deterministically in `seed`.
pub fn random_instance(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::TooFewVariables { need: 3, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars: Vec<usize> = sample(&mut rng, n, 3).into_vec();
        vars.sort_unstable();
        let signs = [
            if rng.random::<bool>() { 1 } else { -1 },
            if rng.random::<bool>() { 1 } else { -1 },
            if rng.random::<bool>() { 1 } else { -1 },
        ];
        constraints.push(Constraint::new([vars[0], vars[1], vars[2]], signs)?);
    }
    Instance::new(n, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(n: usize, cs: &[([usize; 3], [i8; 3])]) -> Instance {
        Instance::new(
            n,
            cs.iter().map(|&(v, s)| Constraint::new(v, s).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_single_constraint() {
        let i = inst(3, &[([0, 1, 2], [1, 1, 1])]);
        let all_ones = Assignment::new(vec![1, 1, 1]).unwrap();
        assert_eq!(evaluate(&i, &all_ones).unwrap(), 1.0);
        let last_flipped = Assignment::new(vec![1, 1, -1]).unwrap();
        assert_eq!(evaluate(&i, &last_flipped).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_half_satisfied() {
        let i = inst(3, &[([0, 1, 2], [1, 1, 1]), ([0, 1, 2], [1, 1, -1])]);
        let a = Assignment::new(vec![1, 1, 1]).unwrap();
        assert_eq!(evaluate(&i, &a).unwrap(), 0.5);
    }

    #[test]
    fn evaluate_errors() {
        let i = inst(3, &[([0, 1, 2], [1, 1, 1])]);
        let short = Assignment::new(vec![1, 1]).unwrap();
        assert!(matches!(
            evaluate(&i, &short),
            Err(Error::DimensionMismatch { .. })
        ));
        let empty = Instance::new(3, vec![]).unwrap();
        let a = Assignment::new(vec![1, 1, 1]).unwrap();
        assert!(matches!(evaluate(&empty, &a), Err(Error::EmptyInstance)));
    }

    #[test]
    fn constraint_validation() {
        assert!(Constraint::new([1, 0, 2], [1, 1, 1]).is_err());
        assert!(Constraint::new([0, 0, 2], [1, 1, 1]).is_err());
        assert!(Constraint::new([0, 1, 2], [1, 0, 1]).is_err());
        assert!(Instance::new(2, vec![Constraint::new([0, 1, 2], [1, 1, 1]).unwrap()]).is_err());
    }

    #[test]
    fn signs_are_canonicalized() {
        let c = Constraint::new([0, 1, 2], [-1, 1, -1]).unwrap();
        assert_eq!(c.signs, [1, -1, 1]);
    }

    #[test]
    fn brute_force_consistent_instance() {
        let i = inst(5, &[([0, 1, 2], [1, 1, 1]), ([1, 2, 4], [1, 1, 1]), ([0, 3, 4], [1, 1, 1])]);
        let (v, w) = brute_force_opt(&i).unwrap();
        assert_eq!(v, 1.0);
        // Tie-break: all -1 (bits 0) also satisfies everything and is smaller.
        assert_eq!(w.values, vec![-1; 5]);
    }

    #[test]
    fn brute_force_contradictory_pair() {
        let i = inst(3, &[([0, 1, 2], [1, 1, 1]), ([0, 1, 2], [1, 1, -1])]);
        let (v, w) = brute_force_opt(&i).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(evaluate(&i, &w).unwrap(), v);
    }

    #[test]
    fn brute_force_limit() {
        let i = inst(25, &[([0, 1, 2], [1, 1, 1])]);
        assert!(matches!(brute_force_opt(&i), Err(Error::ExhaustiveLimit(25, 24))));
    }

    /// Independent oracle: plain assignment enumeration through `evaluate`,
    /// written against the public contract only.
    fn exhaustive_reference(inst: &Instance) -> (f64, u64) {
        let mut best = (f64::NEG_INFINITY, 0u64);
        for bits in 0..1u64 << inst.n {
            let asg = Assignment::from_bits(bits, inst.n);
            let v = evaluate(inst, &asg).unwrap();
            if v > best.0 {
                best = (v, bits);
            }
        }
        best
    }

    #[test]
    fn brute_force_matches_reference_oracle() {
        let i = random_instance(12, 60, 7).unwrap();
        let (v, w) = brute_force_opt(&i).unwrap();
        let (v_ref, bits_ref) = exhaustive_reference(&i);
        assert_eq!(v, v_ref);
        assert_eq!(w, Assignment::from_bits(bits_ref, 12));
        assert_eq!(evaluate(&i, &w).unwrap(), v);
    }

    #[test]
    fn random_instance_is_deterministic() {
        let a = random_instance(10, 50, 42).unwrap();
        let b = random_instance(10, 50, 42).unwrap();
        assert_eq!(a, b);
        let c = random_instance(10, 50, 43).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn random_instance_smallest_case() {
        let i = random_instance(3, 1, 999).unwrap();
        assert_eq!(i.constraints[0].vars, [0, 1, 2]);
        assert!(random_instance(2, 1, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let i = random_instance(8, 20, 3).unwrap();
        let j = Instance::from_json(&i.to_json()).unwrap();
        assert_eq!(i, j);
    }

    #[test]
    fn json_rejects_bad_constraints() {
        let text = r#"{"n": 3, "constraints": [{"vars": [2, 1, 0], "signs": [1, 1, 1]}]}"#;
        assert!(Instance::from_json(text).is_err());
    }

    proptest! {
        #[test]
        fn evaluate_in_range_and_quantized(seed in 0u64..500, bits in 0u64..) {
            let inst = random_instance(8, 12, seed).unwrap();
            let asg = Assignment::from_bits(bits & 0xff, 8);
            let v = evaluate(&inst, &asg).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            let scaled = v * inst.num_constraints() as f64;
            prop_assert!((scaled - scaled.round()).abs() < 1e-12);
        }

        #[test]
        fn evaluate_negation_invariant(seed in 0u64..500, bits in 0u64..) {
            let inst = random_instance(8, 12, seed).unwrap();
            let asg = Assignment::from_bits(bits & 0xff, 8);
            let v = evaluate(&inst, &asg).unwrap();
            let vn = evaluate(&inst, &asg.negated()).unwrap();
            prop_assert_eq!(v, vn);
        }

        #[test]
        fn brute_force_witness_attains_value(seed in 0u64..60) {
            let inst = random_instance(9, 15, seed).unwrap();
            let (v, w) = brute_force_opt(&inst).unwrap();
            prop_assert_eq!(evaluate(&inst, &w).unwrap(), v);
        }
    }
}
