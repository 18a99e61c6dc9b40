//! Correlated-bit gadget distributions over `{-1,1}^k`, built and verified in
//! exact rational arithmetic.
//!
//! Three families live here: the equal-biased three-bit distribution with
//! pairwise correlation `1 - delta` ([`d_delta`]), the small-support pairwise
//! independent distribution ([`d_k`]), and convex mixtures with the uniform
//! distribution ([`mix`]). Floating point appears only at the sampling
//! boundary, where an alias table gives O(1) draws per column.
//!
//! Points of `{-1,1}^k` are encoded as bitmasks: bit `i` set means coordinate
//! `i` equals `+1`, matching the table encoding in [`crate::fourier`].

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Pow;
use num::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact probability type used throughout the gadget constructions.
pub type Rational = BigRational;

/// Builds a rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"2/5"`, `"0.4"`, or `"1"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::ParameterDomain {
        name: "rational",
        value: text.to_string(),
        domain: "p/q, decimal, or integer",
    };
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" {
            BigInt::from(0)
        } else {
            int.parse().map_err(|_| bad())?
        };
        let numer: BigInt = frac.parse().map_err(|_| bad())?;
        let denom = BigInt::from(10).pow(frac.len() as u32);
        let fraction = Rational::new(numer, denom);
        let whole = Rational::from(whole);
        return Ok(if negative { whole - fraction } else { whole + fraction });
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(Rational::from(n))
}

/// An exact probability mass function over `{-1,1}^k`, stored sparsely on its
/// support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmf {
    k: usize,
    mass: BTreeMap<u32, Rational>,
}

impl Pmf {
    /// Validates non-negativity and exact total mass 1.
    pub fn new(k: usize, mass: BTreeMap<u32, Rational>) -> Result<Self> {
        let mut total = Rational::zero();
        for (&point, m) in &mass {
            if point as u64 >= 1u64 << k {
                return Err(Error::CoordinateRange(point as usize, k));
            }
            if m.is_negative() {
                return Err(Error::ParameterDomain {
                    name: "mass",
                    value: m.to_string(),
                    domain: "non-negative",
                });
            }
            total += m;
        }
        if !total.is_one() {
            return Err(Error::ParameterDomain {
                name: "total mass",
                value: total.to_string(),
                domain: "exactly 1",
            });
        }
        Ok(Self { k, mass })
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    /// Mass of one point (zero off the support).
    pub fn mass_of(&self, point: u32) -> Rational {
        self.mass.get(&point).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.mass.iter().map(|(&p, m)| (p, m))
    }

    /// Smallest mass on the support.
    pub fn min_mass(&self) -> Rational {
        self.mass
            .values()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Exact moment `E[prod_{i in mask} x_i]`.
    pub fn moment(&self, mask: u32) -> Rational {
        // Group atoms by mass value so the inner sums stay in integers.
        let mut signed_counts: BTreeMap<&Rational, i64> = BTreeMap::new();
        for (&point, m) in &self.mass {
            let sign = if (point & mask).count_ones() % 2 == (mask.count_ones()) % 2 {
                // Even number of -1 coordinates inside the mask.
                1
            } else {
                -1
            };
            *signed_counts.entry(m).or_insert(0) += sign;
        }
        let mut total = Rational::zero();
        for (m, count) in signed_counts {
            total += m * Rational::from(BigInt::from(count));
        }
        total
    }

    pub fn to_json(&self) -> Result<String> {
        let atoms = self
            .mass
            .iter()
            .map(|(&point, m)| {
                let coords = (0..self.k)
                    .map(|i| if point >> i & 1 == 1 { 1i8 } else { -1i8 })
                    .collect();
                let num = m.numer().to_i64().ok_or_else(|| Error::MassOverflow(m.to_string()))?;
                let den = m.denom().to_i64().ok_or_else(|| Error::MassOverflow(m.to_string()))?;
                Ok(PmfAtom {
                    point: coords,
                    num,
                    den,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::to_string(&atoms)?)
    }

    pub fn from_json(k: usize, text: &str) -> Result<Self> {
        let atoms: Vec<PmfAtom> = serde_json::from_str(text)?;
        let mut mass = BTreeMap::new();
        for atom in atoms {
            let mut point = 0u32;
            for (i, &c) in atom.point.iter().enumerate() {
                if c != 1 && c != -1 {
                    return Err(Error::InvalidSign(c));
                }
                if c == 1 {
                    point |= 1 << i;
                }
            }
            mass.insert(point, ratio(atom.num, atom.den));
        }
        Pmf::new(k, mass)
    }
}

#[derive(Serialize, Deserialize)]
struct PmfAtom {
    point: Vec<i8>,
    num: i64,
    den: i64,
}

fn check_unit_interval(name: &'static str, v: &Rational, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        !v.is_negative() && *v <= Rational::one()
    } else {
        v.is_positive() && *v <= Rational::one()
    };
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

/// The three-bit distribution with mass `1/2 - 3 delta/8` on the two constant
/// points and `delta/8` elsewhere: uniform marginals, pairwise correlation
/// `1 - delta`, zero triple moment.
pub fn d_delta(delta: &Rational) -> Result<Pmf> {
    check_unit_interval("delta", delta, false)?;
    let heavy = ratio(1, 2) - ratio(3, 8) * delta;
    let light = ratio(1, 8) * delta;
    let mut mass = BTreeMap::new();
    for point in 0u32..8 {
        let m = if point == 0 || point == 7 { heavy.clone() } else { light.clone() };
        mass.insert(point, m);
    }
    Pmf::new(3, mass)
}

/// The small-support pairwise independent distribution on `{-1,1}^k`:
/// uniform marginals, exactly zero pairwise correlations, and
/// `Pr[all ones] = 1 / (2 ceil((k+1)/2))`.
///
/// Odd `k` puts mass `1/(k+1)` on the all-ones point and spreads the rest
/// over the level with coordinate sum -1; even `k` puts `1/(k+2)` on
/// all-ones, half the mass on the zero-sum level, and the rest on the level
/// with sum -2. The support stays polynomial in `k`, never the full cube.
pub fn d_k(k: usize) -> Result<Pmf> {
    if k < 2 {
        return Err(Error::ParameterDomain {
            name: "k",
            value: k.to_string(),
            domain: "k >= 2",
        });
    }
    if k > 30 {
        return Err(Error::ParameterDomain {
            name: "k",
            value: k.to_string(),
            domain: "k <= 30",
        });
    }
    let all_ones = (1u32 << k) - 1;
    let mut mass = BTreeMap::new();
    let level = |ones: usize| (0u32..1 << k).filter(move |p| p.count_ones() as usize == ones);
    if k % 2 == 1 {
        mass.insert(all_ones, ratio(1, (k + 1) as i64));
        // Coordinate sum -1 means (k-1)/2 coordinates are +1.
        let ones = (k - 1) / 2;
        let count = binomial(k, ones);
        let each = ratio(k as i64, (k + 1) as i64) / Rational::from(BigInt::from(count));
        for p in level(ones) {
            mass.insert(p, each.clone());
        }
    } else {
        mass.insert(all_ones, ratio(1, (k + 2) as i64));
        // Coordinate sum 0: k/2 coordinates are +1.
        let half = binomial(k, k / 2);
        let each_zero = ratio(1, 2) / Rational::from(BigInt::from(half));
        for p in level(k / 2) {
            mass.insert(p, each_zero.clone());
        }
        // Coordinate sum -2: k/2 - 1 coordinates are +1.
        let low = binomial(k, k / 2 + 1);
        let each_low =
            ratio(k as i64, (2 * k + 4) as i64) / Rational::from(BigInt::from(low));
        for p in level(k / 2 - 1) {
            mass.insert(p, each_low.clone());
        }
    }
    Pmf::new(k, mass)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Convex mixture `(1 - xi) base + xi uniform`; every atom then has mass at
/// least `xi 2^-k`.
pub fn mix(base: &Pmf, xi: &Rational) -> Result<Pmf> {
    check_unit_interval("xi", xi, true)?;
    let k = base.k;
    let uniform = ratio(1, 1 << k as i64);
    let keep = Rational::one() - xi;
    let mut mass = BTreeMap::new();
    for point in 0u32..1 << k {
        let m = keep.clone() * base.mass_of(point) + xi * uniform.clone();
        if !m.is_zero() {
            mass.insert(point, m);
        }
    }
    Pmf::new(k, mass)
}

/// O(1)-per-draw sampler over a [`Pmf`] support, built once with Vose's alias
/// method.
#[derive(Debug, Clone)]
pub struct AliasSampler {
    points: Vec<u32>,
    prob: Vec<f64>,
    alias: Vec<usize>,
    k: usize,
}

impl AliasSampler {
    pub fn new(pmf: &Pmf) -> Self {
        let points: Vec<u32> = pmf.mass.keys().copied().collect();
        let n = points.len();
        let weights: Vec<f64> = pmf
            .mass
            .values()
            .map(|m| m.to_f64().expect("mass fits f64"))
            .collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
        let mut small: Vec<usize> = (0..n).filter(|&i| scaled[i] < 1.0).collect();
        let mut large: Vec<usize> = (0..n).filter(|&i| scaled[i] >= 1.0).collect();
        while let Some(s) = small.pop() {
            match large.pop() {
                Some(l) => {
                    prob[s] = scaled[s];
                    alias[s] = l;
                    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
                    if scaled[l] < 1.0 {
                        small.push(l);
                    } else {
                        large.push(l);
                    }
                }
                // Round-off leftovers: a slot within an ulp of full.
                None => prob[s] = 1.0,
            }
        }
        for l in large {
            prob[l] = 1.0;
        }
        Self {
            points,
            prob,
            alias,
            k: pmf.k,
        }
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    /// Draws one point of the support.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let i = rng.random_range(0..self.points.len());
        if rng.random::<f64>() < self.prob[i] {
            self.points[i]
        } else {
            self.points[self.alias[i]]
        }
    }
}

/// Draws `n` i.i.d. columns from `p` and returns the `k` rows: row `a`
/// collects the `a`-th coordinate of every column.
pub fn sample_rows<R: Rng + ?Sized>(p: &Pmf, n: usize, rng: &mut R) -> Vec<Vec<i8>> {
    let sampler = AliasSampler::new(p);
    sample_rows_with(&sampler, n, rng)
}

/// Row sampling against a prebuilt alias table.
pub fn sample_rows_with<R: Rng + ?Sized>(
    sampler: &AliasSampler,
    n: usize,
    rng: &mut R,
) -> Vec<Vec<i8>> {
    let k = sampler.arity();
    let mut rows = vec![vec![0i8; n]; k];
    for col in 0..n {
        let point = sampler.draw(rng);
        for (a, row) in rows.iter_mut().enumerate() {
            row[col] = if point >> a & 1 == 1 { 1 } else { -1 };
        }
    }
    rows
}

/// Exact moment report: coordinate means, pairwise correlations, and the
/// probability of the all-ones point.
#[derive(Debug, Clone)]
pub struct PairwiseReport {
    pub means: Vec<Rational>,
    pub correlations: Vec<((usize, usize), Rational)>,
    pub all_ones: Rational,
    /// True when every mean and every pairwise correlation is exactly zero.
    pub pairwise_independent: bool,
}

/// Computes all first and second moments of `p` exactly.
pub fn verify_pairwise(p: &Pmf) -> PairwiseReport {
    let k = p.arity();
    let means: Vec<Rational> = (0..k).map(|i| p.moment(1 << i)).collect();
    let mut correlations = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            correlations.push(((a, b), p.moment(1 << a | 1 << b)));
        }
    }
    let all_ones = p.mass_of((1u32 << k) - 1);
    let pairwise_independent = means.iter().all(Rational::is_zero)
        && correlations.iter().all(|(_, c)| c.is_zero());
    PairwiseReport {
        means,
        correlations,
        all_ones,
        pairwise_independent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn d_delta_masses_and_moments() {
        let delta = ratio(1, 1000);
        let p = d_delta(&delta).unwrap();
        assert_eq!(p.mass_of(0b111), ratio(1, 2) - ratio(3, 8000));
        assert_eq!(p.mass_of(0b000), ratio(1, 2) - ratio(3, 8000));
        assert_eq!(p.mass_of(0b001), ratio(1, 8000));
        assert!(p.min_mass() >= ratio(1, 8) * &delta);

        let half = ratio(1, 2);
        let q = d_delta(&half).unwrap();
        let one_minus = Rational::one() - &half;
        for a in 0..3 {
            assert!(q.moment(1 << a).is_zero());
            for b in a + 1..3 {
                assert_eq!(q.moment(1 << a | 1 << b), one_minus);
            }
        }
        assert!(q.moment(0b111).is_zero());
        assert_eq!(q.mass_of(0b111), ratio(5, 16));
    }

    #[test]
    fn d_delta_domain() {
        assert!(d_delta(&ratio(0, 1)).is_err());
        assert!(d_delta(&ratio(3, 2)).is_err());
        assert!(d_delta(&ratio(1, 1)).is_ok());
    }

    #[test]
    fn d_k_small_cases() {
        let p3 = d_k(3).unwrap();
        assert_eq!(p3.mass_of(0b111), ratio(1, 4));
        for point in [0b100u32, 0b010, 0b001] {
            assert_eq!(p3.mass_of(point), ratio(1, 4));
        }
        assert_eq!(p3.support_len(), 4);

        let p4 = d_k(4).unwrap();
        assert_eq!(p4.mass_of(0b1111), ratio(1, 6));

        let p5 = d_k(5).unwrap();
        for a in 0..5 {
            assert!(p5.moment(1 << a).is_zero());
            for b in a + 1..5 {
                assert!(p5.moment(1 << a | 1 << b).is_zero());
            }
        }
        assert!(d_k(1).is_err());
    }

    #[test]
    fn d_k_pairwise_for_all_arities() {
        for k in 2..=16 {
            let p = d_k(k).unwrap();
            let report = verify_pairwise(&p);
            assert!(report.pairwise_independent, "k={k}");
            let ceil_half = (k + 2) / 2;
            assert_eq!(report.all_ones, ratio(1, 2 * ceil_half as i64), "k={k}");
        }
    }

    #[test]
    fn mix_arithmetic() {
        let base = d_k(3).unwrap();
        let unchanged = mix(&base, &ratio(0, 1)).unwrap();
        assert_eq!(unchanged, base);
        let uniform = mix(&base, &ratio(1, 1)).unwrap();
        for point in 0u32..8 {
            assert_eq!(uniform.mass_of(point), ratio(1, 8));
        }
        let blended = mix(&base, &ratio(1, 2)).unwrap();
        assert_eq!(blended.mass_of(0b111), ratio(3, 16));
        assert!(blended.min_mass() >= ratio(1, 2) * ratio(1, 8));
        assert!(mix(&base, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn point_mass_sampling() {
        let mut mass = BTreeMap::new();
        mass.insert(0b111u32, Rational::one());
        let p = Pmf::new(3, mass).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows = sample_rows(&p, 16, &mut rng);
        assert_eq!(rows.len(), 3);
        for row in rows {
            assert!(row.iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn sampled_correlation_matches_exact_moment() {
        let delta = ratio(2, 5);
        let p = d_delta(&delta).unwrap();
        let n = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = sample_rows(&p, n, &mut rng);
        let mean_xy: f64 = (0..n)
            .map(|c| f64::from(rows[0][c]) * f64::from(rows[1][c]))
            .sum::<f64>()
            / n as f64;
        let target = 1.0 - 0.4;
        let variance = 1.0 - target * target;
        let stderr = (variance / n as f64).sqrt();
        assert!(
            (mean_xy - target).abs() <= 4.0 * stderr,
            "empirical {mean_xy} vs exact {target} (4se = {:.2e})",
            4.0 * stderr
        );
    }

    #[test]
    fn uniform_rows_are_uncorrelated() {
        let mut mass = BTreeMap::new();
        for point in 0u32..4 {
            mass.insert(point, ratio(1, 4));
        }
        let p = Pmf::new(2, mass).unwrap();
        let n = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = sample_rows(&p, n, &mut rng);
        let mean_xy: f64 = (0..n)
            .map(|c| f64::from(rows[0][c]) * f64::from(rows[1][c]))
            .sum::<f64>()
            / n as f64;
        let stderr = (1.0 / n as f64).sqrt();
        assert!(mean_xy.abs() <= 4.0 * stderr);
    }

    #[test]
    fn verify_pairwise_reports() {
        let r7 = verify_pairwise(&d_k(7).unwrap());
        assert!(r7.pairwise_independent);
        assert_eq!(r7.all_ones, ratio(1, 8));

        let rd = verify_pairwise(&d_delta(&ratio(1, 2)).unwrap());
        assert!(!rd.pairwise_independent);
        assert!(rd.means.iter().all(Rational::is_zero));
        assert!(rd.correlations.iter().all(|(_, c)| *c == ratio(1, 2)));
        assert_eq!(rd.all_ones, ratio(5, 16));

        let mut mass = BTreeMap::new();
        for point in 0u32..8 {
            mass.insert(point, ratio(1, 8));
        }
        let uniform = Pmf::new(3, mass).unwrap();
        let ru = verify_pairwise(&uniform);
        assert!(ru.pairwise_independent);
        assert_eq!(ru.all_ones, ratio(1, 8));
    }

    #[test]
    fn pmf_validation() {
        let mut short = BTreeMap::new();
        short.insert(0u32, ratio(1, 2));
        assert!(Pmf::new(2, short).is_err());
        let mut negative = BTreeMap::new();
        negative.insert(0u32, ratio(3, 2));
        negative.insert(1u32, ratio(-1, 2));
        assert!(Pmf::new(1, negative).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = mix(&d_k(4).unwrap(), &ratio(1, 10)).unwrap();
        let text = p.to_json().unwrap();
        let q = Pmf::from_json(4, &text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("2/5").unwrap(), ratio(2, 5));
        assert_eq!(parse_rational("0.4").unwrap(), ratio(2, 5));
        assert_eq!(parse_rational("1").unwrap(), ratio(1, 1));
        assert_eq!(parse_rational(".25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("0.4e2").is_err());
    }
}
