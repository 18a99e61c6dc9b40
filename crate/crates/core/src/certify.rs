//! Certified computation of the approximation-ratio constant.
//!
//! The worst-case ratio of rounding probability to SDP contribution reduces
//! to the infimum of single-variable arccosine expressions. Three branches
//! cover the weight simplex:
//!
//! - interior critical points with the small weight in front:
//!   `(1 - (pi + acos(4a-1))/(2 pi))/a` on `(0, 1/4]`, whose infimum is
//!   exactly 1 by monotonicity;
//! - symmetric interior critical points: [`h2`] on `(1/4, 1]`, scanned as
//!   [`g_substituted`] over `[0, pi/2)` after the change of variables
//!   `(4a-1)/3 = cos x`;
//! - simplex-boundary suprema: [`h1`] on `(0, 1]`.
//!
//! Each scanned branch gets a certified interval: analytic lower bounds
//! discharge the regions where the function provably stays high, and the
//! rest is covered by a uniform grid whose spacing `s` satisfies
//! `L s / 2 + eval_error <= 1e-4` for a proven Lipschitz bound `L`. The
//! evaluation-error budget assumes `acos` is correctly rounded to within a
//! few ulp; a tenfold grid-refinement stability test guards that assumption.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;

use std::f64::consts::PI;

/// Per-point evaluation error budget (libm `acos` is good to a few ulp,
/// far below this).
pub const EVAL_ERROR: f64 = 1e-6;
/// Total allowed gap between the reported minimum and the true infimum on a
/// scanned region.
pub const SCAN_BUDGET: f64 = 1e-4;

/// Boundary-branch objective `(1 - (2 acos(a) + acos(2a-1))/(2 pi))/a`.
pub fn h1(a: f64) -> Result<f64> {
    check_unit(a, "a")?;
    Ok((1.0 - (2.0 * a.acos() + (2.0 * a - 1.0).acos()) / (2.0 * PI)) / a)
}

/// Symmetric-branch objective `(1 - 3 acos((4a-1)/3)/(2 pi))/a`.
pub fn h2(a: f64) -> Result<f64> {
    check_unit(a, "a")?;
    Ok((1.0 - 3.0 * ((4.0 * a - 1.0) / 3.0).acos() / (2.0 * PI)) / a)
}

/// [`h2`] after the substitution `(4a-1)/3 = cos x`:
/// `4 (1 - 3x/(2 pi)) / (1 + 3 cos x)` on `[0, pi/2)`.
pub fn g_substituted(x: f64) -> Result<f64> {
    if !(0.0..PI / 2.0).contains(&x) {
        return Err(Error::ParameterDomain {
            name: "x",
            value: x.to_string(),
            domain: "[0, pi/2)",
        });
    }
    Ok(4.0 * (1.0 - 3.0 * x / (2.0 * PI)) / (1.0 + 3.0 * x.cos()))
}

/// Hardness-side form `(1 - 3 acos(1-delta)/(2 pi))/(1 - 3 delta/4)`,
/// equal to `h2` under `delta = 4(1-a)/3`.
pub fn delta_form(delta: f64) -> Result<f64> {
    check_unit(delta, "delta")?;
    Ok((1.0 - 3.0 * (1.0 - delta).acos() / (2.0 * PI)) / (1.0 - 0.75 * delta))
}

/// Supremum of the per-triple arccosine sum over the simplex boundary at
/// fixed leading weight `a`: `acos(2a-1) + 2 acos(a)`.
pub fn boundary_sup(a: f64) -> Result<f64> {
    check_unit(a, "a")?;
    Ok((2.0 * a - 1.0).acos() + 2.0 * a.acos())
}

/// Supremum of the arccosine sum over interior critical points:
/// `pi + acos(4a-1)` up to `a = 1/4`, then `3 acos((4a-1)/3)`.
pub fn critical_sup(a: f64) -> Result<f64> {
    check_unit(a, "a")?;
    Ok(if a <= 0.25 {
        PI + (4.0 * a - 1.0).acos()
    } else {
        3.0 * ((4.0 * a - 1.0) / 3.0).acos()
    })
}

/// Supremum of the arccosine sum over the whole weight simplex at fixed `a`:
/// the larger of the boundary and interior-critical branches.
pub fn psi(a: f64) -> Result<f64> {
    Ok(boundary_sup(a)?.max(critical_sup(a)?))
}

fn check_unit(v: f64, name: &'static str) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value: v.to_string(),
            domain: "(0, 1]",
        })
    }
}

/// An analytic region discharge: the function is at least `lower_bound` on
/// `[lo, hi]` by a proven inequality, so no samples are needed there.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnalyticRegion {
    pub lo: f64,
    pub hi: f64,
    pub lower_bound: f64,
}

/// A closed interval guaranteed to contain an infimum, with the provenance
/// of the guarantee.
#[derive(Debug, Clone, Serialize)]
pub struct CertifiedInterval {
    pub lo: f64,
    pub hi: f64,
    /// Grid point attaining the observed minimum.
    pub argmin_estimate: f64,
    pub grid_points: usize,
    pub lipschitz_bound: f64,
    pub eval_error: f64,
    /// Grid spacing actually used.
    pub spacing: f64,
    /// Scanned range (the grid covers `[grid_lo, grid_hi]` inclusively).
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub analytic_regions: Vec<AnalyticRegion>,
}

impl CertifiedInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Scans `f` over an inclusive uniform grid on `[lo, hi]` whose spacing
/// meets the Lipschitz budget, returning the observed minimum and argmin.
/// Blocks are reduced in index order with strict-improvement ties, so the
/// result does not depend on thread count.
fn grid_min<F>(lo: f64, hi: f64, lipschitz: f64, f: F, sequential: bool) -> (f64, f64, usize, f64)
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let max_spacing = 2.0 * (SCAN_BUDGET - EVAL_ERROR) / lipschitz;
    let points = ((hi - lo) / max_spacing).ceil() as usize + 1;
    let spacing = (hi - lo) / (points - 1) as f64;
    const BLOCK: u64 = 1 << 16;
    let (blocks, _) = exec::block_layout(points as u64, BLOCK);
    let worker = |b: usize| {
        let start = b as u64 * BLOCK;
        let end = (start + BLOCK).min(points as u64);
        let mut best = (f64::INFINITY, lo);
        for idx in start..end {
            // The last grid point lands exactly on `hi`.
            let x = if idx as usize + 1 == points { hi } else { lo + idx as f64 * spacing };
            let v = f(x);
            if v < best.0 {
                best = (v, x);
            }
        }
        best
    };
    let partials = if sequential {
        exec::map_blocks_seq(blocks as usize, worker)
    } else {
        exec::map_blocks(blocks as usize, worker)
    };
    let (min, argmin) = partials
        .into_iter()
        .fold((f64::INFINITY, lo), |acc, cur| if cur.0 < acc.0 { cur } else { acc });
    (min, argmin, points, spacing)
}

fn certified_from_scan(
    (min, argmin, points, spacing): (f64, f64, usize, f64),
    lipschitz: f64,
    grid_lo: f64,
    grid_hi: f64,
    regions: Vec<AnalyticRegion>,
) -> CertifiedInterval {
    // True inf over the scanned range is within L s/2 + eval error below the
    // observed minimum, and at most eval error above it. The analytic
    // regions only matter if their lower bounds undercut the interval.
    let budget = lipschitz * spacing / 2.0 + EVAL_ERROR;
    let mut lo = min - budget;
    let hi = min + EVAL_ERROR;
    for r in &regions {
        if r.lower_bound < lo {
            lo = r.lower_bound;
        }
    }
    CertifiedInterval {
        lo,
        hi,
        argmin_estimate: argmin,
        grid_points: points,
        lipschitz_bound: lipschitz,
        eval_error: EVAL_ERROR,
        spacing,
        grid_lo,
        grid_hi,
        analytic_regions: regions,
    }
}

/// Boundary-branch scan range and proven bounds: below 0.179 the function
/// stays above 0.85, above 0.99 it stays above 0.83, and on the middle its
/// derivative is bounded by 500.
const H1_GRID_LO: f64 = 0.179;
const H1_GRID_HI: f64 = 0.99;
const H1_LIPSCHITZ: f64 = 500.0;

/// Certified interval for the infimum of [`h1`] over `(0, 1]`.
///
/// The divergence of `h1` toward the open left endpoint lives entirely in
/// the analytic region, so it is never sampled.
pub fn certify_h1_infimum() -> CertifiedInterval {
    certify_h1_impl(false)
}

/// Always-sequential twin of [`certify_h1_infimum`]; identical output.
pub fn certify_h1_infimum_seq() -> CertifiedInterval {
    certify_h1_impl(true)
}

fn certify_h1_impl(sequential: bool) -> CertifiedInterval {
    let scan = grid_min(
        H1_GRID_LO,
        H1_GRID_HI,
        H1_LIPSCHITZ,
        |a| h1(a).expect("grid stays inside (0,1]"),
        sequential,
    );
    certified_from_scan(
        scan,
        H1_LIPSCHITZ,
        H1_GRID_LO,
        H1_GRID_HI,
        vec![
            AnalyticRegion { lo: 0.0, hi: H1_GRID_LO, lower_bound: 0.85 },
            AnalyticRegion { lo: H1_GRID_HI, hi: 1.0, lower_bound: 0.83 },
        ],
    )
}

const G_LIPSCHITZ: f64 = 50.0;

/// Full certificate for the approximation constant: the three branch infima
/// and their combination.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaCertificate {
    /// Interval containing the approximation constant.
    pub alpha: CertifiedInterval,
    /// Interval for the symmetric interior branch (the active one).
    pub interior_branch: CertifiedInterval,
    /// Interval for the simplex-boundary branch.
    pub boundary_branch: CertifiedInterval,
    /// Exact infimum of the small-weight branch (analytic).
    pub small_weight_branch_value: f64,
    /// Weight attaining the infimum, recovered through the substitution.
    pub argmin_a: f64,
    /// Matching noise level `4(1-a)/3`, confirming it stays below 1.
    pub argmin_delta: f64,
}

/// Certified computation of the approximation constant as the least of the
/// three branch infima. The active branch is scanned as [`g_substituted`]
/// over `[0, pi/2]` with Lipschitz bound 50; the endpoint value
/// `g(pi/2) = 1` is not competitive, so including it only tightens the scan.
pub fn certify_alpha() -> AlphaCertificate {
    certify_alpha_impl(false)
}

/// Always-sequential twin of [`certify_alpha`]; identical output.
pub fn certify_alpha_seq() -> AlphaCertificate {
    certify_alpha_impl(true)
}

fn certify_alpha_impl(sequential: bool) -> AlphaCertificate {
    let g_closed = |x: f64| {
        // Continuous extension to the closed endpoint.
        4.0 * (1.0 - 3.0 * x / (2.0 * PI)) / (1.0 + 3.0 * x.cos())
    };
    let scan = grid_min(0.0, PI / 2.0, G_LIPSCHITZ, g_closed, sequential);
    let interior = certified_from_scan(scan, G_LIPSCHITZ, 0.0, PI / 2.0, vec![]);
    let boundary = certify_h1_impl(sequential);
    let small_weight_branch_value = 1.0;

    let argmin_a = (1.0 + 3.0 * interior.argmin_estimate.cos()) / 4.0;
    let argmin_delta = 4.0 * (1.0 - argmin_a) / 3.0;
    let lo = interior
        .lo
        .min(boundary.lo)
        .min(small_weight_branch_value);
    let hi = interior
        .hi
        .min(boundary.hi)
        .min(small_weight_branch_value);
    let alpha = CertifiedInterval {
        lo,
        hi,
        argmin_estimate: argmin_a,
        grid_points: interior.grid_points + boundary.grid_points,
        lipschitz_bound: G_LIPSCHITZ.max(H1_LIPSCHITZ),
        eval_error: EVAL_ERROR,
        spacing: interior.spacing.max(boundary.spacing),
        grid_lo: 0.0,
        grid_hi: 1.0,
        analytic_regions: boundary.analytic_regions.clone(),
    };
    AlphaCertificate {
        alpha,
        interior_branch: interior,
        boundary_branch: boundary,
        small_weight_branch_value,
        argmin_a,
        argmin_delta,
    }
}

/// Result of checking one trigonometric inequality on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct FactCheck {
    pub name: &'static str,
    /// Worst value of RHS - LHS over the grid (for the monotonicity check,
    /// the worst consecutive decrease).
    pub worst_margin: f64,
    pub grid_points: usize,
}

/// Report over the whole inequality suite.
#[derive(Debug, Clone, Serialize)]
pub struct TrigReport {
    pub facts: Vec<FactCheck>,
}

impl TrigReport {
    /// True when every margin clears `-slack`.
    pub fn all_pass(&self, slack: f64) -> bool {
        self.facts.iter().all(|f| f.worst_margin >= -slack)
    }
}

/// Checks the seven arccosine inequalities underpinning the region bounds
/// and branch comparisons, each on a uniform `grid`-point grid of its stated
/// domain. Equality endpoints make zero margins legitimate, so callers
/// should allow a small negative slack for round-off.
pub fn verify_trig_facts(grid: usize) -> Result<TrigReport> {
    if grid < 2 {
        return Err(Error::ParameterDomain {
            name: "grid",
            value: grid.to_string(),
            domain: ">= 2",
        });
    }
    let scan = |lo: f64, hi: f64, f: &(dyn Fn(f64) -> f64 + Sync)| -> f64 {
        (0..grid)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
                f(x)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut facts = Vec::new();

    facts.push(FactCheck {
        name: "2 acos(a) - acos(2a-1) >= 0 on [0,1]",
        worst_margin: scan(0.0, 1.0, &|a| 2.0 * a.acos() - (2.0 * a - 1.0).acos()),
        grid_points: grid,
    });

    // Split comparison around zero: the difference changes direction.
    let upper = scan(0.0, 1.0, &|x| 3.0 * (x / 3.0).acos() - PI - x.acos());
    let lower = scan(-1.0, 0.0, &|x| PI + x.acos() - 3.0 * (x / 3.0).acos());
    facts.push(FactCheck {
        name: "pi + acos(x) vs 3 acos(x/3): <= for x>=0, >= for x<=0",
        worst_margin: upper.min(lower),
        grid_points: 2 * grid,
    });

    // Monotone decrease of the small-weight branch on (0, 1/4]: compare
    // consecutive grid values.
    let f3 = |x: f64| (1.0 - (PI + (4.0 * x - 1.0).acos()) / (2.0 * PI)) / x;
    let mono = (1..grid)
        .map(|i| {
            let step = 0.25 / grid as f64;
            let x0 = i as f64 * step;
            let x1 = x0 + step;
            f3(x0) - f3(x1)
        })
        .fold(f64::INFINITY, f64::min);
    facts.push(FactCheck {
        name: "(1 - (pi + acos(4x-1))/(2 pi))/x decreasing on (0, 1/4]",
        worst_margin: mono,
        grid_points: grid,
    });

    facts.push(FactCheck {
        name: "acos(x) <= pi/2 - x on [0,1]",
        worst_margin: scan(0.0, 1.0, &|x| PI / 2.0 - x - x.acos()),
        grid_points: grid,
    });
    facts.push(FactCheck {
        name: "acos(x-1) <= pi - sqrt(x) on [0,1]",
        worst_margin: scan(0.0, 1.0, &|x| PI - x.sqrt() - (x - 1.0).acos()),
        grid_points: grid,
    });
    facts.push(FactCheck {
        name: "acos(x) <= 3 sqrt(1-x) on [0,1]",
        worst_margin: scan(0.0, 1.0, &|x| 3.0 * (1.0 - x).sqrt() - x.acos()),
        grid_points: grid,
    });
    facts.push(FactCheck {
        name: "acos(2x-1) <= 5 sqrt(1-x) on [0.9,1]",
        worst_margin: scan(0.9, 1.0, &|x| {
            5.0 * (1.0 - x).sqrt() - (2.0 * x - 1.0).clamp(-1.0, 1.0).acos()
        }),
        grid_points: grid,
    });

    Ok(TrigReport { facts })
}
