//! Structure of the solution family.
//!
//! Varying the probability vector over one system produces a family of
//! solutions. Three finite witnesses of its structure live here:
//!
//! * [`independence_rank`]: a sample matrix of exact plateau values,
//!   one row per solution, has full numerical rank, witnessing linear
//!   independence of the family;
//! * [`singularity_probe`]: for two weight vectors, the depth-k
//!   cylinders vote by likelihood ratio; each measure concentrates on
//!   its own side as k grows, the quantitative shadow of mutual
//!   singularity;
//! * [`convex_member_check`]: convex combinations stay inside the
//!   solution class (monotone, pinned ends, equation residual small).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::attractor::{gaps, Gap, ENUMERATION_CAP};
use crate::contraction::ContractionSystem;
use crate::error::{Error, Result};
use crate::measure::ProbabilityVector;
use crate::scalar::Scalar;
use crate::solution::{
    affine_combination_monotone, affine_combination_residual, combination_value, SolutionPhi,
};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_THRESHOLD_RATIO: f64 = 1e-8;

const GRID_DEPTH_CAP: usize = 24;

/// Exact evaluations of a solution family on a shared grid of gap
/// midpoints; rows are solutions, columns grid points.
#[derive(Clone, Debug, Serialize)]
pub struct SampleMatrix {
    pub grid: Vec<Scalar>,
    pub entries: Vec<Vec<Scalar>>,
}

/// Rank certificate for a solution family.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub p_vectors: Vec<String>,
    pub grid: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub threshold: f64,
}

/// Likelihood-ratio separation of two measures at one resolution:
/// `mass_p` and `mass_q` are the p- and q-masses of the set of depth-k
/// cylinders whose digit statistics favor p.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub depth: usize,
    pub mass_p: Scalar,
    pub mass_q: Scalar,
    pub classes: usize,
    pub ties: usize,
}

/// Outcome of the convex-combination membership checks.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexReport {
    pub weights: Vec<f64>,
    pub grid: usize,
    pub monotone: bool,
    pub value_at_zero: f64,
    pub value_at_one: f64,
    pub max_residual: f64,
    pub residual_bound: f64,
    pub pass: bool,
}

fn vectors_equal(a: &ProbabilityVector, b: &ProbabilityVector) -> bool {
    a.len() == b.len() && (0..a.len()).all(|n| a.scalar(n) == b.scalar(n))
}

/// The first `m` gaps in depth-then-lexicographic order. Their midpoints
/// grid the hull while avoiding the flanks, and the solution values
/// there are exact plateau constants.
fn gap_grid(system: &ContractionSystem, m: usize) -> Result<Vec<Gap>> {
    for depth in 1..=GRID_DEPTH_CAP {
        let decomposition = gaps(system, depth)?;
        if decomposition.gaps.len() >= m {
            let mut out = decomposition.gaps;
            out.truncate(m);
            return Ok(out);
        }
    }
    Err(Error::DepthTooLarge {
        what: "gap grid",
        depth: GRID_DEPTH_CAP,
        cap: m,
    })
}

/// Build the sample matrix of a family over one system and return its
/// numerical rank by singular-value thresholding. Full rank (the number
/// of vectors) witnesses linear independence of the family; a deficient
/// rank is never claimed as a disproof.
pub fn independence_rank(
    system: &Arc<ContractionSystem>,
    ps: &[ProbabilityVector],
    m: usize,
) -> Result<RankReport> {
    if ps.is_empty() {
        return Err(Error::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            if vectors_equal(p, q) {
                return Err(Error::DuplicateVectors);
            }
        }
    }
    if m < ps.len() + 2 {
        return Err(Error::LengthMismatch {
            expected: ps.len() + 2,
            got: m,
        });
    }

    let grid = gap_grid(system, m)?;
    let solutions: Vec<SolutionPhi> = ps
        .iter()
        .map(|p| SolutionPhi::new(system.clone(), p.clone()))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(solutions.len());
    for sol in &solutions {
        let row: Vec<Scalar> = grid
            .iter()
            .map(|g| sol.plateau(&g.digits).map(|p| p.value))
            .collect::<Result<_>>()?;
        entries.push(row);
    }
    let matrix = DMatrix::from_fn(entries.len(), m, |i, j| entries[i][j].to_f64());
    let mut singular_values: Vec<f64> = matrix.svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let threshold = RANK_THRESHOLD_RATIO * singular_values[0];
    let rank = singular_values.iter().filter(|s| **s > threshold).count();
    Ok(RankReport {
        p_vectors: ps.iter().map(describe_vector).collect(),
        grid: grid.iter().map(|g| g.midpoint().to_f64()).collect(),
        singular_values,
        rank,
        threshold,
    })
}

fn describe_vector(p: &ProbabilityVector) -> String {
    let parts: Vec<String> = (0..p.len()).map(|n| p.scalar(n).to_string()).collect();
    format!("({})", parts.join(", "))
}

fn multinomial(k: usize, counts: &[usize]) -> BigInt {
    let mut coeff = BigInt::one();
    let mut remaining = k;
    for &c in counts {
        coeff *= binomial(BigInt::from(remaining), BigInt::from(c));
        remaining -= c;
    }
    coeff
}

fn class_count(k: usize, parts: usize) -> usize {
    // Number of digit-count classes: C(k + parts - 1, parts - 1).
    let mut acc: u128 = 1;
    for i in 1..parts {
        acc = acc.saturating_mul((k + i) as u128) / i as u128;
        if acc > ENUMERATION_CAP as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn for_each_class(k: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
    fn recurse(
        remaining: usize,
        parts_left: usize,
        counts: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if parts_left == 1 {
            counts.push(remaining);
            f(counts);
            counts.pop();
            return;
        }
        for c in 0..=remaining {
            counts.push(c);
            recurse(remaining - c, parts_left - 1, counts, f);
            counts.pop();
        }
    }
    let mut counts = Vec::with_capacity(parts);
    recurse(k, parts, &mut counts, f);
}

/// Separate two measures by depth-k digit statistics.
///
/// Cylinders are grouped by digit-count class (masses depend only on
/// counts, which keeps the sweep polynomial in k). A class joins S_p
/// when its p-likelihood strictly exceeds its q-likelihood; the report
/// carries the exact p- and q-masses of S_p. As k grows, mass_p climbs
/// to 1 and mass_q falls to 0: the measures live on disjoint sets in the
/// limit.
pub fn singularity_probe(
    system: &ContractionSystem,
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    k: usize,
) -> Result<ProbeReport> {
    if p.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: p.len(),
        });
    }
    if q.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: q.len(),
        });
    }
    if vectors_equal(p, q) {
        return Err(Error::VectorsEqual);
    }
    let parts = system.len();
    if class_count(k, parts) > ENUMERATION_CAP {
        return Err(Error::DepthTooLarge {
            what: "digit-count classes",
            depth: k,
            cap: ENUMERATION_CAP,
        });
    }

    let mut mass_p = Scalar::zero();
    let mut mass_q = Scalar::zero();
    let mut classes = 0usize;
    let mut ties = 0usize;
    for_each_class(k, parts, &mut |counts| {
        classes += 1;
        let mut like_p = Scalar::one();
        let mut like_q = Scalar::one();
        for (n, &c) in counts.iter().enumerate() {
            like_p = &like_p * &p.scalar(n).powi(c as u32);
            like_q = &like_q * &q.scalar(n).powi(c as u32);
        }
        match like_p.cmp(&like_q) {
            std::cmp::Ordering::Greater => {
                let coeff = Scalar::Exact(BigRational::from_integer(multinomial(k, counts)));
                mass_p = &mass_p + &(&coeff * &like_p);
                mass_q = &mass_q + &(&coeff * &like_q);
            }
            std::cmp::Ordering::Equal => ties += 1,
            std::cmp::Ordering::Less => {}
        }
    });
    Ok(ProbeReport {
        depth: k,
        mass_p,
        mass_q,
        classes,
        ties,
    })
}

/// Check that a convex combination of solutions behaves like a solution:
/// monotone on a uniform grid, 0 at 0, 1 at 1, and equation residual
/// within the accumulated tolerance at every grid point.
pub fn convex_member_check(
    system: &Arc<ContractionSystem>,
    ps: &[ProbabilityVector],
    weights: &[f64],
    m: usize,
) -> Result<ConvexReport> {
    if weights.len() != ps.len() {
        return Err(Error::LengthMismatch {
            expected: ps.len(),
            got: weights.len(),
        });
    }
    for w in weights {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::BadWeights(format!(
                "convex weights must be nonnegative, got {w}"
            )));
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights(format!(
            "convex weights sum to {total}, not 1"
        )));
    }
    if m == 0 {
        return Err(Error::BadWeights("grid size must be positive".into()));
    }

    let solutions: Vec<SolutionPhi> = ps
        .iter()
        .map(|p| SolutionPhi::new(system.clone(), p.clone()))
        .collect::<Result<_>>()?;
    let tol_max = solutions
        .iter()
        .map(|s| s.tol_phi())
        .fold(0.0_f64, f64::max);
    let end_tol = tol_max + 1e-12;

    let value_at_zero = combination_value(&solutions, weights, 0.0, &Scalar::zero())?;
    let value_at_one = combination_value(&solutions, weights, 0.0, &Scalar::one())?;
    let monotone = affine_combination_monotone(&solutions, weights, 0.0, m)?;

    // On the shifted equation the n = 0 constant term is phi(f_0(0)) = 0
    // for every member, so this residual is also the residual of the
    // original equation with both sums full.
    let residual_bound = (2.0 * system.len() as f64 + 1.0) * tol_max + 1e-12;
    let mut max_residual = 0.0_f64;
    for i in 0..=m {
        let x = i as f64 / m as f64;
        let r = affine_combination_residual(&solutions, weights, 0.0, x)?;
        max_residual = max_residual.max(r.abs());
    }

    let pass = monotone
        && value_at_zero.abs() <= end_tol
        && (value_at_one - 1.0).abs() <= end_tol
        && max_residual <= residual_bound;
    Ok(ConvexReport {
        weights: weights.to_vec(),
        grid: m,
        monotone,
        value_at_zero,
        value_at_one,
        max_residual,
        residual_bound,
        pass,
    })
}
