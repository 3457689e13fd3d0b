//! Gapped iterated function systems on the unit interval and the
//! singular staircase functions they generate.
//!
//! A *gapped system* is a finite family f_0, ..., f_N (N >= 1) of
//! strictly increasing contractions of [0, 1] whose images sit strictly
//! in order,
//!
//! ```text
//! 0 <= f_0(0) < f_0(1) <= f_1(0) < ... <= f_N(0) < f_N(1) <= 1,
//! ```
//!
//! and do not cover the whole interval. Iterating the images carves out
//! a Cantor-like attractor; a probability vector p places the invariant
//! measure on it, and the cumulative distribution function of that
//! measure is the unique increasing continuous solution phi with
//! phi(0) = 0, phi(1) = 1 of
//!
//! ```text
//! phi(x) = sum_n phi(f_n(x)) - sum_n phi(f_n(0)).
//! ```
//!
//! The crate constructs each layer of that picture and verifies its
//! properties at desk scale:
//!
//! * [`contraction`]: validated systems of affine or general increasing
//!   contractions, exact rational arithmetic wherever the data is
//!   rational ([`scalar`]);
//! * [`attractor`]: level sets, the gap decomposition, point location,
//!   and isolated-point probes;
//! * [`coding`]: digit addresses, the transfer map, the coding map and
//!   its ambiguity bookkeeping;
//! * [`measure`]: cylinder and interval masses, address sampling, and
//!   Monte Carlo checks for measure preservation and mixing;
//! * [`solution`]: evaluation of phi with rigorous error bounds, plateau
//!   constants, boundary identities, equation residuals and
//!   singularity evidence;
//! * [`analysis`]: linear independence of solution families,
//!   likelihood separation of measures, convex-hull membership.

pub mod analysis;
pub mod attractor;
pub mod coding;
pub mod contraction;
pub mod error;
pub mod families;
pub mod measure;
pub mod scalar;
pub mod solution;

pub use analysis::{
    convex_member_check, independence_rank, singularity_probe, ConvexReport, ProbeReport,
    RankReport, SampleMatrix, RANK_THRESHOLD_RATIO,
};
pub use attractor::{
    gaps, level_set, locate, measure_bound, perfectness_probe, Gap, GapDecomposition,
    IntervalSet, Location, PerfectnessWitness, Side, ENUMERATION_CAP,
};
pub use coding::{
    ambiguity, canonicalize, commute_check, extract_address, pi, shift, transfer, Address,
    AmbiguityTable, PointApprox, Tail,
};
pub use contraction::{
    AffineMap, ContractionMap, ContractionSystem, GeneralMap, Tolerances, DEFAULT_TOL_FIX,
    DEFAULT_TOL_INV, DEFAULT_TOL_PHI,
};
pub use error::{Error, Result};
pub use families::family;
pub use measure::{
    atom_bound, cylinder_mass, cylinders, interval_mass, mixing_estimate, preservation_check,
    sample_address, CylinderSpec, EstimatorReport, ProbabilityVector,
};
pub use scalar::Scalar;
pub use solution::{
    affine_combination_monotone, affine_combination_residual, BoundaryCheck, BoundaryReport,
    PhiValue, PlateauValue, SingularityEvidence, SolutionPhi,
};
