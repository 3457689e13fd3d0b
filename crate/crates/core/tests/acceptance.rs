//! Acceptance suite: ten end-to-end checks, one per release criterion,
//! each printing a single PASS/FAIL line (run with --nocapture to see
//! them all). Tolerances are pinned here, next to the assertions.

mod common;

use std::sync::Arc;

use common::{cantor, cantor_oracle, shifted, touching, weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staircase::{
    affine_combination_monotone, affine_combination_residual, atom_bound, canonicalize,
    commute_check, cylinder_mass, cylinders, extract_address, gaps, independence_rank,
    interval_mass, level_set, mixing_estimate, pi, preservation_check, Address,
    ContractionSystem, ProbabilityVector, Scalar, SolutionPhi, Tail,
};

fn conclude(number: usize, desc: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {number}: PASS - {desc}");
    } else {
        println!("criterion {number}: FAIL - {desc}");
        for f in &failures {
            println!("    {f}");
        }
        panic!("criterion {number} failed {} check(s)", failures.len());
    }
}

fn solution(system: &Arc<ContractionSystem>, entries: &[(i64, i64)]) -> SolutionPhi {
    SolutionPhi::new(system.clone(), weights(entries)).expect("valid solution")
}

#[test]
fn criterion_01_cantor_oracle() {
    const TOL: f64 = 1e-9;
    let mut failures = Vec::new();
    let phi = solution(&cantor(), &[(1, 2), (1, 2)]);

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for i in 0..1000 {
        let x: f64 = rng.random();
        let got = phi.eval(x).expect("in domain").value.to_f64();
        let want = cantor_oracle(x);
        if (got - want).abs() > TOL {
            failures.push(format!(
                "point {i}: phi({x}) = {got}, oracle gives {want}, gap {}",
                (got - want).abs()
            ));
        }
    }

    let spots = [
        (0.25, 1.0 / 3.0),
        (1.0 / 3.0, 0.5),
        (2.0 / 3.0, 0.5),
        (1.0 / 9.0, 0.25),
    ];
    for (x, expected) in spots {
        let got = phi.eval(x).expect("in domain").value.to_f64();
        let oracle = cantor_oracle(x);
        if (got - expected).abs() > TOL || (oracle - expected).abs() > TOL {
            failures.push(format!(
                "spot phi({x}): eval {got}, oracle {oracle}, expected {expected}"
            ));
        }
    }

    conclude(
        1,
        "staircase evaluation matches the ternary-to-binary oracle at 1000 points",
        failures,
    );
}

#[test]
fn criterion_02_equation_residual() {
    const TOL: f64 = 1e-8;
    const POINTS: usize = 1000;
    let mut failures = Vec::new();

    let cases = [
        ("middle-thirds, p=(1/2,1/2)", solution(&cantor(), &[(1, 2), (1, 2)])),
        ("middle-thirds, p=(1/3,2/3)", solution(&cantor(), &[(1, 3), (2, 3)])),
        (
            "touching triple, p=(1/4,1/4,1/2)",
            solution(&touching(), &[(1, 4), (1, 4), (1, 2)]),
        ),
        ("shifted pair, p=(1/2,1/2)", solution(&shifted(), &[(1, 2), (1, 2)])),
    ];
    for (label, phi) in &cases {
        let mut worst = 0.0_f64;
        for i in 0..POINTS {
            let x = i as f64 / (POINTS - 1) as f64;
            let r = phi.equation_residual(x).expect("in domain").abs();
            worst = worst.max(r);
        }
        if worst > TOL {
            failures.push(format!("{label}: max |residual| = {worst:e} > {TOL:e}"));
        }
    }

    conclude(
        2,
        "functional-equation residual stays under 1e-8 on a 1000-point grid",
        failures,
    );
}

#[test]
fn criterion_03_boundary_identities() {
    let mut failures = Vec::new();
    let cases = [
        ("middle-thirds, p=(1/2,1/2)", solution(&cantor(), &[(1, 2), (1, 2)])),
        ("middle-thirds, p=(1/3,2/3)", solution(&cantor(), &[(1, 3), (2, 3)])),
        (
            "touching triple, p=(1/4,1/4,1/2)",
            solution(&touching(), &[(1, 4), (1, 4), (1, 2)]),
        ),
        ("shifted pair, p=(1/2,1/2)", solution(&shifted(), &[(1, 2), (1, 2)])),
    ];
    for (label, phi) in &cases {
        let report = phi.boundary_report().expect("report");
        if !report.pass {
            failures.push(format!("{label}: boundary report failed"));
        }
        for check in &report.checks {
            if check.lhs != check.rhs {
                failures.push(format!(
                    "{label}: {} is not an exact identity ({:?} vs {:?})",
                    check.name, check.lhs, check.rhs
                ));
            }
        }
    }

    conclude(
        3,
        "boundary and plateau identities hold exactly in rational mode",
        failures,
    );
}

#[test]
fn criterion_04_level_set_geometry() {
    let mut failures = Vec::new();
    let system = cantor();

    let sets: Vec<_> = (0..=10)
        .map(|k| level_set(&system, k).expect("level set"))
        .collect();
    for (k, set) in sets.iter().enumerate() {
        let want = Scalar::ratio(2, 3).powi(k as u32);
        if set.total_length() != want {
            failures.push(format!(
                "level {k}: total length {} instead of (2/3)^{k}",
                set.total_length().to_f64()
            ));
        }
    }
    for k in 0..10 {
        if !sets[k + 1].is_subset_of(&sets[k]) {
            failures.push(format!("level {} is not inside level {k}", k + 1));
        }
        if sets[k + 1].total_length() >= sets[k].total_length() {
            failures.push(format!("inclusion of level {} is not strict", k + 1));
        }
    }

    let decomposition = gaps(&system, 3).expect("gaps");
    let expected: [(usize, &[(i64, i64, i64, i64)]); 3] = [
        (1, &[(1, 3, 2, 3)]),
        (2, &[(1, 9, 2, 9), (7, 9, 8, 9)]),
        (
            3,
            &[(1, 27, 2, 27), (7, 27, 8, 27), (19, 27, 20, 27), (25, 27, 26, 27)],
        ),
    ];
    for (depth, wants) in expected {
        let got: Vec<_> = decomposition.at_depth(depth).collect();
        if got.len() != wants.len() {
            failures.push(format!(
                "depth {depth}: {} gaps instead of {}",
                got.len(),
                wants.len()
            ));
            continue;
        }
        for (gap, &(ln, ld, rn, rd)) in got.iter().zip(wants) {
            if gap.left != Scalar::ratio(ln, ld) || gap.right != Scalar::ratio(rn, rd) {
                failures.push(format!(
                    "depth {depth}: gap ({}, {}) instead of ({ln}/{ld}, {rn}/{rd})",
                    gap.left.to_f64(),
                    gap.right.to_f64()
                ));
            }
        }
    }

    conclude(
        4,
        "middle-thirds level sets shrink as (2/3)^k and gaps match the closed form",
        failures,
    );
}

#[test]
fn criterion_05_singular_support() {
    const SUPPORT_BOUND: f64 = 0.02;
    let mut failures = Vec::new();
    let phi = solution(&cantor(), &[(1, 2), (1, 2)]);
    let evidence = phi.singularity_evidence(10).expect("evidence");

    if evidence.variation != Scalar::one() {
        failures.push(format!(
            "variation on the level set is {} instead of exactly 1",
            evidence.variation.to_f64()
        ));
    }
    if evidence.support_length != Scalar::ratio(2, 3).powi(10) {
        failures.push(format!(
            "support length {} is not exactly (2/3)^10",
            evidence.support_length.to_f64()
        ));
    }
    if evidence.support_length.to_f64() > SUPPORT_BOUND {
        failures.push(format!(
            "support length {} exceeds {SUPPORT_BOUND}",
            evidence.support_length.to_f64()
        ));
    }

    conclude(
        5,
        "full variation concentrates on a level set of length below 0.02",
        failures,
    );
}

#[test]
fn criterion_06_coding_round_trip() {
    const COMMUTE_TOL: f64 = 1e-9;
    const TWIN_TOL: f64 = 1e-12;
    let mut failures = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(0xADD2E55);
    for system in [cantor(), shifted()] {
        let top = system.top_digit();
        for i in 0..100 {
            let len = rng.random_range(0..=10);
            let prefix: Vec<u8> = (0..len).map(|_| rng.random_range(0..=top)).collect();
            let tail = if rng.random::<bool>() {
                Tail::Constant0
            } else {
                Tail::ConstantN
            };
            let address = Address::new(prefix, tail).normalized(top);
            let point = pi(&system, &address).expect("codable").value;
            let back = extract_address(&system, &point, 40).expect("attractor point");
            if back != address {
                failures.push(format!(
                    "address {i}: {address} came back as {back} through its point"
                ));
            }
            if i < 20 {
                let deviation = commute_check(&system, &address, 10).expect("exact tail");
                if deviation >= COMMUTE_TOL {
                    failures.push(format!(
                        "address {i}: shift/transfer deviation {deviation:e} over 10 steps"
                    ));
                }
            }
        }
    }

    let system = touching();
    let phi = solution(&system, &[(1, 4), (1, 4), (1, 2)]);
    let upper = Address::new(vec![0], Tail::ConstantN);
    let lower = Address::new(vec![1], Tail::Constant0);
    let point_upper = pi(&system, &upper).expect("codable").value;
    let point_lower = pi(&system, &lower).expect("codable").value;
    if point_upper != Scalar::ratio(1, 4) || point_lower != Scalar::ratio(1, 4) {
        failures.push("the twin addresses of 1/4 do not both land on 1/4".into());
    }
    let value_upper = phi.series_value(&upper).expect("exact tail").value;
    let value_lower = phi.series_value(&lower).expect("exact tail").value;
    if (value_upper.to_f64() - value_lower.to_f64()).abs() > TWIN_TOL {
        failures.push(format!(
            "twin addresses of 1/4 disagree: {} vs {}",
            value_upper.to_f64(),
            value_lower.to_f64()
        ));
    }
    let canonical = canonicalize(&system, &upper).expect("codable");
    if canonical != lower.normalized(system.top_digit()) {
        failures.push(format!("canonical form of {upper} is {canonical}, not {lower}"));
    }

    conclude(
        6,
        "coding map round-trips, commutes with the shift, and resolves the touching point",
        failures,
    );
}

#[test]
fn criterion_07_measure_brackets() {
    let mut failures = Vec::new();

    let cases: [(&str, Arc<ContractionSystem>, ProbabilityVector, usize); 4] = [
        ("middle-thirds, p=(1/2,1/2)", cantor(), weights(&[(1, 2), (1, 2)]), 10),
        ("middle-thirds, p=(1/3,2/3)", cantor(), weights(&[(1, 3), (2, 3)]), 10),
        (
            "touching triple, p=(1/4,1/4,1/2)",
            touching(),
            weights(&[(1, 4), (1, 4), (1, 2)]),
            7,
        ),
        ("shifted pair, p=(1/2,1/2)", shifted(), weights(&[(1, 2), (1, 2)]), 10),
    ];
    for (label, system, p, max_depth) in &cases {
        for k in 1..=*max_depth {
            let total = cylinders(system, k)
                .expect("enumerable")
                .iter()
                .map(|c| c.mass(p).expect("valid digits"))
                .fold(Scalar::zero(), |acc, m| &acc + &m);
            if total != Scalar::one() {
                failures.push(format!(
                    "{label}: depth-{k} cylinder masses sum to {}",
                    total.to_f64()
                ));
            }
        }
    }

    // Every enumerated gap, and both flanks, carries mass bracket (0, 0).
    for (label, system, p, _) in &cases {
        for gap in &gaps(system, 3).expect("gaps").gaps {
            let (lo, hi) = interval_mass(system, p, &gap.left, &gap.right, 8).expect("bracket");
            if !lo.is_zero() || !hi.is_zero() {
                failures.push(format!(
                    "{label}: gap after digits {:?} has bracket ({}, {})",
                    gap.digits,
                    lo.to_f64(),
                    hi.to_f64()
                ));
            }
        }
        let flanks = [
            (Scalar::zero(), system.zero_hat().clone()),
            (system.one_hat().clone(), Scalar::one()),
        ];
        for (a, b) in flanks {
            let (lo, hi) = interval_mass(system, p, &a, &b, 8).expect("bracket");
            if !lo.is_zero() || !hi.is_zero() {
                failures.push(format!(
                    "{label}: flank [{}, {}] has bracket ({}, {})",
                    a.to_f64(),
                    b.to_f64(),
                    lo.to_f64(),
                    hi.to_f64()
                ));
            }
        }
    }

    // Atom bound: the depth-k cylinder around 1/4 never outweighs (max p)^k.
    let system = cantor();
    let address = extract_address(&system, &Scalar::ratio(1, 4), 10).expect("attractor point");
    for p in [weights(&[(1, 2), (1, 2)]), weights(&[(1, 3), (2, 3)])] {
        for k in 1..=10 {
            let bound = atom_bound(&p, k);
            if bound != p.max_weight().powi(k as u32) {
                failures.push(format!("atom bound at depth {k} is not (max p)^{k}"));
            }
            let cylinder = cylinder_mass(&p, &address.prefix()[..k]).expect("valid digits");
            if cylinder > bound {
                failures.push(format!(
                    "depth-{k} cylinder around 1/4 has mass {} above the bound {}",
                    cylinder.to_f64(),
                    bound.to_f64()
                ));
            }
        }
    }

    // Measure preservation under the transfer map, seed-fixed Monte Carlo.
    let checks = [
        (
            cantor(),
            weights(&[(1, 3), (2, 3)]),
            vec![0u8, 1],
            8,
            0x5EED_0007_u64,
        ),
        (
            touching(),
            weights(&[(1, 4), (1, 4), (1, 2)]),
            vec![2u8, 0],
            6,
            0x5EED_0008_u64,
        ),
    ];
    for (system, p, b_digits, k, seed) in checks {
        let report =
            preservation_check(&system, &p, &b_digits, k, 100_000, seed).expect("report");
        if !report.pass {
            failures.push(format!(
                "preservation for B={b_digits:?}: estimate {} vs mass {} exceeds 4 sigma {}",
                report.estimate,
                report.exact_or_bound.to_f64(),
                report.tolerance
            ));
        }
    }

    conclude(
        7,
        "cylinder masses are conserved, gaps and flanks are null, transfer preserves measure",
        failures,
    );
}

#[test]
fn criterion_08_mixing() {
    let mut failures = Vec::new();

    let cases = [
        (cantor(), weights(&[(1, 3), (2, 3)]), vec![0u8, 1], vec![1u8, 1], 4, 0x5EED_0009_u64),
        (
            touching(),
            weights(&[(1, 4), (1, 4), (1, 2)]),
            vec![2u8],
            vec![0u8, 1],
            3,
            0x5EED_000A_u64,
        ),
    ];
    for (system, p, a_digits, b_digits, m, seed) in cases {
        let report = mixing_estimate(&system, &p, &a_digits, &b_digits, m, 100_000, seed)
            .expect("report");
        let joint = report.exact_or_bound.clone();
        let product = report.product.clone().expect("product is reported");
        if joint != product {
            failures.push(format!(
                "A={a_digits:?} B={b_digits:?} m={m}: joint {} differs from product {}",
                joint.to_f64(),
                product.to_f64()
            ));
        }
        if (joint.to_f64() - product.to_f64()).abs() > 1e-15 {
            failures.push("joint and product drift apart in floats".into());
        }
        if !report.pass {
            failures.push(format!(
                "A={a_digits:?} B={b_digits:?} m={m}: estimate {} vs joint {} exceeds 4 sigma {}",
                report.estimate,
                joint.to_f64(),
                report.tolerance
            ));
        }
    }

    conclude(
        8,
        "disjoint coordinate blocks factor exactly and Monte Carlo stays within 4 sigma",
        failures,
    );
}

#[test]
fn criterion_09_independence_rank() {
    let mut failures = Vec::new();
    let system = cantor();

    let three = [
        weights(&[(1, 2), (1, 2)]),
        weights(&[(1, 3), (2, 3)]),
        weights(&[(1, 4), (3, 4)]),
    ];
    let report = independence_rank(&system, &three, 8).expect("report");
    if report.rank != 3 {
        failures.push(format!(
            "three distinct weight vectors have rank {} (singular values {:?})",
            report.rank, report.singular_values
        ));
    }

    let five = [
        weights(&[(1, 2), (1, 2)]),
        weights(&[(1, 3), (2, 3)]),
        weights(&[(1, 4), (3, 4)]),
        weights(&[(1, 5), (4, 5)]),
        weights(&[(2, 5), (3, 5)]),
    ];
    let report = independence_rank(&system, &five, 24).expect("report");
    if report.rank != 5 {
        failures.push(format!(
            "five distinct weight vectors on 24 grid points have rank {} (singular values {:?})",
            report.rank, report.singular_values
        ));
    }
    if report.singular_values.len() != 5 {
        failures.push("expected one singular value per weight vector".into());
    }
    let sigma_max = report.singular_values.first().copied().unwrap_or(0.0);
    if (report.threshold - 1e-8 * sigma_max).abs() > f64::EPSILON * sigma_max {
        failures.push(format!(
            "rank threshold {} is not 1e-8 of the largest singular value {}",
            report.threshold, sigma_max
        ));
    }

    conclude(
        9,
        "plateau samples of distinct solutions have full rank (3 of 3, 5 of 5)",
        failures,
    );
}

#[test]
fn criterion_10_affine_extension() {
    const TOL: f64 = 1e-8;
    const POINTS: usize = 500;
    let mut failures = Vec::new();

    let system = cantor();
    let pair = [
        solution(&system, &[(1, 2), (1, 2)]),
        solution(&system, &[(1, 3), (2, 3)]),
    ];

    // Phi = 2 phi_(1/2,1/2) - phi_(1/3,2/3) + 5 solves the shifted equation.
    let mut worst = 0.0_f64;
    for i in 0..POINTS {
        let x = i as f64 / (POINTS - 1) as f64;
        let r = affine_combination_residual(&pair, &[2.0, -1.0], 5.0, x)
            .expect("in domain")
            .abs();
        worst = worst.max(r);
    }
    if worst > TOL {
        failures.push(format!(
            "mixed-sign combination: max |residual| = {worst:e} > {TOL:e}"
        ));
    }

    for alphas in [[2.0, 1.0], [0.3, 0.7], [0.0, 4.0]] {
        match affine_combination_monotone(&pair, &alphas, 5.0, 500) {
            Ok(true) => {}
            Ok(false) => {
                failures.push(format!("combination {alphas:?} is not monotone on the grid"))
            }
            Err(e) => failures.push(format!("combination {alphas:?}: {e}")),
        }
    }

    conclude(
        10,
        "affine combinations solve the shifted equation and same-sign ones stay monotone",
        failures,
    );
}
