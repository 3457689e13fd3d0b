//! The `verify` subcommand: one pass over every module-level check,
//! reported as named groups with a machine-readable summary.

use std::sync::Arc;

use serde::Serialize;

use staircase::{
    ambiguity, canonicalize, commute_check, cylinders, extract_address, gaps, interval_mass,
    level_set, mixing_estimate, pi, preservation_check, Address, ContractionSystem, Error,
    ProbabilityVector, Scalar, SolutionPhi, Tail,
};

use crate::config::RunConfig;
use crate::{Common, Failure};

/// Residual allowance for systems with non-affine maps: the float
/// roundoff of each inner argument f_n(x), transported through the
/// Holder modulus of the solution, can exceed the truncation bound.
/// Exact systems get none of this slack.
const FLOAT_RESIDUAL_DRIFT: f64 = 1e-8;

const RESIDUAL_GRID: usize = 200;

#[derive(Serialize)]
struct Group {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report<'a> {
    pass: bool,
    groups: &'a [Group],
}

fn group(name: &'static str, body: impl FnOnce() -> Result<(bool, String), Error>) -> Group {
    match body() {
        Ok((pass, detail)) => Group { name, pass, detail },
        Err(e) => Group {
            name,
            pass: false,
            detail: format!("did not run: {e}"),
        },
    }
}

pub fn run(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    let system = cfg.system.clone();
    let p = cfg.primary()?.clone();
    let phi = SolutionPhi::with_tolerance(system.clone(), p.clone(), system.tolerances().phi)
        .map_err(Failure::Validation)?;
    let depth = common.depth.unwrap_or(8);
    let samples = common.samples.unwrap_or(20_000);
    let seed = common.seed(cfg);

    let groups = vec![
        boundary(&phi),
        residual(&phi),
        nesting(&system, depth),
        gap_mass(&system, &p),
        masses(&system, &p, depth),
        preservation(&system, &p, samples, seed),
        mixing(&system, &p, samples, seed),
        commute(&system),
        canonical(&system, &phi),
    ];

    let pass = groups.iter().all(|g| g.pass);
    if common.json {
        let text = serde_json::to_string_pretty(&Report {
            pass,
            groups: &groups,
        })
        .map_err(|e| Failure::Io(std::io::Error::other(e)))?;
        println!("{text}");
    } else {
        for g in &groups {
            let state = if g.pass { "pass" } else { "FAIL" };
            println!("check {}: {state} ({})", g.name, g.detail);
        }
        println!(
            "verify: {} of {} checks passed",
            groups.iter().filter(|g| g.pass).count(),
            groups.len()
        );
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = groups
            .iter()
            .filter(|g| !g.pass)
            .map(|g| g.name)
            .collect();
        Err(Failure::Check(failed.join(", ")))
    }
}

fn boundary(phi: &SolutionPhi) -> Group {
    group("boundary", || {
        let report = phi.boundary_report()?;
        if report.pass {
            return Ok((
                true,
                format!("{} boundary and plateau identities", report.checks.len()),
            ));
        }
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                format!(
                    "{} ({} vs {})",
                    c.name,
                    c.lhs.to_f64(),
                    c.rhs.to_f64()
                )
            })
            .collect();
        Ok((false, failed.join("; ")))
    })
}

fn residual(phi: &SolutionPhi) -> Group {
    group("residual", || {
        let mut worst = 0.0_f64;
        for i in 0..=RESIDUAL_GRID {
            let x = i as f64 / RESIDUAL_GRID as f64;
            worst = worst.max(phi.equation_residual(x)?.abs());
        }
        let mut bound =
            (2.0 * phi.system().len() as f64 + 1.0) * phi.tol_phi() + 1e-15;
        if !phi.system().is_exact() {
            bound += FLOAT_RESIDUAL_DRIFT;
        }
        Ok((
            worst <= bound,
            format!("max |residual| {worst:.3e} over {} points (allowed {bound:.3e})", RESIDUAL_GRID + 1),
        ))
    })
}

fn nesting(system: &Arc<ContractionSystem>, depth: usize) -> Group {
    group("nesting", || {
        let top = depth.clamp(2, 8);
        let mut prev = level_set(system, 0)?;
        for k in 1..=top {
            let next = level_set(system, k)?;
            if !next.is_subset_of(&prev) {
                return Ok((false, format!("level {k} is not inside level {}", k - 1)));
            }
            if next.total_length() >= prev.total_length() {
                return Ok((
                    false,
                    format!(
                        "level {k} length {} did not shrink from {}",
                        next.total_length().to_f64(),
                        prev.total_length().to_f64()
                    ),
                ));
            }
            prev = next;
        }
        Ok((true, format!("levels 0..={top} nest with shrinking length")))
    })
}

fn gap_mass(system: &Arc<ContractionSystem>, p: &ProbabilityVector) -> Group {
    group("gaps", || {
        let decomposition = gaps(system, 3)?;
        let mut ok = true;
        let mut checked = 0;
        for gap in &decomposition.gaps {
            let (lo, hi) = interval_mass(system, p, &gap.left, &gap.right, gap.depth() + 8)?;
            ok &= lo.is_zero() && hi.is_zero();
            checked += 1;
        }
        let flanks = [
            (Scalar::zero(), system.zero_hat().clone()),
            (system.one_hat().clone(), Scalar::one()),
        ];
        for (a, b) in flanks {
            let (lo, hi) = interval_mass(system, p, &a, &b, 8)?;
            ok &= lo.is_zero() && hi.is_zero();
            checked += 1;
        }
        Ok((ok, format!("{checked} gap and flank intervals carry zero mass")))
    })
}

fn masses(system: &Arc<ContractionSystem>, p: &ProbabilityVector, depth: usize) -> Group {
    group("masses", || {
        let top = depth.clamp(1, 6);
        let mut ok = true;
        for k in 1..=top {
            let mut total = Scalar::zero();
            for c in cylinders(system, k)? {
                total = &total + &c.mass(p)?;
            }
            if p.is_exact() {
                ok &= total == Scalar::one();
            } else {
                ok &= (total.to_f64() - 1.0).abs() <= 1e-12;
            }
        }
        Ok((ok, format!("cylinder masses sum to 1 at depths 1..={top}")))
    })
}

fn preservation(
    system: &Arc<ContractionSystem>,
    p: &ProbabilityVector,
    samples: usize,
    seed: u64,
) -> Group {
    group("preservation", || {
        let b = [0u8, system.top_digit()];
        let report = preservation_check(system, p, &b, b.len() + 2, samples, seed)?;
        Ok((
            report.pass,
            format!(
                "pullback estimate {:.5} vs mass {:.5} (tolerance {:.5})",
                report.estimate,
                report.exact_or_bound.to_f64(),
                report.tolerance
            ),
        ))
    })
}

fn mixing(
    system: &Arc<ContractionSystem>,
    p: &ProbabilityVector,
    samples: usize,
    seed: u64,
) -> Group {
    group("mixing", || {
        let a = [system.top_digit()];
        let b = [0u8];
        let report = mixing_estimate(system, p, &a, &b, 3, samples, seed ^ 0x9E37_79B9)?;
        let joint = report.exact_or_bound.clone();
        let product = report.product.clone().unwrap_or_else(Scalar::zero);
        let factorizes = if p.is_exact() {
            joint == product
        } else {
            (joint.to_f64() - product.to_f64()).abs() <= 1e-15
        };
        Ok((
            factorizes && report.pass,
            format!(
                "joint {:.6} equals product {:.6}; estimate {:.5}",
                joint.to_f64(),
                product.to_f64(),
                report.estimate
            ),
        ))
    })
}

fn commute(system: &Arc<ContractionSystem>) -> Group {
    group("commute", || {
        let tol = if system.is_exact() { 1e-9 } else { 1e-8 };
        let mut worst = 0.0_f64;
        for n in 0..system.len() {
            for tail in [Tail::Constant0, Tail::ConstantN] {
                // Canonical spellings only: the transfer's maximal
                // tie-break commutes with the shift on those, while the
                // lower twin of a doubly coded point steps off by a gap.
                let address = canonicalize(system, &Address::new(vec![n as u8, 0], tail))?;
                worst = worst.max(commute_check(system, &address, 6)?);
            }
        }
        Ok((
            worst <= tol,
            format!("max deviation {worst:.3e} over 6 shift steps (allowed {tol:.0e})"),
        ))
    })
}

fn canonical(system: &Arc<ContractionSystem>, phi: &SolutionPhi) -> Group {
    group("canonical", || {
        let top = system.top_digit();
        let exact = system.is_exact();
        let mut ok = true;
        for n in 0..system.len() {
            for tail in [Tail::Constant0, Tail::ConstantN] {
                let address = Address::new(vec![n as u8], tail).normalized(top);
                let expected = canonicalize(system, &address)?;
                let point = pi(system, &address)?.value;
                let back = extract_address(system, &point, 24)?;
                ok &= if exact {
                    back == expected
                } else {
                    prefix_agrees(&expected, &back, top, 6)
                };
            }
        }
        let table = ambiguity(system);
        let mut twin_note = "no active ambiguity";
        if table.active {
            twin_note = "twin spellings agree on the touching set";
            for &t in &table.touching {
                let upper = Address::new(vec![t], Tail::ConstantN);
                let lower = Address::new(vec![t + 1], Tail::Constant0).normalized(top);
                let pu = pi(system, &upper)?.value;
                let pl = pi(system, &lower)?.value;
                ok &= if exact {
                    pu == pl
                } else {
                    (pu.to_f64() - pl.to_f64()).abs() <= system.tolerances().fix
                };
                let vu = phi.series_value(&upper)?.value;
                let vl = phi.series_value(&lower)?.value;
                ok &= (vu.to_f64() - vl.to_f64()).abs() <= 1e-12;
                ok &= canonicalize(system, &upper)? == lower;
            }
        }
        Ok((ok, format!("coding round-trips at depth 24; {twin_note}")))
    })
}

fn prefix_agrees(a: &Address, b: &Address, top: u8, span: usize) -> bool {
    (0..span).all(|i| match (a.digit_at(i, top), b.digit_at(i, top)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    })
}
