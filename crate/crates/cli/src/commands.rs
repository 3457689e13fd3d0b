//! Subcommand bodies, except for `verify` which has its own module.

use serde::Serialize;

use staircase::{ambiguity, independence_rank, level_set, sample_address, Scalar, SolutionPhi};

use crate::config::{self, Num, RunConfig};
use crate::{emit, fmt17, show, Common, Failure};

/// Solution of the first `p` line, at the config's evaluation tolerance.
fn solution(cfg: &RunConfig) -> Result<SolutionPhi, Failure> {
    let p = cfg.primary()?.clone();
    let tol = cfg.system.tolerances().phi;
    SolutionPhi::with_tolerance(cfg.system.clone(), p, tol).map_err(Failure::Validation)
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Io(std::io::Error::other(e)))?;
    text.push('\n');
    Ok(text)
}

pub fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    let s = &cfg.system;
    println!("maps = {}", s.len());
    for n in 0..s.len() {
        let kind = if s.map(n).is_affine() { "affine" } else { "general" };
        println!(
            "f_{n}: [{}, {}] ({kind})",
            show(s.left_end(n)),
            show(s.right_end(n))
        );
    }
    println!("0-hat = {}", show(s.zero_hat()));
    println!("1-hat = {}", show(s.one_hat()));
    let table = ambiguity(s);
    let touching: Vec<String> = table.touching.iter().map(u8::to_string).collect();
    println!("N_b = {{{}}}", touching.join(", "));
    println!("zb_active = {}", table.active);
    if let Some(d) = s.contraction_deficit() {
        println!("d = {}", show(&d));
    }
    println!("mode = {}", if s.is_exact() { "exact" } else { "float" });
    for (i, v) in cfg.vectors.iter().enumerate() {
        let entries: Vec<String> = (0..v.len()).map(|n| show(&v.scalar(n))).collect();
        println!("p[{i}] = ({})", entries.join(", "));
    }
    println!("ok");
    Ok(())
}

#[derive(Serialize)]
struct CurveRow {
    x: f64,
    phi: f64,
    error: f64,
}

#[derive(Serialize)]
struct PlateauRow {
    digits: Vec<u8>,
    left: f64,
    right: f64,
    value: f64,
}

#[derive(Serialize)]
struct CurveReport {
    grid: usize,
    rows: Vec<CurveRow>,
    plateaus: Vec<PlateauRow>,
}

pub fn curve(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    let grid = common.grid.unwrap_or(256);
    if grid < 2 {
        return Err(Failure::Invalid(format!(
            "grid must be at least 2, got {grid}"
        )));
    }
    let phi = solution(cfg)?;
    let mut rows = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let x = Scalar::ratio(i as i64, grid as i64);
        let v = phi.eval_scalar(&x).map_err(Failure::Validation)?;
        rows.push(CurveRow {
            x: x.to_f64(),
            phi: v.value.to_f64(),
            error: v.error,
        });
    }
    if common.json {
        let depth = common.depth.unwrap_or(6);
        let decomposition = staircase::gaps(&cfg.system, depth).map_err(Failure::Validation)?;
        let mut plateaus = Vec::with_capacity(decomposition.gaps.len());
        for gap in &decomposition.gaps {
            let p = phi.plateau(&gap.digits).map_err(Failure::Validation)?;
            plateaus.push(PlateauRow {
                digits: p.digits,
                left: gap.left.to_f64(),
                right: gap.right.to_f64(),
                value: p.value.to_f64(),
            });
        }
        let report = CurveReport {
            grid,
            rows,
            plateaus,
        };
        emit(common.out_path(cfg), &json(&report)?)
    } else {
        let mut csv = String::from("x,phi\n");
        for row in &rows {
            csv.push_str(&fmt17(row.x));
            csv.push(',');
            csv.push_str(&fmt17(row.phi));
            csv.push('\n');
        }
        emit(common.out_path(cfg), &csv)
    }
}

#[derive(Serialize)]
struct GapRow {
    digits: Vec<u8>,
    left: f64,
    right: f64,
    length: f64,
}

#[derive(Serialize)]
struct GapReport {
    depth: usize,
    left_flank: (f64, f64),
    right_flank: (f64, f64),
    count: usize,
    gaps: Vec<GapRow>,
}

pub fn gaps(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    let depth = common.depth.unwrap_or(6);
    let d = staircase::gaps(&cfg.system, depth).map_err(Failure::Validation)?;
    if common.json {
        let rows = d
            .gaps
            .iter()
            .map(|g| GapRow {
                digits: g.digits.clone(),
                left: g.left.to_f64(),
                right: g.right.to_f64(),
                length: g.length().to_f64(),
            })
            .collect();
        let report = GapReport {
            depth,
            left_flank: (d.left_flank.0.to_f64(), d.left_flank.1.to_f64()),
            right_flank: (d.right_flank.0.to_f64(), d.right_flank.1.to_f64()),
            count: d.gaps.len(),
            gaps: rows,
        };
        emit(common.out_path(cfg), &json(&report)?)
    } else {
        let mut csv = String::from("digits,left,right,length\n");
        for g in &d.gaps {
            let digits: Vec<String> = g.digits.iter().map(u8::to_string).collect();
            csv.push_str(&format!(
                "{},{},{},{}\n",
                digits.join("."),
                fmt17(g.left.to_f64()),
                fmt17(g.right.to_f64()),
                fmt17(g.length().to_f64())
            ));
        }
        emit(common.out_path(cfg), &csv)
    }
}

#[derive(Serialize)]
struct EvalRow {
    x: String,
    phi: f64,
    error: f64,
}

pub fn eval(cfg: &RunConfig, common: &Common, points: &[String]) -> Result<(), Failure> {
    let phi = solution(cfg)?;
    let mut rows = Vec::with_capacity(points.len());
    for token in points {
        let t = token.trim();
        let x = match config::parse_num(t) {
            Some(Num::Exact(r)) => Scalar::Exact(r),
            Some(Num::Approx(f)) => Scalar::from_f64_exact(f),
            None => return Err(Failure::Parse(format!("not a number: {t}"))),
        };
        let v = phi.eval_scalar(&x).map_err(Failure::Validation)?;
        rows.push(EvalRow {
            x: t.to_string(),
            phi: v.value.to_f64(),
            error: v.error,
        });
    }
    if common.json {
        emit(common.out_path(cfg), &json(&rows)?)
    } else {
        let mut csv = String::from("x,phi,error\n");
        for row in &rows {
            csv.push_str(&format!("{},{},{:e}\n", row.x, fmt17(row.phi), row.error));
        }
        emit(common.out_path(cfg), &csv)
    }
}

#[derive(Serialize)]
struct AttractorReport {
    depth: usize,
    count: usize,
    total_length: f64,
    spans: Vec<(f64, f64)>,
}

pub fn attractor(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    let depth = common.depth.unwrap_or(8);
    let set = level_set(&cfg.system, depth).map_err(Failure::Validation)?;
    if common.json {
        let report = AttractorReport {
            depth,
            count: set.count(),
            total_length: set.total_length().to_f64(),
            spans: set.to_f64_spans(),
        };
        emit(common.out_path(cfg), &json(&report)?)
    } else {
        let mut csv = String::from("left,right\n");
        for (lo, hi) in set.spans() {
            csv.push_str(&format!("{},{}\n", fmt17(lo.to_f64()), fmt17(hi.to_f64())));
        }
        eprintln!(
            "level {depth}: {} intervals, total length {}",
            set.count(),
            show(&set.total_length())
        );
        emit(common.out_path(cfg), &csv)
    }
}

pub fn independence(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    if cfg.vectors.len() < 2 {
        return Err(Failure::Invalid(format!(
            "independence needs at least two p lines in the config, got {}",
            cfg.vectors.len()
        )));
    }
    let m = common.grid.unwrap_or(24);
    let report = independence_rank(&cfg.system, &cfg.vectors, m).map_err(Failure::Validation)?;
    if common.json {
        emit(common.out_path(cfg), &json(&report)?)?;
    } else {
        println!("rank = {} of {}", report.rank, cfg.vectors.len());
        println!("threshold = {:e}", report.threshold);
        let sv: Vec<String> = report
            .singular_values
            .iter()
            .map(|s| format!("{s:e}"))
            .collect();
        println!("singular values = [{}]", sv.join(", "));
    }
    if report.rank == cfg.vectors.len() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "rank {} below family size {}",
            report.rank,
            cfg.vectors.len()
        )))
    }
}

#[derive(Serialize)]
struct SampleRow {
    address: String,
    digits: Vec<u8>,
    point: f64,
}

pub fn sample(cfg: &RunConfig, common: &Common) -> Result<(), Failure> {
    let p = cfg.primary()?;
    let n = common.samples.unwrap_or(10);
    let depth = common.depth.unwrap_or(12);
    let seed = common.seed(cfg);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let digits = sample_address(p, seed.wrapping_add(i as u64), depth);
        let point = cfg
            .system
            .apply_digits(&digits, cfg.system.zero_hat())
            .map_err(Failure::Validation)?;
        let address: Vec<String> = digits.iter().map(u8::to_string).collect();
        rows.push(SampleRow {
            address: address.join("."),
            digits,
            point: point.to_f64(),
        });
    }
    if common.json {
        emit(common.out_path(cfg), &json(&rows)?)
    } else {
        let mut csv = String::from("address,point\n");
        for row in &rows {
            csv.push_str(&format!("{},{}\n", row.address, fmt17(row.point)));
        }
        emit(common.out_path(cfg), &csv)
    }
}
