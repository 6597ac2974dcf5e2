use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use iga_stab::analysis::{verify_coercivity_labeled, verify_inverse_inequality, InverseInequality, StabilityReport};
use iga_stab::meshes::uniform_mesh;
use iga_stab::ProblemKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::{positive, write_atomic, Format};

#[derive(Args)]
pub struct VerifyArgs {
    /// Uniform mesh sizes n (n x n elements) for the inverse inequality
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 10, 16])]
    inverse_sizes: Vec<usize>,
    /// Uniform mesh sizes for the coercivity check
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 10, 16])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = [0.1, 0.01, 0.001, 0.0001])]
    epsilons: Vec<f64>,
    /// text or json
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct InverseRow {
    n: usize,
    #[serde(flatten)]
    result: InverseInequality,
    holds: bool,
}

#[derive(Serialize)]
struct CoercivityRow {
    problem: ProblemKind,
    #[serde(flatten)]
    report: StabilityReport,
    holds: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    inverse_inequality: Vec<InverseRow>,
    coercivity: Vec<CoercivityRow>,
    all_hold: bool,
}

pub fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let inverse = args
        .inverse_sizes
        .par_iter()
        .map(|&n| {
            let r = verify_inverse_inequality(&uniform_mesh(n, n, 2)?)?;
            Ok(InverseRow { n, holds: r.observed <= r.bound, result: r })
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .context("inverse inequality check failed")?;
    let jobs: Vec<(usize, ProblemKind, f64)> = args
        .sizes
        .iter()
        .flat_map(|&n| {
            [ProblemKind::P1, ProblemKind::Ej]
                .into_iter()
                .flat_map(move |k| args.epsilons.iter().map(move |&e| (n, k, e)))
        })
        .collect();
    let coercivity = jobs
        .par_iter()
        .map(|&(n, kind, eps)| {
            let mesh = uniform_mesh(n, n, 2)?;
            let report = verify_coercivity_labeled(&mesh, &kind.build(eps)?, &format!("uniform:{n}"))?;
            Ok(CoercivityRow { problem: kind, holds: report.claims_hold(), report })
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .context("coercivity check failed")?;
    let all_hold = inverse.iter().all(|r| r.holds) && coercivity.iter().all(|r| r.holds);
    let report = VerifyReport { inverse_inequality: inverse, coercivity, all_hold };

    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        _ => render_text(&report),
    };
    match &args.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    if !report.all_hold {
        anyhow::bail!("a stability invariant does not hold");
    }
    Ok(())
}

fn render_text(r: &VerifyReport) -> String {
    let mut s = String::from("inverse inequality  h |Δv| / |∇v| <= C\n");
    for row in &r.inverse_inequality {
        s += &format!(
            "  uniform:{:<3} observed {:.6}  bound {:.6}  {}\n",
            row.n,
            row.result.observed,
            row.result.bound,
            if row.holds { "ok" } else { "VIOLATED" }
        );
    }
    s += "coercivity  min b(v,v)/|v|^2 >= 1/2 when eps <= h/(2C^2)\n";
    for row in &r.coercivity {
        let c = &row.report;
        let status = match (c.condition_satisfied, row.holds) {
            (false, _) => "hypothesis not met",
            (true, true) => "ok",
            (true, false) => "VIOLATED",
        };
        s += &format!(
            "  {:<11} {:<3} eps={:<7} threshold {:.6}  condition_satisfied={:<5}  coercivity_min_ratio {:.6}  continuity {:.4}  {}\n",
            c.mesh, row.problem, c.epsilon, c.epsilon_threshold, c.condition_satisfied, c.coercivity_min_ratio, c.continuity_constant, status
        );
    }
    s += &format!("all invariants hold: {}\n", r.all_hold);
    s
}
