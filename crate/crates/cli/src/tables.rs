use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use iga_stab::experiment::run;
use iga_stab::reference::{
    CellComparison, PublishedRow, PublishedTable, Variant, TABLES, TABLE_NORM_QUAD_POINTS,
};
use iga_stab::{H1Definition, ProblemKind, SupgResidual};
use rayon::prelude::*;

use crate::{parse_enum, write_atomic};

#[derive(Args)]
pub struct TablesArgs {
    /// Output directory (created if missing)
    #[arg(long, default_value = "tables")]
    out: PathBuf,
    /// Gauss points per direction for error norms
    #[arg(long, default_value_t = TABLE_NORM_QUAD_POINTS as u64, value_parser = clap::value_parser!(u64).range(1..=8))]
    norm_quad: u64,
    /// full or seminorm
    #[arg(long, default_value = "full", value_parser = parse_enum::<H1Definition>)]
    h1: H1Definition,
    /// plus or consistent
    #[arg(long, default_value = "plus", value_parser = parse_enum::<SupgResidual>)]
    supg_residual: SupgResidual,
}

struct Cell {
    table: &'static PublishedTable,
    row: &'static PublishedRow,
    l2: f64,
    h1: f64,
}

fn compute(table: &'static PublishedTable, row: &'static PublishedRow, variant: Variant, norm_quad: usize) -> anyhow::Result<Cell> {
    let mut cfg = table.config(row.epsilon, variant);
    cfg.norm_quad_points = Some(norm_quad);
    let o = run(&cfg).with_context(|| format!("table {} failed for {cfg:?}", table.id))?;
    Ok(Cell { table, row, l2: o.report.l2_rel_percent, h1: o.report.h1_rel_percent })
}

fn comparison_csv(problem: ProblemKind, cells: &[Cell]) -> String {
    let columns: Vec<&PublishedTable> = TABLES.iter().filter(|t| t.problem == problem).collect();
    let epsilons: Vec<f64> = columns[0].rows.iter().map(|r| r.epsilon).collect();
    let mut out = String::from("epsilon");
    for t in &columns {
        let stem = t.id.trim_end_matches(&format!("_{problem}"));
        write!(out, ",{stem}_l2,{stem}_h1").unwrap();
    }
    out.push('\n');
    for eps in epsilons {
        write!(out, "{eps}").unwrap();
        for t in &columns {
            match cells.iter().find(|c| c.table.id == t.id && c.row.epsilon == eps) {
                Some(c) => write!(out, ",{},{}", c.l2, c.h1).unwrap(),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_tables(args: &TablesArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let variant = Variant { supg_residual: args.supg_residual, h1: args.h1 };
    let nq = args.norm_quad as usize;
    let jobs: Vec<(&'static PublishedTable, &'static PublishedRow)> =
        TABLES.iter().flat_map(|t| t.rows.iter().map(move |r| (t, r))).collect();
    let cells = jobs
        .par_iter()
        .map(|&(t, r)| compute(t, r, variant, nq))
        .collect::<anyhow::Result<Vec<Cell>>>()?;

    for t in TABLES.iter() {
        let mut csv = String::from("epsilon,l2_rel_percent,h1_rel_percent\n");
        for c in cells.iter().filter(|c| c.table.id == t.id) {
            writeln!(csv, "{},{},{}", c.row.epsilon, c.l2, c.h1).unwrap();
        }
        write_atomic(&args.out.join(format!("{}.csv", t.id)), csv.as_bytes())?;
    }
    for problem in [ProblemKind::P1, ProblemKind::Ej] {
        let csv = comparison_csv(problem, &cells);
        write_atomic(&args.out.join(format!("comparison_{problem}.csv")), csv.as_bytes())?;
    }

    let mut dev = String::from("table,epsilon,l2,l2_published,h1,h1_published,within_tolerance,nearest_variant\n");
    let mut misses = 0;
    let mut report = String::new();
    for c in &cells {
        let cmp = CellComparison::new(c.table, c.row, variant, c.l2, c.h1);
        let mut nearest = String::new();
        if !cmp.ok() {
            misses += 1;
            let tol = c.table.tolerance;
            let alts = Variant::ALL
                .par_iter()
                .map(|v| {
                    let a = compute(c.table, c.row, *v, nq)?;
                    Ok(CellComparison::new(c.table, c.row, *v, a.l2, a.h1))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let best = alts.iter().min_by(|a, b| a.score(tol).total_cmp(&b.score(tol))).unwrap();
            nearest = best.variant.label();
            writeln!(
                report,
                "  {} eps={}: {:.2}/{:.2} vs published {:.2}/{:.2}",
                c.table.id, c.row.epsilon, c.l2, c.h1, c.row.l2, c.row.h1
            )
            .unwrap();
            for a in &alts {
                writeln!(report, "      {:<40} {:.2}/{:.2}", a.variant.label(), a.l2, a.h1).unwrap();
            }
            writeln!(report, "      nearest: {nearest}").unwrap();
        }
        writeln!(
            dev,
            "{},{},{},{},{},{},{},{}",
            c.table.id,
            c.row.epsilon,
            c.l2,
            c.row.l2,
            c.h1,
            c.row.h1,
            cmp.ok(),
            nearest
        )
        .unwrap();
    }
    write_atomic(&args.out.join("deviations.csv"), dev.as_bytes())?;

    println!(
        "wrote {} table CSVs and 2 comparison CSVs to {} ({}, norm quadrature {} points)",
        TABLES.len(),
        args.out.display(),
        variant.label(),
        nq
    );
    println!("summary: {}/{} cells within tolerance, {} deviating", cells.len() - misses, cells.len(), misses);
    print!("{report}");
    Ok(())
}
