use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iga_stab::analysis::{sample_field, H1_DEFINITION_NOTE};
use iga_stab::experiment::{run, RunConfig, RunOutcome};
use iga_stab::formulations::GlsWeight;
use iga_stab::{H1Definition, MeshSpec, Method, ProblemKind, SupgResidual};

mod tables;
mod verify;

#[derive(Parser)]
#[command(name = "iga-stab", version, about = "B-spline advection-diffusion solvers: Galerkin, least squares, GLS, SUPG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and report relative errors.
    Run(RunArgs),
    /// Recompute every published table and write one CSV per table.
    Tables(tables::TablesArgs),
    /// Check the inverse inequality and GLS coercivity numerically.
    Verify(verify::VerifyArgs),
    /// Write the discrete and exact solutions on a uniform lattice as CSV.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive finite number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_enum<T: std::str::FromStr<Err = iga_stab::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: iga_stab::Error| e.to_string())
}

/// Problem and discretization flags shared by `run` and `sample`.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// p1 or ej
    #[arg(long, value_parser = parse_enum::<ProblemKind>)]
    problem: ProblemKind,
    /// galerkin, ls, gls or supg
    #[arg(long, value_parser = parse_enum::<Method>)]
    method: Method,
    /// uniform:N, uniform:NXxNY, refined-ej or refined-p1
    #[arg(long, value_parser = parse_enum::<MeshSpec>)]
    mesh: MeshSpec,
    #[arg(long, value_parser = positive)]
    epsilon: f64,
    /// Gauss points per direction for assembly (default p+2)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
    quad: Option<u64>,
    /// Gauss points per direction for error norms (default p+3)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
    norm_quad: Option<u64>,
    /// full or seminorm
    #[arg(long, default_value = "full", value_parser = parse_enum::<H1Definition>)]
    h1: H1Definition,
    /// plus or consistent
    #[arg(long, default_value = "plus", value_parser = parse_enum::<SupgResidual>)]
    supg_residual: SupgResidual,
    /// advective or diameter
    #[arg(long, default_value = "advective", value_parser = parse_enum::<GlsWeight>)]
    gls_weight: GlsWeight,
}

impl ConfigArgs {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(self.problem, self.method, self.mesh, self.epsilon);
        c.h1 = self.h1;
        c.norm_quad_points = self.norm_quad.map(|n| n as usize);
        c.assembly.quad_points = self.quad.map(|n| n as usize);
        c.assembly.supg_residual = self.supg_residual;
        c.assembly.gls_weight = self.gls_weight;
        c
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    nx: u64,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    ny: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Writes `contents` next to `path` first and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn render_run(o: &RunOutcome, format: Format) -> anyhow::Result<String> {
    let r = &o.report;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r)? + "\n",
        Format::Csv => format!(
            "problem,method,mesh,epsilon,l2_rel_percent,h1_rel_percent,h1_definition,dofs\n{},{},{},{},{},{},{},{}\n",
            r.problem,
            r.method,
            r.mesh,
            r.epsilon,
            r.l2_rel_percent,
            r.h1_rel_percent,
            r.h1_definition,
            r.dofs
        ),
        Format::Text => format!(
            "problem         {}\nmethod          {}\nmesh            {}\nepsilon         {}\ndofs            {}\nl2_rel_percent  {:.4}\nh1_rel_percent  {:.4}\nh1_definition   {}\nresidual        {:.3e}\nnote            {}\n",
            r.problem,
            r.method,
            r.mesh,
            r.epsilon,
            r.dofs,
            r.l2_rel_percent,
            r.h1_rel_percent,
            r.h1_definition,
            o.relative_residual,
            H1_DEFINITION_NOTE
        ),
    })
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = args.config.config();
    let o = run(&cfg).with_context(|| format!("run failed for {cfg:?}"))?;
    let text = render_run(&o, args.format)?;
    match &args.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_sample(args: &SampleArgs) -> anyhow::Result<()> {
    let cfg = args.config.config();
    let o = run(&cfg).with_context(|| format!("run failed for {cfg:?}"))?;
    let spec = cfg.problem.build(cfg.epsilon)?;
    let pts = sample_field(&o.field, args.nx as usize, args.ny as usize)?;
    let mut out = String::from("x,y,u_h,u_exact,abs_err\n");
    for p in pts {
        let (exact, _, _) = spec.eval_exact(p.x, p.y)?;
        out.push_str(&format!("{},{},{},{},{}\n", p.x, p.y, p.value, exact, (p.value - exact).abs()));
    }
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            bail!("directory {} does not exist", dir.display());
        }
    }
    write_atomic(&args.out, out.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Tables(a) => tables::cmd_tables(a),
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
