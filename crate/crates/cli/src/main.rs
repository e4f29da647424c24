//! `vlt`: phantoms, forward transforms, inversions and experiments.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use vlt_core::calculus::{d2, ddperp, dperp2, perp_sym_deriv, sym_deriv};
use vlt_core::fields::{render_field, write_field, TENSOR_COMPONENTS};
use vlt_core::harness::{parse_angle, run_experiment, ExperimentConfig, Method, RunManifest};
use vlt_core::pdesolve::manufactured_error;
use vlt_core::phantoms::{potential_scalar, potential_vector};
use vlt_core::vlt::{parse_transform, star_forward, transform_name, vlt_forward, STAR_COMPONENTS};
use vlt_core::{Grid, PdeKind, PhantomId, ScalarField, SolverOptions, StarGeometry, SymTensorField, VLineGeometry, VltError};

/// Exit code for bad input and violated preconditions.
const EXIT_INPUT: u8 = 2;
/// Exit code for numerical solver failures.
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "vlt", version, about = "V-line and star transforms of symmetric 2-tensor fields")]
struct Cli {
    /// Flat `key=value` file; keys are flag names, command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write phantom components or potentials as CSV grids.
    Phantom(PhantomArgs),
    /// Compute V-line or star transforms of a phantom.
    Forward(ForwardArgs),
    /// Reconstruct from simulated data at one noise level.
    Invert(InvertArgs),
    /// Full run over several noise levels with previews and a manifest.
    Experiment(ExperimentArgs),
    /// Convergence check of the three finite-difference solvers.
    PdeSelftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct Scene {
    /// Phantom number: 1 is smooth, 2 is the letters.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    phantom: Option<u8>,
    /// Polar angle of the V-line branch `u`, e.g. `pi/3`, `45deg` or radians.
    #[arg(long, default_value = "pi/3")]
    angle: String,
    /// Use the three-branch star instead of a V-line.
    #[arg(long)]
    star: bool,
    /// Grid size.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct PhantomArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    phantom: u8,
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// One of f11, f12, f22, phi, g1, g2, or `all`.
    #[arg(long, default_value = "all")]
    component: String,
    /// Output directory; a single component goes to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ForwardArgs {
    #[command(flatten)]
    scene: Scene,
    /// Transforms to compute: L, T, M, L1, T1, M1, or S for the star.
    /// Defaults to L,T,M, or S with --star.
    #[arg(long, value_delimiter = ',')]
    kind: Vec<String>,
    /// Special field to transform instead of the phantom itself:
    /// d2phi, dperp2phi, ddperpphi, dg or dperpg.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Recon {
    #[command(flatten)]
    scene: Scene,
    #[arg(long)]
    method: Option<String>,
    /// Transform for the single-transform methods (L, T or M).
    #[arg(long)]
    kind: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Star method: zero the reconstruction outside the support disc.
    #[arg(long)]
    mask: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[command(flatten)]
    recon: Recon,
    /// Noise level in percent.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    recon: Recon,
    /// Comma-separated noise levels in percent.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    noise: Vec<f64>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Grid sizes, coarse to fine.
    #[arg(long, value_delimiter = ',', default_value = "40,80,160")]
    n: Vec<usize>,
}

#[derive(Debug)]
enum Failure {
    Core(VltError),
    Input(String),
    Solver(String),
}

impl From<VltError> for Failure {
    fn from(e: VltError) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn phantom_id(k: Option<u8>, method: Option<Method>) -> CliResult<PhantomId> {
    match k {
        Some(k) => Ok(PhantomId::from_number(k)?),
        None if method == Some(Method::Star) => Ok(PhantomId::Letters),
        None => Ok(PhantomId::Smooth),
    }
}

fn write_grid(dir: &Path, name: &str, h: &ScalarField) -> CliResult<PathBuf> {
    let path = dir.join(format!("{name}.csv"));
    write_field(h, &path)?;
    Ok(path)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_phantom(a: &PhantomArgs) -> CliResult<()> {
    let id = PhantomId::from_number(a.phantom)?;
    let grid = Grid::new(a.n)?;
    let f = id.build(grid);
    let g = potential_vector(grid, id);
    let (f11, f12, f22) = f.into_parts();
    let (g1, g2) = g.into_parts();
    let [n11, n12, n22] = TENSOR_COMPONENTS;
    let parts = [(n11, f11), (n12, f12), (n22, f22), ("phi", potential_scalar(grid, id)), ("g1", g1), ("g2", g2)];
    let chosen: Vec<&(&str, ScalarField)> = match a.component.as_str() {
        "all" => parts.iter().collect(),
        c => match parts.iter().find(|(name, _)| *name == c) {
            Some(p) => vec![p],
            None => return Err(Failure::Input(format!("unknown component {c:?}"))),
        },
    };
    match &a.out {
        None if chosen.len() == 1 => print!("{}", render_field(&chosen[0].1)),
        None => return Err(Failure::Input("--out is required for more than one component".into())),
        Some(dir) => {
            create_dir(dir)?;
            for (name, h) in chosen {
                println!("{}", write_grid(dir, &format!("phantom{}_{name}", a.phantom), h)?.display());
            }
        }
    }
    Ok(())
}

fn special_field(name: &str, grid: Grid, id: PhantomId) -> CliResult<SymTensorField> {
    Ok(match name {
        "d2phi" => d2(&potential_scalar(grid, id)),
        "dperp2phi" => dperp2(&potential_scalar(grid, id)),
        "ddperpphi" => ddperp(&potential_scalar(grid, id)),
        "dg" => sym_deriv(&potential_vector(grid, id)),
        "dperpg" => perp_sym_deriv(&potential_vector(grid, id)),
        other => return Err(Failure::Input(format!("unknown field {other:?}"))),
    })
}

fn cmd_forward(a: &ForwardArgs) -> CliResult<()> {
    let id = phantom_id(a.scene.phantom, None)?;
    let grid = Grid::new(a.scene.n.unwrap_or(512))?;
    let f = match &a.field {
        Some(name) => special_field(name, grid, id)?,
        None => id.build(grid),
    };
    create_dir(&a.out)?;
    let is_star = |k: &String| k.eq_ignore_ascii_case("S");
    let star = a.scene.star || a.kind.iter().any(is_star);
    if star {
        if let Some(k) = a.kind.iter().find(|k| !is_star(k)) {
            return Err(Failure::Input(format!("the star transform cannot be combined with --kind {k}")));
        }
        let data = star_forward(&f, &StarGeometry::three_branch());
        for (name, h) in STAR_COMPONENTS.iter().zip(data.components()) {
            println!("{}", write_grid(&a.out, &format!("star_{name}"), h)?.display());
        }
        return Ok(());
    }
    let geom = VLineGeometry::from_angle(parse_angle(&a.scene.angle)?)?;
    let defaults = ["L", "T", "M"].map(String::from);
    let kinds = if a.kind.is_empty() { &defaults[..] } else { &a.kind[..] };
    for k in kinds {
        let (kind, moment) = parse_transform(k).ok_or_else(|| Failure::Input(format!("unknown transform {k:?}")))?;
        let h = vlt_forward(&f, &geom, kind, moment);
        println!("{}", write_grid(&a.out, &transform_name(kind, moment), &h)?.display());
    }
    Ok(())
}

fn experiment_config(r: &Recon, noise: Vec<f64>, previews: bool) -> CliResult<ExperimentConfig> {
    let method = match (&r.method, r.scene.star) {
        (Some(m), star) => {
            let m = Method::parse(m)?;
            if star && m != Method::Star {
                return Err(Failure::Input(format!("--star conflicts with --method {}", m.name())));
            }
            m
        }
        (None, true) => Method::Star,
        (None, false) => return Err(Failure::Input("--method is required (or --star)".into())),
    };
    let mut cfg = ExperimentConfig::new(method, &r.out);
    cfg.phantom = phantom_id(r.scene.phantom, Some(method))?;
    cfg.n = r.scene.n;
    cfg.angle = parse_angle(&r.scene.angle)?;
    cfg.source = match &r.kind {
        Some(k) => match parse_transform(k) {
            Some((kind, vlt_core::Moment::Zero)) => Some(kind),
            _ => return Err(Failure::Input(format!("--kind must be L, T or M here, got {k:?}"))),
        },
        None => None,
    };
    cfg.noise = noise;
    cfg.seed = r.seed;
    cfg.star_mask = r.mask;
    cfg.write_previews = previews;
    cfg.validate()?;
    Ok(cfg)
}

fn report(m: &RunManifest) {
    for (k, v) in m.with_prefix("error.") {
        println!("{k} = {v}%");
    }
}

fn cmd_run(cfg: &ExperimentConfig) -> CliResult<()> {
    let m = run_experiment(cfg)?;
    report(&m);
    println!("manifest: {}", cfg.out_dir.join(vlt_core::harness::MANIFEST_FILE).display());
    Ok(())
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<()> {
    if a.n.len() < 2 {
        return Err(Failure::Input("need at least two grid sizes".into()));
    }
    let opts = SolverOptions::default();
    let mut low = Vec::new();
    for (kind, min_order) in [(PdeKind::Elliptic, 1.8), (PdeKind::Parabolic, 0.8), (PdeKind::Hyperbolic, 0.8)] {
        let errs: Vec<f64> = a.n.iter().map(|&n| manufactured_error(kind, n, &opts)).collect::<Result<_, _>>()?;
        let mut line = format!("{:<10}", kind.name());
        for (k, (n, e)) in a.n.iter().zip(&errs).enumerate() {
            line.push_str(&format!(" n={n}: {e:.3e}"));
            if k > 0 {
                let order = (errs[k - 1] / e).ln() / (*n as f64 / a.n[k - 1] as f64).ln();
                line.push_str(&format!(" (order {order:.2})"));
                if order.is_nan() || order < min_order {
                    low.push(format!("{} order {order:.2} < {min_order}", kind.name()));
                }
            }
        }
        println!("{line}");
    }
    if low.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(low.join("; ")))
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("VLT_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Input(format!("VLT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Forward(a) => cmd_forward(a),
        Command::Invert(a) => cmd_run(&experiment_config(&a.recon, vec![a.noise], false)?),
        Command::Experiment(a) => cmd_run(&experiment_config(&a.recon, a.noise.clone(), true)?),
        Command::PdeSelftest(a) => cmd_selftest(a),
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Core(e) if e.is_solver_failure() => EXIT_SOLVER,
        Failure::Solver(_) => EXIT_SOLVER,
        Failure::Core(VltError::Io { .. }) => 1,
        Failure::Core(_) | Failure::Input(_) => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let subcommands: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let args = match config::expand(args, &subcommands) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("vlt: {msg}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("vlt: {e}"),
                Failure::Input(m) | Failure::Solver(m) => eprintln!("vlt: {m}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_failure_class() {
        let cfl = VltError::Cfl { courant: 2.0, required_refine: 2 };
        assert_eq!(exit_code(&Failure::Core(cfl)), EXIT_SOLVER);
        assert_eq!(exit_code(&Failure::Solver("low order".into())), EXIT_SOLVER);
        assert_eq!(exit_code(&Failure::Core(VltError::Precondition("x".into()))), EXIT_INPUT);
        assert_eq!(exit_code(&Failure::Input("x".into())), EXIT_INPUT);
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
