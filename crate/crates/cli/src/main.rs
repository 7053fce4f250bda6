//! Command-line front end: scenario checks, point queries, the germ probe
//! and the built-in gallery.
//!
//! Exit codes: 0 success, 1 validation error (bad file, bad arguments,
//! unknown id), 2 numeric failure during a computation (singular point,
//! off-surface point, evaluation domain error).

use clap::{Parser, Subcommand};
use levilab_core::error::ManifoldError;
use levilab_core::geometry::TypeReport;
use levilab_core::report::{emit_json, emit_text, run_check, LeviDirection, Report};
use levilab_core::scenario::Scenario;
use levilab_core::{gallery, report};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "levilab", version, about = "CR-geometry checks for hypersurface boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the hypothesis scan and the germ probe on a scenario file
    Check {
        scenario: PathBuf,
        /// emit the JSON report (to stdout, or to the given path)
        #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
        json: Option<PathBuf>,
        /// override the scan grid density (all axes)
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
        /// override the bracket-length bound
        #[arg(long, value_name = "K")]
        max_order: Option<u32>,
        /// override the zero/on-surface tolerance (tangency scales with it)
        #[arg(long, value_name = "T")]
        tol: Option<f64>,
    },
    /// Bloom-Graham type at one parameter point
    Type {
        scenario: PathBuf,
        /// parameter point, e.g. "t=0.5" or "theta=pi/4"
        #[arg(long)]
        at: String,
        #[arg(long, value_name = "K")]
        max_order: Option<u32>,
    },
    /// Levi form of a given order at one parameter point
    Levi {
        scenario: PathBuf,
        /// form order (1 is the classical Levi form)
        #[arg(long)]
        k: u32,
        /// parameter point, e.g. "theta=0"
        #[arg(long)]
        at: String,
        /// direction: "igamma" (i * d gamma) or "basis:j"
        #[arg(long, default_value = "igamma")]
        dir: String,
    },
    /// Germ probe of the complexified manifold
    Probe {
        scenario: PathBuf,
        /// largest shell radius
        #[arg(long, value_name = "D")]
        delta: Option<f64>,
        /// number of geometric shells
        #[arg(long, value_name = "S")]
        shells: Option<usize>,
    },
    /// Run a built-in scenario, or export all of them
    Gallery {
        /// id: ex4_2, ex4_3, ex4_4, ex4_5, model_n3
        id: String,
        /// emit the JSON report (to stdout, or to the given path)
        #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
        json: Option<PathBuf>,
        /// write every gallery scenario into this directory instead of running
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
    },
}

/// Failures carrying their process exit code.
enum Failure {
    Validation(String),
    Numeric(String),
}

impl Failure {
    fn of_manifold(e: ManifoldError) -> Failure {
        match e {
            ManifoldError::AmbientInComponent { .. } | ManifoldError::NonEntireComponent { .. } => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| Failure::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check {
            scenario,
            json,
            grid,
            max_order,
            tol,
        } => {
            let mut sc = load_scenario(&scenario)?;
            apply_overrides(&mut sc, grid, max_order, tol)?;
            let report = run_check(&sc).map_err(Failure::of_manifold)?;
            emit(&report, json.as_deref())
        }
        Command::Type {
            scenario,
            at,
            max_order,
        } => {
            let mut sc = load_scenario(&scenario)?;
            apply_overrides(&mut sc, None, max_order, None)?;
            let point = sc.parse_at(&at).map_err(Failure::Validation)?;
            let report = report::type_at_params(&sc, &point).map_err(Failure::of_manifold)?;
            print_type(&sc, &point, &report);
            Ok(())
        }
        Command::Levi { scenario, k, at, dir } => {
            if k < 1 {
                return Err(Failure::Validation("--k must be at least 1".into()));
            }
            let sc = load_scenario(&scenario)?;
            let point = sc.parse_at(&at).map_err(Failure::Validation)?;
            let dir = parse_direction(&dir, sc.n)?;
            let (value, zeta) =
                report::levi_at_params(&sc, &point, k, dir).map_err(Failure::of_manifold)?;
            let coords: Vec<String> = zeta
                .iter()
                .map(|c| format!("{}{:+}i", c.re, c.im))
                .collect();
            println!("levi form: order {k}");
            println!("  zeta = ({})", coords.join(", "));
            println!("  value = {}", value.value);
            println!("  imag residual = {:e}", value.imag_residual);
            Ok(())
        }
        Command::Probe {
            scenario,
            delta,
            shells,
        } => {
            if let Some(d) = delta {
                if !(d > 0.0) {
                    return Err(Failure::Validation("--delta must be positive".into()));
                }
            }
            if let Some(s) = shells {
                if s == 0 {
                    return Err(Failure::Validation("--shells must be positive".into()));
                }
            }
            let sc = load_scenario(&scenario)?;
            let probe = report::probe_only(&sc, delta, shells).map_err(Failure::of_manifold)?;
            let radii: Vec<String> = probe.resolution.radii.iter().map(|r| r.to_string()).collect();
            println!(
                "germ probe (shells [{}], {} directions, tau {:e})",
                radii.join(", "),
                probe.resolution.directions,
                probe.resolution.tau
            );
            println!(
                "  verdict: {:?} - {} contact(s), {} penetration(s) in {} samples, min u = {:e}",
                probe.verdict,
                probe.contact_count,
                probe.penetration_count,
                probe.samples,
                probe.min_u
            );
            for w in &probe.witnesses {
                let zeta: Vec<String> = w
                    .zeta
                    .iter()
                    .map(|(re, im)| format!("{re}{im:+}i"))
                    .collect();
                println!("  {:?} at zeta = ({}), u = {:e}", w.class, zeta.join(", "), w.u);
            }
            if probe.witnesses_truncated {
                println!("  ... witness list truncated");
            }
            Ok(())
        }
        Command::Gallery { id, json, export } => {
            if let Some(dir) = export {
                let paths = gallery::export(&dir)
                    .map_err(|e| Failure::Validation(format!("export failed: {e}")))?;
                for p in paths {
                    println!("wrote {}", p.display());
                }
                return Ok(());
            }
            let sc = gallery::load(&id).map_err(|e| Failure::Validation(e.to_string()))?;
            let report = run_check(&sc).map_err(Failure::of_manifold)?;
            emit(&report, json.as_deref())
        }
    }
}

fn apply_overrides(
    sc: &mut Scenario,
    grid: Option<usize>,
    max_order: Option<u32>,
    tol: Option<f64>,
) -> Result<(), Failure> {
    if let Some(n) = grid {
        if n == 0 {
            return Err(Failure::Validation("--grid must be positive".into()));
        }
        sc.settings.grid = vec![n; sc.m];
    }
    if let Some(k) = max_order {
        if k < 2 {
            return Err(Failure::Validation("--max-order must be at least 2".into()));
        }
        sc.settings.max_order = k;
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(Failure::Validation("--tol must be positive".into()));
        }
        sc.settings.eps_zero = t;
        sc.settings.eps_on_surface = t;
        sc.settings.eps_tangency = 10.0 * t;
    }
    Ok(())
}

fn parse_direction(dir: &str, n: usize) -> Result<LeviDirection, Failure> {
    if dir == "igamma" {
        return Ok(LeviDirection::IGamma);
    }
    if let Some(j) = dir.strip_prefix("basis:") {
        let j: usize = j
            .parse()
            .map_err(|_| Failure::Validation(format!("bad basis index in --dir '{dir}'")))?;
        if j == 0 || j > n - 1 {
            return Err(Failure::Validation(format!(
                "basis index out of range 1..{} in --dir '{dir}'",
                n - 1
            )));
        }
        return Ok(LeviDirection::Basis(j));
    }
    Err(Failure::Validation(format!(
        "--dir must be 'igamma' or 'basis:j', found '{dir}'"
    )))
}

fn print_type(sc: &Scenario, point: &[f64], report: &TypeReport) {
    let at: Vec<String> = sc
        .param_names
        .iter()
        .zip(point)
        .map(|(n, v)| format!("{n} = {v}"))
        .collect();
    let ambient: Vec<String> = report
        .point
        .iter()
        .map(|(re, im)| format!("{re}{im:+}i"))
        .collect();
    println!("bloom-graham type at {}", at.join(", "));
    println!("  ambient point ({})", ambient.join(", "));
    println!("  type: {}", report.result);
    println!("  scale: {}", report.scale);
    for w in &report.level_witness {
        println!(
            "  level {}: max |contraction| = {:e}  ({})",
            w.level, w.max_contraction, w.word
        );
    }
}

fn emit(report: &Report, json: Option<&std::path::Path>) -> Result<(), Failure> {
    match json {
        None => {
            print!("{}", emit_text(report));
        }
        Some(path) if path.as_os_str() == "-" => {
            print!("{}", emit_json(report));
        }
        Some(path) => {
            std::fs::write(path, emit_json(report))
                .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", emit_text(report));
        }
    }
    Ok(())
}
