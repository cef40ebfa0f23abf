//! `latgreen`: tables, verification runs and plot data from the command line.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid
//! configuration or a degenerate contour, 3 I/O failure.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latgreen::qmap::Grid;
use latgreen::theta::DEFAULT_TOL;
use latgreen::verify::{theta_suite, SphereSuite, VerifyReport};
use latgreen::{
    GreenKind, GreenTable, JacobianSpectralData, LambdaLabel, QuasimomentumMap, Site, Sphere, SpherePoint, Window,
};
use num_complex::Complex64;

#[derive(Debug, Parser)]
#[command(name = "latgreen", version, about = "Lattice Green's functions from spectral-curve contour integrals")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// `sphere`, or the path of a JSON file with Jacobian-level spectral data.
    #[arg(long, global = true, default_value = "sphere")]
    backend: String,
    /// Spectral parameter: a complex number such as `2-2i`, `3`, `0.5i`, or `inf`.
    #[arg(long, global = true, default_value = "2-2i", allow_hyphen_values = true, value_parser = parse_lambda)]
    lambda: SpherePoint,
    /// Target site `μ,ν`.
    #[arg(long, global = true, default_value = "0,0", allow_hyphen_values = true, value_parser = parse_site)]
    target: Site,
    /// Half-width `H` of the square window around the target, or explicit
    /// bounds `μmin:μmax,νmin:νmax`.
    #[arg(long, global = true, default_value = "4", allow_hyphen_values = true, value_parser = parse_window)]
    window: WindowSpec,
    /// Quadrature nodes per contour (at least 16).
    #[arg(long, global = true, env = "GREEN_NODES", default_value_t = 512, value_parser = parse_nodes)]
    nodes: usize,
    /// Pass threshold for verification residuals.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate G (or G0 with `--g0`) over the window for the given target.
    GreenTable {
        #[arg(long)]
        g0: bool,
    },
    /// Run the invariant suite and report every residual.
    Verify {
        /// Reverse the contour before the contour checks.
        #[arg(long)]
        flip_orientation: bool,
    },
    /// Sample Im p_m and Im p_n on a grid and along level sets C_λ.
    QuasimomentumMap {
        /// Real-axis range `min,max` of the grid.
        #[arg(long, default_value = "-3,3", allow_hyphen_values = true, value_parser = parse_range)]
        re_range: (f64, f64),
        /// Imaginary-axis range `min,max` of the grid.
        #[arg(long, default_value = "-3,3", allow_hyphen_values = true, value_parser = parse_range)]
        im_range: (f64, f64),
        /// Grid points per axis, endpoints included.
        #[arg(long, default_value_t = 61)]
        steps: usize,
        /// Level sets to trace; defaults to the one through `--lambda`.
        #[arg(long = "contour", allow_hyphen_values = true, value_parser = parse_lambda)]
        contours: Vec<SpherePoint>,
        /// Points per level-set polyline.
        #[arg(long, default_value_t = 128)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum WindowSpec {
    Half(u32),
    Bounds(i64, i64, i64, i64),
}

impl WindowSpec {
    fn resolve(self, target: Site) -> Result<Window, CliError> {
        match self {
            Self::Half(h) => Ok(Window::square_around(target.mu, target.nu, h)),
            Self::Bounds(a, b, c, d) => Window::new(a, b, c, d).map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

enum Backend {
    Sphere,
    Theta(Box<JacobianSpectralData>),
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

fn config<E: fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn parse_lambda(s: &str) -> Result<SpherePoint, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
        return Ok(SpherePoint::Infinity);
    }
    let z = Complex64::from_str(&t).map_err(|_| format!("cannot parse `{s}` as a complex number or `inf`"))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("`{s}` is not finite; use `inf` for the point at infinity"));
    }
    Ok(SpherePoint::Finite(z))
}

fn parse_site(s: &str) -> Result<Site, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `μ,ν`, got `{s}`"))?;
    let int = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("`{x}`: {e}"));
    Ok(Site::new(int(a)?, int(b)?))
}

fn parse_window(s: &str) -> Result<WindowSpec, String> {
    if let Ok(h) = s.trim().parse::<u32>() {
        return Ok(WindowSpec::Half(h));
    }
    let bad = || format!("expected a half-width or `μmin:μmax,νmin:νmax`, got `{s}`");
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let pair = |r: &str| -> Result<(i64, i64), String> {
        let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
        Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
    };
    let ((a, b), (c, d)) = (pair(x)?, pair(y)?);
    if a > b || c > d {
        return Err(format!("window `{s}` is empty"));
    }
    Ok(WindowSpec::Bounds(a, b, c, d))
}

fn parse_nodes(s: &str) -> Result<usize, String> {
    let n: usize = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if n < 16 {
        return Err(format!("at least 16 nodes are required, got {n}"));
    }
    Ok(n)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !(t.is_finite() && t > 0.0) {
        return Err(format!("tolerance must be positive and finite, got {s}"));
    }
    Ok(t)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `min,max`, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let (lo, hi) = (num(a)?, num(b)?);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range `{s}` must satisfy min < max"));
    }
    Ok((lo, hi))
}

fn load_backend(spec: &str) -> Result<Backend, CliError> {
    if spec == "sphere" {
        return Ok(Backend::Sphere);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let data = JacobianSpectralData::from_json_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
    Ok(Backend::Theta(Box::new(data)))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn label(lambda: SpherePoint) -> LambdaLabel {
    match lambda {
        SpherePoint::Finite(z) => LambdaLabel::finite(z),
        SpherePoint::Infinity => LambdaLabel::INFINITY,
    }
}

fn green_table(run: &RunArgs, g0: bool) -> Result<(), CliError> {
    if let Backend::Theta(_) = load_backend(&run.backend)? {
        return Err(config("green-table is available for the sphere backend only"));
    }
    let window = run.window.resolve(run.target)?;
    let kind = if g0 { GreenKind::G0 } else { GreenKind::G };
    let table = GreenTable::compute(&Sphere, run.lambda, label(run.lambda), kind, window, run.target, run.nodes)
        .map_err(config)?;
    if table.one_sided_limit {
        eprintln!("note: λ = {} lies on the level through the marked points; using the one-sided limit", run.lambda);
    }
    let text = match run.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv_string(),
        Format::Json => table.to_json_string(),
    };
    emit(run.out.as_deref(), &text)
}

fn report_text(report: &VerifyReport, format: Option<Format>) -> String {
    match format {
        Some(Format::Json) => report.to_json_string(),
        Some(Format::Csv) => {
            let mut s = String::from("name,residual,tolerance,passed\n");
            for c in &report.checks {
                s.push_str(&format!("\"{}\",{:e},{:e},{}\n", c.name, c.residual, c.tolerance, c.passed));
            }
            s
        }
        None => report.checks.iter().map(|c| format!("{c}\n")).collect(),
    }
}

fn verify(run: &RunArgs, flip_orientation: bool) -> Result<bool, CliError> {
    let report = match load_backend(&run.backend)? {
        Backend::Sphere => {
            let half = match run.window {
                WindowSpec::Half(h) => h,
                WindowSpec::Bounds(..) => return Err(config("verify takes a half-width window")),
            };
            SphereSuite {
                lambda: run.lambda,
                target: run.target,
                half,
                nodes: run.nodes,
                tol: run.tol,
                flip_orientation,
            }
            .run()
            .map_err(config)?
        }
        Backend::Theta(data) => {
            if flip_orientation {
                return Err(config("--flip-orientation applies to the sphere backend only"));
            }
            theta_suite(&data, DEFAULT_TOL, run.tol).map_err(config)?
        }
    };
    emit(run.out.as_deref(), &report_text(&report, run.format))?;
    for c in report.failures() {
        eprintln!("failed: {} (residual {:.3e}, tol {:.1e})", c.name, c.residual, c.tolerance);
    }
    Ok(report.passed())
}

fn quasimomentum_map(run: &RunArgs, grid: Grid, contours: &[SpherePoint], samples: usize) -> Result<(), CliError> {
    if let Backend::Theta(_) = load_backend(&run.backend)? {
        return Err(config("quasimomentum-map is available for the sphere backend only"));
    }
    let lambdas = if contours.is_empty() { vec![run.lambda] } else { contours.to_vec() };
    let map = QuasimomentumMap::compute(&grid, &lambdas, samples).map_err(config)?;
    let text = match run.format.unwrap_or(Format::Csv) {
        Format::Csv => map.to_csv_string(),
        Format::Json => map.to_json_string(),
    };
    emit(run.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GreenTable { g0 } => green_table(&cli.run, *g0).map(|()| true),
        Command::Verify { flip_orientation } => verify(&cli.run, *flip_orientation),
        Command::QuasimomentumMap {
            re_range,
            im_range,
            steps,
            contours,
            samples,
        } => {
            let grid = Grid {
                re_min: re_range.0,
                re_max: re_range.1,
                im_min: im_range.0,
                im_max: im_range.1,
                re_steps: *steps,
                im_steps: *steps,
            };
            quasimomentum_map(&cli.run, grid, contours, *samples).map(|()| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
