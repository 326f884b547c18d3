//! Command-line interface: batch spline interpolation, evaluation, energy,
//! verification, convergence studies, and surface synthesis with file-based
//! I/O. Exit codes: 0 success, 2 input error, 3 numerical failure,
//! 4 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use polyspline::analysis::{
    builtin_datum, energy_of_spline, energy_on, energy_sampled, error_study, fitted_order,
    AnalysisError, StudyOptions,
};
use polyspline::artifact::{
    self, read_json, read_radius_value_csv, write_json, write_radius_value_csv,
    ConvergenceArtifact, SplineArtifact, SurfaceArtifact, SCHEMA_VERSION,
};
use polyspline::knots::KnotSet;
use polyspline::quadrature::GaussLegendre;
use polyspline::spline::{build_interpolant, SplineError};
use polyspline::surface::{
    export_mesh, SurfaceError, SurfaceModel, TransfiniteDataset, ZeroModeStrategy,
};
use polyspline::verify::{run_suite, verify_spline, SuiteOptions};

#[derive(Parser)]
#[command(
    name = "polyspline",
    version,
    about = "Interpolatory Beppo Levi L_k-splines and transfinite polyspline surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate a r,value table with the L_k-spline for one frequency.
    Interp {
        /// Nonzero angular frequency.
        #[arg(long)]
        k: i32,
        /// Input CSV with strictly increasing `r,value` rows.
        #[arg(long)]
        input: PathBuf,
        /// Output JSON spline artifact.
        #[arg(long)]
        output: PathBuf,
        /// Dense-sample CSV of the built spline; defaults to the artifact
        /// path with a `.samples.csv` extension.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a spline artifact on points or a grid.
    Eval {
        /// Spline artifact produced by `interp`.
        #[arg(long)]
        artifact: PathBuf,
        /// Comma-separated radii, e.g. `0.5,1,2.5`.
        #[arg(long)]
        points: Option<String>,
        /// Grid `start:stop:count`, e.g. `0:4:200`.
        #[arg(long)]
        grid: Option<String>,
        /// Derivative order (0, 1 or 2).
        #[arg(long, default_value_t = 0)]
        deriv: u32,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Energy of a spline artifact, closed form against quadrature.
    Energy {
        #[arg(long)]
        artifact: PathBuf,
        /// Output JSON (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
    },
    /// Run the randomized verification suite, or structural checks of one
    /// artifact when `--input` is given.
    Verify {
        /// Spline artifact to check; omit to run the randomized suite.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output JSON report (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
        /// Tolerance for quadrature-limited defects.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Mesh-refinement error study against a built-in data function.
    Converge {
        #[arg(long)]
        k: i32,
        /// Built-in datum id: r2-exp, r3-exp, or zero.
        #[arg(long, default_value = "r2-exp")]
        datum: String,
        /// Comma-separated knot counts per level.
        #[arg(long, default_value = "5,9,17,33")]
        levels: String,
        /// Knot interval.
        #[arg(long, default_value_t = 1.0)]
        rmin: f64,
        #[arg(long, default_value_t = 2.0)]
        rmax: f64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthesize a surface from curves sampled on concentric circles.
    Surface {
        /// Input dataset JSON: radii, theta_samples, curves, truncation.
        #[arg(long)]
        input: PathBuf,
        /// Output JSON surface artifact.
        #[arg(long)]
        output: PathBuf,
        /// Optional mesh CSV over a default grid.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Override the dataset's truncation.
        #[arg(long)]
        truncation: Option<usize>,
        /// Zero-mode strategy: natural-cubic or zero.
        #[arg(long, default_value = "natural-cubic")]
        zero_mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a surface artifact into a r,theta,x,y,z CSV mesh.
    Mesh {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Radial grid `start:stop:count`, or `auto` for the knot span.
        #[arg(long, default_value = "auto")]
        r_grid: String,
        /// Number of equispaced angles on [-pi, pi).
        #[arg(long, default_value_t = 64)]
        theta_grid: usize,
    },
}

// ---------------------------------------------------------------------------
// Error-to-exit-code mapping

enum CliError {
    Input(String),
    Numerical(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<artifact::ArtifactError> for CliError {
    fn from(e: artifact::ArtifactError) -> Self {
        match e {
            artifact::ArtifactError::Spline(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SplineError> for CliError {
    fn from(e: SplineError) -> Self {
        match e {
            SplineError::SingularSystem { .. } | SplineError::GramNotPositiveDefinite => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Divergent(_) => CliError::Numerical(e.to_string()),
            AnalysisError::Spline(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::ModeBuild { .. } => CliError::Numerical(e.to_string()),
            SurfaceError::Analysis(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies

fn load_spline(path: &Path) -> Result<(SplineArtifact, polyspline::BeppoLeviSpline), CliError> {
    let art: SplineArtifact = read_json(path)?;
    let spline = art.to_spline()?;
    Ok((art, spline))
}

fn cmd_interp(
    k: i32,
    input: &Path,
    output: &Path,
    samples: Option<&Path>,
    seed: u64,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let rows = read_radius_value_csv(&text)?;
    let (radii, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let knots = KnotSet::new(radii).map_err(SplineError::from)?;
    let spline = build_interpolant(k, &knots, &values)?;
    write_json(output, &SplineArtifact::from_spline(&spline, Some(seed)))?;
    let samples_path = samples
        .map(Path::to_path_buf)
        .unwrap_or_else(|| output.with_extension("samples.csv"));
    let hi = 2.0 * knots.last();
    let rows: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let r = hi * i as f64 / 400.0;
            (r, spline.value(r))
        })
        .collect();
    let mut buf = Vec::new();
    write_radius_value_csv(&mut buf, &rows)
        .map_err(|e| CliError::Input(format!("sample CSV write failed: {e}")))?;
    std::fs::write(&samples_path, buf)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", samples_path.display())))?;
    println!(
        "wrote spline artifact (k = {k}, n = {}, solve residual {:.2e}) to {}",
        knots.len(),
        spline.solve_residual(),
        output.display()
    );
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "grid must be start:stop:count, got \"{spec}\""
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Input(format!("bad grid start \"{}\"", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Input(format!("bad grid stop \"{}\"", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Input(format!("bad grid count \"{}\"", parts[2])))?;
    if count < 2 || stop <= start {
        return Err(CliError::Input(
            "grid needs stop > start and count >= 2".into(),
        ));
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_eval(
    artifact: &Path,
    points: Option<&str>,
    grid: Option<&str>,
    deriv: u32,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let (_, spline) = load_spline(artifact)?;
    let mut radii: Vec<f64> = Vec::new();
    if let Some(pts) = points {
        for p in pts.split(',') {
            radii.push(
                p.trim()
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad point \"{p}\"")))?,
            );
        }
    }
    if let Some(g) = grid {
        radii.extend(parse_grid(g)?);
    }
    if radii.is_empty() {
        return Err(CliError::Input("provide --points and/or --grid".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        rows.push((r, spline.evaluate(r, deriv)?));
    }
    let mut buf = Vec::new();
    write_radius_value_csv(&mut buf, &rows)
        .map_err(|e| CliError::Input(format!("CSV write failed: {e}")))?;
    write_or_print(output, &String::from_utf8(buf).expect("CSV is UTF-8"))
}

#[derive(Serialize)]
struct EnergyOutput {
    schema_version: u32,
    kind: &'static str,
    seed: Option<u64>,
    k: i32,
    is_seminorm: bool,
    closed_form_squared: f64,
    closed_form_norm: f64,
    quadrature_squared: f64,
    relative_gap: f64,
}

fn cmd_energy(path: &Path, output: Option<&Path>, quad_order: usize) -> Result<(), CliError> {
    let (art, spline) = load_spline(path)?;
    let artifact_seed = art.seed;
    let exact = energy_of_spline(&spline)?;
    let rule = GaussLegendre::new(quad_order);
    let window = 4.0 * spline.knots().last().unwrap();
    let mut breaks = vec![0.0];
    breaks.extend_from_slice(spline.knots());
    breaks.push(window);
    let quad_part = energy_sampled(spline.k(), spline.pieces(), &breaks, &rule, 8)?.squared;
    let tail = energy_on(spline.k(), spline.pieces(), window, f64::INFINITY)?.squared;
    let quadrature = quad_part + tail;
    let gap = (quadrature - exact.squared).abs() / exact.squared.max(1e-300);
    let out = EnergyOutput {
        schema_version: SCHEMA_VERSION,
        kind: "energy",
        seed: artifact_seed,
        k: spline.k(),
        is_seminorm: exact.is_seminorm,
        closed_form_squared: exact.squared,
        closed_form_norm: exact.norm(),
        quadrature_squared: quadrature,
        relative_gap: gap,
    };
    write_or_print(output, &artifact::to_json_string(&out)?)
}

fn cmd_verify(
    input: Option<&Path>,
    output: Option<&Path>,
    seed: u64,
    quad_order: usize,
    tol: f64,
) -> Result<(), CliError> {
    let report = match input {
        Some(path) => {
            let (art, spline) = load_spline(path)?;
            verify_spline(&spline, art.seed.unwrap_or(seed), Some(art.k))
        }
        None => run_suite(&SuiteOptions {
            seed,
            quad_order,
            defect_tol: tol,
        }),
    };
    write_or_print(output, &artifact::to_json_string(&report)?)?;
    for check in &report.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        eprintln!("[{status}] {} ({})", check.name, check.context);
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(
            "one or more verification checks failed; see the report".into(),
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_converge(
    k: i32,
    datum: &str,
    levels: &str,
    rmin: f64,
    rmax: f64,
    output: &Path,
    quad_order: usize,
    seed: u64,
) -> Result<(), CliError> {
    let g = builtin_datum(datum).ok_or_else(|| {
        CliError::Input(format!(
            "unknown datum \"{datum}\"; try r2-exp, r3-exp, zero"
        ))
    })?;
    let mut family = Vec::new();
    for level in levels.split(',') {
        let n: usize = level
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad level \"{level}\"")))?;
        if n < 2 {
            return Err(CliError::Input("levels need n >= 2".into()));
        }
        family.push(KnotSet::uniform(rmin, rmax, n).map_err(SplineError::from)?);
    }
    let opts = StudyOptions {
        quad_order,
        ..StudyOptions::default()
    };
    let reports = error_study(k, g.as_ref(), &family, &opts)?;
    let bounds_satisfied = reports.iter().all(|r| r.bounds_satisfied());
    let order = fitted_order(&reports, |r| r.err_l2_0);
    let art = ConvergenceArtifact {
        schema_version: SCHEMA_VERSION,
        kind: "convergence".into(),
        seed: Some(seed),
        k,
        datum: datum.into(),
        levels: reports,
        fitted_order_l2_m0: order,
        bounds_satisfied,
    };
    write_json(output, &art)?;
    println!(
        "wrote convergence report to {} (bounds satisfied: {bounds_satisfied}, fitted order: {})",
        output.display(),
        order.map_or("n/a".into(), |o| format!("{o:.3}"))
    );
    if bounds_satisfied {
        Ok(())
    } else {
        Err(CliError::Verification(
            "measured errors exceed the theoretical bounds".into(),
        ))
    }
}

/// Input dataset format for the `surface` command.
#[derive(Deserialize)]
struct DatasetJson {
    radii: Vec<f64>,
    theta_samples: usize,
    curves: Vec<Vec<f64>>,
    #[serde(default)]
    truncation: Option<usize>,
}

fn cmd_surface(
    input: &Path,
    output: &Path,
    mesh: Option<&Path>,
    truncation_override: Option<usize>,
    zero_mode: &str,
    seed: u64,
) -> Result<(), CliError> {
    let data: DatasetJson = read_json(input)?;
    for (j, curve) in data.curves.iter().enumerate() {
        if curve.len() != data.theta_samples {
            return Err(CliError::Input(format!(
                "curve {j} has {} samples but theta_samples = {}",
                curve.len(),
                data.theta_samples
            )));
        }
    }
    let radii = KnotSet::new(data.radii).map_err(SplineError::from)?;
    let truncation = truncation_override.or(data.truncation);
    let dataset = TransfiniteDataset::ingest(radii, data.curves, truncation)?;
    for (j, diag) in dataset.diagnostics().iter().enumerate() {
        if diag.leakage_flagged {
            eprintln!(
                "warning: curve {j} has spectral content beyond the retained band \
                 (truncation residual {:.3e}, weighted coefficient sum {:.3e})",
                diag.truncation_residual, diag.wiener_sum
            );
        }
    }
    let strategy = match zero_mode {
        "natural-cubic" => ZeroModeStrategy::NaturalCubic,
        "zero" => ZeroModeStrategy::Zero,
        other => {
            return Err(CliError::Input(format!(
                "unknown zero-mode strategy \"{other}\"; try natural-cubic or zero"
            )))
        }
    };
    let model = SurfaceModel::build(&dataset, strategy)?;
    write_json(output, &SurfaceArtifact::from_model(&model, Some(seed)))?;
    if let Some(mesh_path) = mesh {
        let r_grid: Vec<f64> = {
            let (lo, hi) = (model.radii().first(), model.radii().last());
            (0..33).map(|i| lo + (hi - lo) * i as f64 / 32.0).collect()
        };
        let thetas = polyspline::surface::theta_grid(64);
        let mut buf = Vec::new();
        export_mesh(&model, &r_grid, &thetas, &mut buf)?;
        std::fs::write(mesh_path, buf)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", mesh_path.display())))?;
    }
    println!(
        "wrote surface artifact (K = {}, {} circles) to {}",
        model.truncation(),
        model.radii().len(),
        output.display()
    );
    Ok(())
}

fn cmd_mesh(
    artifact_path: &Path,
    output: &Path,
    r_grid: &str,
    theta_count: usize,
) -> Result<(), CliError> {
    let art: SurfaceArtifact = read_json(artifact_path)?;
    let model = art.to_model()?;
    let radii: Vec<f64> = if r_grid == "auto" {
        let (lo, hi) = (model.radii().first(), model.radii().last());
        (0..33).map(|i| lo + (hi - lo) * i as f64 / 32.0).collect()
    } else {
        parse_grid(r_grid)?
    };
    if theta_count == 0 {
        return Err(CliError::Input("theta grid must be nonempty".into()));
    }
    let thetas = polyspline::surface::theta_grid(theta_count);
    let mut buf = Vec::new();
    export_mesh(&model, &radii, &thetas, &mut buf)?;
    std::fs::write(output, buf)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", output.display())))?;
    println!(
        "wrote mesh ({} x {theta_count} samples) to {}",
        radii.len(),
        output.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Interp {
            k,
            input,
            output,
            samples,
            seed,
        } => cmd_interp(k, &input, &output, samples.as_deref(), seed),
        Command::Eval {
            artifact,
            points,
            grid,
            deriv,
            output,
        } => cmd_eval(
            &artifact,
            points.as_deref(),
            grid.as_deref(),
            deriv,
            output.as_deref(),
        ),
        Command::Energy {
            artifact,
            output,
            quad_order,
        } => cmd_energy(&artifact, output.as_deref(), quad_order),
        Command::Verify {
            input,
            output,
            seed,
            quad_order,
            tol,
        } => cmd_verify(input.as_deref(), output.as_deref(), seed, quad_order, tol),
        Command::Converge {
            k,
            datum,
            levels,
            rmin,
            rmax,
            output,
            quad_order,
            seed,
        } => cmd_converge(k, &datum, &levels, rmin, rmax, &output, quad_order, seed),
        Command::Surface {
            input,
            output,
            mesh,
            truncation,
            zero_mode,
            seed,
        } => cmd_surface(
            &input,
            &output,
            mesh.as_deref(),
            truncation,
            &zero_mode,
            seed,
        ),
        Command::Mesh {
            artifact,
            output,
            r_grid,
            theta_grid,
        } => cmd_mesh(&artifact, &output, &r_grid, theta_grid),
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("POLYSPLINE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        } else {
            eprintln!("warning: ignoring unparsable POLYSPLINE_THREADS = {threads}");
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
