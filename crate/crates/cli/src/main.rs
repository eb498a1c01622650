mod plot;
mod suite;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flatsurf::algebra::{Mat2, Vec2};
use flatsurf::constructions::{
    buffer, decorated, monster, parabolic_p, parabolic_p_prime, ConstructionError, GroupSpec, TruncationParams,
};
use flatsurf::surface::{CensusRow, Surface, SurfaceError, SurfacePoint};
use flatsurf::tolerance::set_eps_geom;
use flatsurf::verifier::VerifierError;

/// Builds slit-construction flat surfaces and checks their structure.
#[derive(Parser, Debug)]
#[command(name = "flatsurf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction and write its surface file.
    Build {
        construction: Construction,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Window radius; defaults to just beyond the outermost mark.
        #[arg(long)]
        r: Option<f64>,
        /// Group file for the monster: {"name": .., "generators": [[[a, b], [c, d]], ..]}.
        #[arg(short = 'g', long = "group")]
        group: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run verifier checks on a surface file and print the reports.
    Verify {
        file: PathBuf,
        #[arg(long, conflicts_with = "check")]
        suite: Option<SuiteName>,
        #[arg(long)]
        check: Option<suite::CheckName>,
        /// Matrix as "[[a,b],[c,d]]".
        #[arg(long)]
        matrix: Option<String>,
        /// Source radius for non-membership.
        #[arg(long)]
        r: Option<f64>,
        /// Enumeration radius for non-membership.
        #[arg(long)]
        r_full: Option<f64>,
        /// Generator word as comma-separated signed indices, e.g. "1,-2".
        #[arg(long, allow_hyphen_values = true)]
        word: Option<String>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Trace a geodesic and print its segments as JSON lines.
    Trace {
        file: PathBuf,
        /// Start as "sheet,x,y" or "sheet,branch,x,y".
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long)]
        len: f64,
    },
    /// Print the cone-angle census of the window.
    Census {
        file: PathBuf,
        /// Radius of the census; defaults to the window radius.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Render the sheets, marks and singularities as SVG.
    Plot {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Half-width of each pane in surface units.
        #[arg(long)]
        extent: Option<f64>,
        /// Pane size in pixels.
        #[arg(long, default_value_t = 320.0)]
        size: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Construction {
    Buffer,
    Decorated,
    ParabolicP,
    ParabolicPprime,
    Monster,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteName {
    Lemmas,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Construction(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Construction(_) => 3,
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::GeneratorInU(_)
            | ConstructionError::NotOrientationPreserving(_)
            | ConstructionError::InvalidParams(_) => CliError::Input(e.to_string()),
            _ => CliError::Construction(e.to_string()),
        }
    }
}

impl From<VerifierError> for CliError {
    fn from(e: VerifierError) -> Self {
        match e {
            VerifierError::Surface(_) => CliError::Construction(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read_surface(path: &Path) -> Result<Surface, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Surface::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad {what} {s:?}")))
        })
        .collect()
}

fn parse_vec(s: &str, what: &str) -> Result<Vec2, CliError> {
    match *parse_numbers(s, what)?.as_slice() {
        [x, y] => Ok(Vec2::new(x, y)),
        _ => Err(CliError::Input(format!("{what} needs two numbers, got {s:?}"))),
    }
}

pub fn parse_matrix(s: &str) -> Result<Mat2, CliError> {
    let m: Mat2 = serde_json::from_str(s).map_err(|e| CliError::Input(format!("bad matrix {s:?}: {e}")))?;
    if !m.is_finite() {
        return Err(CliError::Input(format!("matrix {s:?} is not finite")));
    }
    Ok(m)
}

fn parse_from(s: &str) -> Result<SurfacePoint, CliError> {
    let v = parse_numbers(s, "start point")?;
    let index = |x: f64| -> Result<i64, CliError> {
        if x.fract() == 0.0 {
            Ok(x as i64)
        } else {
            Err(CliError::Input(format!("sheet and branch must be integers in {s:?}")))
        }
    };
    let (sheet, branch, x, y) = match *v.as_slice() {
        [sh, x, y] => (index(sh)?, 0, x, y),
        [sh, b, x, y] => (index(sh)?, index(b)?, x, y),
        _ => return Err(CliError::Input(format!("start needs 3 or 4 numbers, got {s:?}"))),
    };
    let sheet = usize::try_from(sheet).map_err(|_| CliError::Input(format!("negative sheet in {s:?}")))?;
    Ok(SurfacePoint::new(sheet, branch, Vec2::new(x, y)))
}

fn read_group(path: Option<&Path>) -> Result<GroupSpec, CliError> {
    let Some(path) = path else {
        return Ok(GroupSpec::trivial());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: invalid group spec: {e}", path.display())))
}

fn angle_label(row: &CensusRow) -> String {
    match row.multiple() {
        None => "inf".to_owned(),
        Some(m) if (row.angle - m as f64 * std::f64::consts::TAU).abs() < 1e-6 => format!("{}π", 2 * m),
        Some(_) => format!("{:.6}π", row.angle / std::f64::consts::PI),
    }
}

fn census_line(rows: &[CensusRow]) -> String {
    rows.iter()
        .map(|r| format!("{}:{}", angle_label(r), r.count))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_build(
    construction: Construction,
    n: usize,
    l: usize,
    r: Option<f64>,
    group: Option<&Path>,
    output: &Path,
) -> Result<u8, CliError> {
    if let Some(r) = r {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Input(format!("--r must be positive, got {r}")));
        }
    }
    let mut s = match construction {
        Construction::Buffer => buffer(n)?,
        Construction::Decorated => decorated(n)?,
        Construction::ParabolicP => parabolic_p(n)?,
        Construction::ParabolicPprime => parabolic_p_prime(n)?,
        Construction::Monster => {
            let spec = read_group(group)?;
            spec.validate()?;
            monster(&spec, &TruncationParams { n, l, r })?
        }
    };
    if let (Some(radius), false) = (r, matches!(construction, Construction::Monster)) {
        let extent = s.mark_extent();
        if radius <= extent {
            return Err(ConstructionError::WindowTooSmall { radius, extent }.into());
        }
        s.window_radius = radius;
    }
    write_file(output, &s.to_json())?;
    println!("wrote {}", output.display());
    println!(
        "sheets: {}  marks: {}  slit pairs: {}",
        s.sheets().len(),
        s.marks().len(),
        s.slits().len()
    );
    println!("window radius: {}", s.window_radius);
    println!("census: {}", census_line(&s.singularity_census(s.window_radius)));
    println!("euler_delta: {}", s.euler_delta());
    Ok(0)
}

fn cmd_trace(file: &Path, from: &str, dir: &str, len: f64) -> Result<u8, CliError> {
    let s = read_surface(file)?;
    let start = parse_from(from)?;
    let dir = parse_vec(dir, "direction")?;
    if dir.norm() == 0.0 || !dir.is_finite() {
        return Err(CliError::Input("direction must be a nonzero vector".into()));
    }
    if !(len.is_finite() && len >= 0.0) {
        return Err(CliError::Input(format!("--len must be non-negative, got {len}")));
    }
    let path = s.trace(&start, dir, len)?;
    for (a, b) in &path.segments {
        println!("{}", serde_json::json!({ "from": a, "to": b }));
    }
    println!(
        "{}",
        serde_json::json!({
            "length": path.length,
            "holonomy": path.holonomy,
            "terminal": path.terminal,
            "crossings": path.crossings(),
        })
    );
    Ok(0)
}

fn cmd_census(file: &Path, r: Option<f64>, json: bool) -> Result<u8, CliError> {
    let s = read_surface(file)?;
    let rows = s.singularity_census(r.unwrap_or(s.window_radius));
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("census serializes"));
    } else {
        println!("{}", census_line(&rows));
    }
    Ok(0)
}

fn cmd_plot(file: &Path, output: &Path, extent: Option<f64>, size: f64) -> Result<u8, CliError> {
    let s = read_surface(file)?;
    let extent = extent.unwrap_or(s.mark_extent() + 1.0);
    if !(extent > 0.0 && size > 0.0) {
        return Err(CliError::Input("plot extent and size must be positive".into()));
    }
    write_file(output, &plot::render(&s, extent, size))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Ok(v) = std::env::var("FLATSURF_EPS") {
        let eps: f64 = v
            .parse()
            .map_err(|_| CliError::Input(format!("FLATSURF_EPS={v:?} is not a number")))?;
        if !set_eps_geom(eps) {
            return Err(CliError::Input(format!("FLATSURF_EPS={v:?} must be a positive number")));
        }
    }
    match cli.command {
        Command::Build {
            construction,
            n,
            l,
            r,
            group,
            output,
        } => cmd_build(construction, n, l, r, group.as_deref(), &output),
        Command::Verify {
            file,
            suite,
            check,
            matrix,
            r,
            r_full,
            word,
            rho,
            output,
        } => {
            let s = read_surface(&file)?;
            let opts = suite::CheckOptions {
                matrix: matrix.as_deref().map(parse_matrix).transpose()?,
                r,
                r_full,
                word: word.as_deref().map(suite::parse_word).transpose()?,
                rho,
            };
            let checks = match (suite, check) {
                (_, Some(c)) => suite::single(&s, c, &opts)?,
                (Some(SuiteName::Lemmas) | None, None) => suite::lemmas(&s),
            };
            let reports = suite::run_all(checks)?;
            let ok = reports.iter().all(|r| r.acceptable());
            let text = serde_json::to_string_pretty(&serde_json::json!({ "pass": ok, "reports": reports }))
                .expect("reports serialize");
            match output {
                Some(path) => write_file(&path, &(text + "\n"))?,
                None => println!("{text}"),
            }
            for r in &reports {
                eprintln!("{:>12}  {}", format!("{:?}", r.status).to_lowercase(), r.check);
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Trace { file, from, dir, len } => cmd_trace(&file, &from, &dir, len),
        Command::Census { file, r, json } => cmd_census(&file, r, json),
        Command::Plot {
            file,
            output,
            extent,
            size,
        } => cmd_plot(&file, &output, extent, size),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (CliError::Input(msg) | CliError::Construction(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}
