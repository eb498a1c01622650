use std::thread;

use clap::ValueEnum;
use flatsurf::algebra::{Mat2, Vec2};
use flatsurf::surface::Surface;
use flatsurf::verifier::{
    buffer_separation, buffer_separation_traced, equivariance, holonomy_nonmembership, labeled_o_copies,
    monster_sources, one_endedness_hypotheses, parallel_holonomies, reglue_bookkeeping, rigidity_at_o, tameness_window,
    window_equivariance, VerifierError, VerifierReport,
};

use crate::CliError;

/// Search radius for singularity gaps in the tameness check.
const TAMENESS_SEARCH: f64 = 1.0;
const BUFFER_CAP: f64 = 20.0;

pub type Check<'a> = Box<dyn Fn() -> Result<VerifierReport, VerifierError> + Send + Sync + 'a>;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckName {
    Nonmember,
    Buffer,
    Rigidity,
    Equivariance,
    WindowEquivariance,
    Tameness,
    OneEnded,
    Bookkeeping,
    Parallel,
}

#[derive(Debug, Default)]
pub struct CheckOptions {
    pub matrix: Option<Mat2>,
    pub r: Option<f64>,
    pub r_full: Option<f64>,
    pub word: Option<Vec<i32>>,
    pub rho: Option<f64>,
}

pub fn parse_word(s: &str) -> Result<Vec<i32>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| match t.trim().parse::<i32>() {
            Ok(0) | Err(_) => Err(CliError::Input(format!(
                "bad word {s:?}: use nonzero signed generator indices"
            ))),
            Ok(i) => Ok(i),
        })
        .collect()
}

fn construction_name(s: &Surface) -> &str {
    s.construction.as_ref().map(|c| c.name.as_str()).unwrap_or("")
}

fn is_monster(s: &Surface) -> bool {
    construction_name(s) == "monster"
}

fn common<'a>(s: &'a Surface) -> Vec<Check<'a>> {
    vec![
        Box::new(move || tameness_window(s, s.window_radius, TAMENESS_SEARCH)),
        Box::new(move || one_endedness_hypotheses(s)),
        Box::new(move || reglue_bookkeeping(s)),
    ]
}

fn rigidity_checks(s: &Surface) -> Vec<Check<'_>> {
    labeled_o_copies(s)
        .into_iter()
        .map(|(o, g)| -> Check<'_> { Box::new(move || rigidity_at_o(s, o, &g)) })
        .collect()
}

/// The checks that apply to the construction recorded in the file.
pub fn lemmas(s: &Surface) -> Vec<Check<'_>> {
    let mut checks = common(s);
    let info = s.construction.as_ref();
    match construction_name(s) {
        "buffer" => {
            let n = info.map(|c| c.n).unwrap_or(1);
            checks.push(Box::new(|| buffer_separation(&Mat2::IDENTITY)));
            checks.push(Box::new(move || {
                buffer_separation_traced(&Mat2::IDENTITY, n, BUFFER_CAP)
            }));
        }
        "monster" => {
            checks.extend(rigidity_checks(s));
            let gens = info
                .and_then(|c| c.group.as_ref())
                .map(|g| g.effective_generators().len())
                .unwrap_or(0);
            if info.and_then(|c| c.l).unwrap_or(0) >= 1 {
                for i in 1..=gens as i32 {
                    for w in [i, -i] {
                        checks.push(Box::new(move || equivariance(s, &[w])));
                    }
                }
            }
        }
        name @ ("parabolic_P" | "parabolic_Pprime") => {
            checks.push(Box::new(move || parallel_holonomies(s, Vec2::E, 0.5 * s.window_radius)));
            for g in [Mat2::new(1.0, 1.0, 0.0, 1.0), Mat2::diag(1.0, 3.0)] {
                checks.push(Box::new(move || window_equivariance(s, &g, s.window_radius)));
            }
            if name == "parabolic_Pprime" {
                let rho = 4.0 * info.map(|c| c.n).unwrap_or(1) as f64 - 1.0;
                checks.push(Box::new(move || window_equivariance(s, &-Mat2::IDENTITY, rho)));
            }
        }
        _ => {}
    }
    checks
}

fn need<T: Copy>(v: Option<T>, flag: &str, check: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Input(format!("--check {check} needs {flag}")))
}

/// The named check; rigidity expands to one check per copy of `O`.
pub fn single<'a>(s: &'a Surface, name: CheckName, opts: &CheckOptions) -> Result<Vec<Check<'a>>, CliError> {
    let check: Check<'a> = match name {
        CheckName::Nonmember => {
            let g = need(opts.matrix, "--matrix", "nonmember")?;
            let r = need(opts.r, "--r", "nonmember")?;
            let r_full = opts.r_full;
            Box::new(move || {
                let filter: Option<flatsurf::verifier::SourceFilter> =
                    if is_monster(s) { Some(&monster_sources) } else { None };
                holonomy_nonmembership(s, &g, r, r_full, filter)
            })
        }
        CheckName::Buffer => {
            let g = opts.matrix.unwrap_or(Mat2::IDENTITY);
            let n = s
                .construction
                .as_ref()
                .filter(|c| c.name == "buffer")
                .map(|c| c.n)
                .unwrap_or(3);
            Box::new(move || buffer_separation_traced(&g, n, BUFFER_CAP))
        }
        CheckName::Rigidity => {
            let checks = rigidity_checks(s);
            if checks.is_empty() {
                return Err(CliError::Input("no decorated branch point in this surface".into()));
            }
            return Ok(checks);
        }
        CheckName::Equivariance => {
            let word = opts
                .word
                .clone()
                .ok_or_else(|| CliError::Input("--check equivariance needs --word".into()))?;
            Box::new(move || equivariance(s, &word))
        }
        CheckName::WindowEquivariance => {
            let g = need(opts.matrix, "--matrix", "window-equivariance")?;
            let rho = opts.rho.unwrap_or(s.window_radius);
            Box::new(move || window_equivariance(s, &g, rho))
        }
        CheckName::Tameness => {
            let r = opts.r.unwrap_or(s.window_radius);
            Box::new(move || tameness_window(s, r, TAMENESS_SEARCH))
        }
        CheckName::OneEnded => Box::new(move || one_endedness_hypotheses(s)),
        CheckName::Bookkeeping => Box::new(move || reglue_bookkeeping(s)),
        CheckName::Parallel => {
            let r = opts.r.unwrap_or(0.5 * s.window_radius);
            Box::new(move || parallel_holonomies(s, Vec2::E, r))
        }
    };
    Ok(vec![check])
}

/// Runs the checks on scoped worker threads; reports keep the input order.
pub fn run_all(checks: Vec<Check<'_>>) -> Result<Vec<VerifierReport>, CliError> {
    let results: Vec<Result<VerifierReport, VerifierError>> = thread::scope(|scope| {
        let handles: Vec<_> = checks.iter().map(|c| scope.spawn(c)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}
