//! Command-line front end: `params`, `psi`, `wigner`, `bell`, `verify` and
//! `figures`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 internal-consistency error.

pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bell::BellSpec;
use crate::error::Error;
use crate::grid::{
    default_momentum_axis, default_position_axis, evaluate_slice_with, figure_panels, find_peak,
    Axis, FigurePanel, FigureSetup, Label, PhaseGrid, SliceSpec, Target, FIGURE_POINTS,
};
use crate::oscillator::{DeformationParams, PureStateSpec, StateCoefficients};
use crate::wigner2::{PrefactorSign, SuperpositionSpec};
use config::{parse_fix, parse_free, parse_window, path_or, ConfigError, Flags, Format, Level};
use output::{fmt_value, sha256_hex, write_grid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qwigner", version, about = "Wigner functions of the q-deformed oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print lambda, h and suggested plotting windows.
    Params(Flags),
    /// Tabulate psi_n(x) as CSV.
    Psi(Flags),
    /// Wigner grid of a two-level superposition a psi_n + b psi_m.
    Wigner(Flags),
    /// 2D slice of a Bell-state Wigner function.
    Bell(Flags),
    /// Run the verification suite.
    Verify(Flags),
    /// Write every figure panel into a directory.
    Figures(Flags),
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Internal(String),
    Verify,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalConsistency(_) | Error::Truncation { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn run() -> i32 {
    run_from(std::env::args_os(), &mut io::stdout())
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out`. Returns the exit code.
pub fn run_from<I, T>(args: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify) => EXIT_VERIFY,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INTERNAL
        }
    }
}

type Handler = fn(&Flags, &mut (dyn Write + Send)) -> Outcome;

fn dispatch(command: Command, out: &mut (dyn Write + Send)) -> Outcome {
    let (flags, handler): (Flags, Handler) = match command {
        Command::Params(f) => (f, cmd_params),
        Command::Psi(f) => (f, cmd_psi),
        Command::Wigner(f) => (f, cmd_wigner),
        Command::Bell(f) => (f, cmd_bell),
        Command::Verify(f) => (f, cmd_verify),
        Command::Figures(f) => (f, cmd_figures),
    };
    let flags = config::load(flags)?;
    match flags.threads {
        None => handler(&flags, out),
        Some(0) => Err(Failure::Config("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
            pool.install(|| handler(&flags, out))
        }
    }
}

fn params_pair(flags: &Flags) -> Result<(DeformationParams, DeformationParams), Failure> {
    let mass = flags.mass.unwrap_or(1.0);
    let omega = flags.omega.unwrap_or(1.0);
    let hbar = flags.hbar.unwrap_or(1.0);
    let q_a = flags.q_a.unwrap_or(0.001);
    let a = DeformationParams::new(mass, omega, hbar, q_a)?;
    let b = DeformationParams::new(mass, omega, hbar, flags.q_b.unwrap_or(q_a))?;
    Ok((a, b))
}

fn sign(flags: &Flags) -> PrefactorSign {
    if flags.debug_flip_sign {
        PrefactorSign::AsPrinted
    } else {
        PrefactorSign::Positive
    }
}

fn emit(out: &mut (dyn Write + Send), text: &str) -> Outcome {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_params(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let (a, b) = params_pair(flags)?;
    let n_max = flags.n.unwrap_or(3).max(flags.m.unwrap_or(5));
    let mut text = String::new();
    let _ = writeln!(text, "lambda = {}", a.lambda());
    let _ = writeln!(text, "h = {}", a.h());
    let _ = writeln!(text, "momentum_shift = {}", a.momentum_shift());
    if b.q() != a.q() {
        let _ = writeln!(text, "h_b = {}", b.h());
        let _ = writeln!(text, "momentum_shift_b = {}", b.momentum_shift());
    }
    let p = default_momentum_axis(Label::P, n_max, &a, FIGURE_POINTS)?;
    let _ = writeln!(text, "window x = [-1.5, 1.5]");
    let _ = writeln!(text, "window p = [{}, {}] (levels up to {n_max})", p.min, p.max);
    emit(out, &text)
}

fn cmd_psi(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let (params, _) = params_pair(flags)?;
    let n = flags.n.unwrap_or(0);
    let state = StateCoefficients::new(&PureStateSpec::new(n, params)?)?;
    let mut axis = Axis::new(Label::X, -6.0, 6.0, 241)?;
    for w in &flags.window {
        let w = parse_window(w)?;
        if w.label != Label::X {
            return Err(Failure::Config(format!("psi takes an x window, not {}", w.label)));
        }
        axis = Axis::new(Label::X, w.min.resolve(Label::X, &params, &params)?, w.max.resolve(Label::X, &params, &params)?, w.count)?;
    }
    let mut csv = format!("# fixed: n={n},q={}\nx,re,im,abs2\n", fmt_value(params.q()));
    for x in axis.points() {
        let v = state.eval(x);
        let _ = writeln!(csv, "{},{},{},{}", fmt_value(x), fmt_value(v.re), fmt_value(v.im), fmt_value(v.norm_sqr()));
    }
    match &flags.out {
        None => emit(out, &csv),
        Some(prefix) => {
            let path = PathBuf::from(format!("{}.csv", prefix.display()));
            std::fs::write(&path, &csv)?;
            emit(out, &format!("wrote {} {}\n", path.display(), sha256_hex(csv.as_bytes())))
        }
    }
}

fn superposition_spec(flags: &Flags, params: DeformationParams) -> Result<SuperpositionSpec, Failure> {
    let n = flags.n.unwrap_or(3);
    let m = flags.m.unwrap_or(5);
    let rest = |v: f64| (1.0 - v * v).max(0.0).sqrt();
    let (a, b) = match (flags.amp_a, flags.amp_b) {
        (None, None) => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
        (Some(a), None) => (a, rest(a)),
        (None, Some(b)) => (rest(b), b),
        (Some(a), Some(b)) => (a, b),
    };
    Ok(SuperpositionSpec::new(a.into(), b.into(), n, m, params, params)?)
}

/// Default axis for `label`: positions on `[-1.5, 1.5]`, momenta on
/// `[-(n_max + 2) s, 2 s]`.
fn default_axis(label: Label, n_max: usize, a: &DeformationParams, b: &DeformationParams) -> Result<Axis, Failure> {
    let axis = match label {
        Label::P | Label::PA => default_momentum_axis(label, n_max, a, FIGURE_POINTS)?,
        Label::PB => default_momentum_axis(label, n_max, b, FIGURE_POINTS)?,
        _ => default_position_axis(label, FIGURE_POINTS)?,
    };
    Ok(axis)
}

/// Free axes from defaults overridden by `--window`.
fn free_axes(
    flags: &Flags,
    free: (Label, Label),
    n_max: usize,
    a: &DeformationParams,
    b: &DeformationParams,
) -> Result<(Axis, Axis), Failure> {
    let mut axes = [default_axis(free.0, n_max, a, b)?, default_axis(free.1, n_max, a, b)?];
    for w in &flags.window {
        let w = parse_window(w)?;
        let slot = axes
            .iter_mut()
            .find(|ax| ax.label == w.label)
            .ok_or_else(|| Failure::Config(format!("--window {} is not a free axis", w.label)))?;
        *slot = Axis::new(w.label, w.min.resolve(w.label, a, b)?, w.max.resolve(w.label, a, b)?, w.count)?;
    }
    Ok((axes[0], axes[1]))
}

fn report_grid(
    text: &mut String,
    name: &str,
    grid: &PhaseGrid,
    prefix: &Path,
    format: Format,
    decompose: bool,
) -> Outcome {
    let peak = find_peak(grid);
    let [first, second] = grid.slice.free;
    let _ = writeln!(
        text,
        "{name}: peak {}={} {}={} W={} (run hash {})",
        first.label,
        peak.coord_1,
        second.label,
        peak.coord_2,
        peak.value,
        &grid.meta.spec_hash[..16]
    );
    for w in write_grid(grid, prefix, format.csv(), format.pgm(), decompose)? {
        let _ = writeln!(text, "  wrote {} sha256={}", w.path.display(), w.sha256);
    }
    Ok(())
}

fn cmd_wigner(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let (params, _) = params_pair(flags)?;
    let spec = superposition_spec(flags, params)?;
    if let Some(free) = &flags.free {
        if parse_free(free)? != (Label::X, Label::P) {
            return Err(Failure::Config("wigner plots the (x,p) plane; use --free x,p".into()));
        }
    }
    let fixed = flags
        .fix
        .iter()
        .map(|f| parse_fix(f).and_then(|(l, c)| Ok((l, c.resolve(l, &params, &params)?))))
        .collect::<Result<Vec<_>, _>>()?;
    let (x, p) = free_axes(flags, (Label::X, Label::P), spec.n.max(spec.m), &params, &params)?;
    let slice = SliceSpec::new(x, p, fixed)?;
    let target = Target::Superposition {
        spec,
        sign: sign(flags),
    };
    let grid = evaluate_slice_with(&target, &slice, false)?;
    let mut text = String::new();
    let prefix = path_or(&flags.out, "wigner");
    report_grid(&mut text, "wigner", &grid, &prefix, flags.format.unwrap_or(Format::Csv), false)?;
    emit(out, &text)
}

fn write_panels(
    panels: &[FigurePanel],
    prefix_of: impl Fn(&str) -> PathBuf,
    format: Format,
    decompose: bool,
    out: &mut (dyn Write + Send),
) -> Outcome {
    for panel in panels {
        let grid = evaluate_slice_with(&panel.target, &panel.slice, decompose)?;
        let mut text = String::new();
        report_grid(&mut text, &panel.name, &grid, &prefix_of(&panel.name), format, decompose)?;
        emit(out, &text)?;
    }
    Ok(())
}

fn cmd_bell(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let (a, b) = params_pair(flags)?;
    let n = flags.n.unwrap_or(2);
    let m = flags.m.unwrap_or(6);
    let format = flags.format.unwrap_or(Format::Csv);
    let prefix = path_or(&flags.out, "bell");
    let custom = flags.free.is_some() || !flags.fix.is_empty() || !flags.window.is_empty();

    let Some(variant) = flags.variant else {
        if custom {
            return Err(Failure::Config("a custom Bell slice needs --variant".into()));
        }
        // the conditional-slice families of the figures
        let setup = FigureSetup {
            params: a,
            bell: (n, m),
            ..FigureSetup::standard()?
        };
        if a != b {
            return Err(Failure::Config("the default figure family uses one q; pass --variant for q-a != q-b".into()));
        }
        let panels: Vec<FigurePanel> = figure_panels(&setup)?
            .into_iter()
            .filter(|p| p.name.starts_with("fig2") || p.name.starts_with("fig3"))
            .collect();
        let base = prefix.display().to_string();
        return write_panels(&panels, |name| PathBuf::from(format!("{base}_{name}")), format, flags.decompose, out);
    };

    let spec = BellSpec::new(variant, n, m, a, b)?;
    let free = match &flags.free {
        Some(s) => parse_free(s)?,
        None => (Label::XA, Label::PA),
    };
    let mut fixed: Vec<(Label, f64)> = Vec::new();
    for f in &flags.fix {
        let (label, c) = parse_fix(f)?;
        fixed.push((label, c.resolve(label, &a, &b)?));
    }
    // unspecified coordinates: positions at 0, momenta on the n-lobe
    for label in [Label::XA, Label::PA, Label::XB, Label::PB] {
        if label != free.0 && label != free.1 && !fixed.iter().any(|f| f.0 == label) {
            let value = match label {
                Label::PA => -(n as f64) * a.momentum_shift(),
                Label::PB => -(n as f64) * b.momentum_shift(),
                _ => 0.0,
            };
            fixed.push((label, value));
        }
    }
    let (first, second) = free_axes(flags, free, n.max(m), &a, &b)?;
    let slice = SliceSpec::new(first, second, fixed)?;
    let panel = FigurePanel {
        name: format!("bell {variant}"),
        target: Target::Bell(spec),
        slice,
    };
    write_panels(&[panel], |_| prefix.clone(), format, flags.decompose, out)
}

fn cmd_figures(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let (params, _) = params_pair(flags)?;
    let setup = FigureSetup {
        params,
        ..FigureSetup::standard()?
    };
    let dir = path_or(&flags.out, "figures");
    let panels = figure_panels(&setup)?;
    let format = flags.format.unwrap_or(Format::Both);
    write_panels(&panels, |name| dir.join(name), format, flags.decompose, out)
}

fn cmd_verify(flags: &Flags, out: &mut (dyn Write + Send)) -> Outcome {
    let opts = verify::VerifyOptions {
        level: flags.verify.unwrap_or(Level::Fast),
        sign: sign(flags),
    };
    let checks = verify::run_all(&opts);
    let summary = verify::summary_csv(&checks);
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut text = verify::text_report(&checks);
    let _ = writeln!(text, "{} checks, {failed} failed\n", checks.len());
    text.push_str(&summary);
    emit(out, &text)?;
    if let Some(path) = &flags.out {
        std::fs::write(path, &summary)?;
    }
    if failed > 0 {
        Err(Failure::Verify)
    } else {
        Ok(())
    }
}
