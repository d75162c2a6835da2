//! Run configuration: command-line flags merged over an optional
//! `key = value` file.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use crate::bell::BellVariant;
use crate::grid::Label;
use crate::oscillator::DeformationParams;

/// Configuration problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm16,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn pgm(self) -> bool {
        matches!(self, Format::Pgm16 | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Flags shared by every subcommand. All optional so a config file can
/// fill the gaps.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Plain-text `key = value` file; flags given here take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Deformation of particle A (and of the single oscillator).
    #[arg(long = "q-a", alias = "q")]
    pub q_a: Option<f64>,
    /// Deformation of particle B; defaults to q-a.
    #[arg(long = "q-b")]
    pub q_b: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "amp-a")]
    pub amp_a: Option<f64>,
    #[arg(long = "amp-b")]
    pub amp_b: Option<f64>,
    /// psi+, psi-, phi+ or phi-.
    #[arg(long)]
    pub variant: Option<BellVariant>,
    /// The two plotted coordinates, e.g. `xA,pA`.
    #[arg(long)]
    pub free: Option<String>,
    /// Fixed coordinates, e.g. `xB=0 pB=-2h` (`h` = one momentum shift).
    #[arg(long, num_args = 1..)]
    pub fix: Vec<String>,
    /// Axis windows `label:min:max:count`.
    #[arg(long, num_args = 1..)]
    pub window: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path prefix (directory for `figures`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the W1/W2/W3 term decomposition.
    #[arg(long)]
    pub decompose: bool,
    #[arg(long, value_enum)]
    pub verify: Option<Level>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, hide = true)]
    pub debug_flip_sign: bool,
}

const KEYS: &[&str] = &[
    "mass", "omega", "hbar", "q-a", "q-b", "n", "m", "amp-a", "amp-b", "variant", "free", "fix",
    "window", "format", "out", "decompose", "verify", "threads",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Flags, ConfigError> {
    let mut flags = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let ctx = |e: String| bad(format!("config line {} ({key}): {e}", lineno + 1));
        match key {
            "mass" => flags.mass = Some(parse_num(value).map_err(ctx)?),
            "omega" => flags.omega = Some(parse_num(value).map_err(ctx)?),
            "hbar" => flags.hbar = Some(parse_num(value).map_err(ctx)?),
            "q-a" | "q" => flags.q_a = Some(parse_num(value).map_err(ctx)?),
            "q-b" => flags.q_b = Some(parse_num(value).map_err(ctx)?),
            "n" => flags.n = Some(parse_num(value).map_err(ctx)?),
            "m" => flags.m = Some(parse_num(value).map_err(ctx)?),
            "amp-a" => flags.amp_a = Some(parse_num(value).map_err(ctx)?),
            "amp-b" => flags.amp_b = Some(parse_num(value).map_err(ctx)?),
            "variant" => flags.variant = Some(value.parse().map_err(ctx)?),
            "free" => flags.free = Some(value.to_string()),
            "fix" => flags.fix = value.split_whitespace().map(String::from).collect(),
            "window" => flags.window = value.split_whitespace().map(String::from).collect(),
            "format" => flags.format = Some(Format::from_str(value, true).map_err(ctx)?),
            "out" => flags.out = Some(PathBuf::from(value)),
            "decompose" => flags.decompose = parse_num::<bool>(value).map_err(ctx)?,
            "verify" => flags.verify = Some(Level::from_str(value, true).map_err(ctx)?),
            "threads" => flags.threads = Some(parse_num(value).map_err(ctx)?),
            _ => {
                return Err(bad(format!(
                    "config line {}: unknown key `{key}` (known: {})",
                    lineno + 1,
                    KEYS.join(", ")
                )))
            }
        }
    }
    Ok(flags)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))
}

/// Command-line values win; the file fills whatever was not given.
pub fn merge(cli: Flags, file: Flags) -> Flags {
    Flags {
        config: cli.config,
        mass: cli.mass.or(file.mass),
        omega: cli.omega.or(file.omega),
        hbar: cli.hbar.or(file.hbar),
        q_a: cli.q_a.or(file.q_a),
        q_b: cli.q_b.or(file.q_b),
        n: cli.n.or(file.n),
        m: cli.m.or(file.m),
        amp_a: cli.amp_a.or(file.amp_a),
        amp_b: cli.amp_b.or(file.amp_b),
        variant: cli.variant.or(file.variant),
        free: cli.free.or(file.free),
        fix: if cli.fix.is_empty() { file.fix } else { cli.fix },
        window: if cli.window.is_empty() { file.window } else { cli.window },
        format: cli.format.or(file.format),
        out: cli.out.or(file.out),
        decompose: cli.decompose || file.decompose,
        verify: cli.verify.or(file.verify),
        threads: cli.threads.or(file.threads),
        debug_flip_sign: cli.debug_flip_sign,
    }
}

pub fn load(cli: Flags) -> Result<Flags, ConfigError> {
    match &cli.config {
        None => Ok(cli),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
            let file = parse_config_text(&text)?;
            Ok(merge(cli, file))
        }
    }
}

/// A coordinate value, optionally in units of the momentum shift (`-2h`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coordinate {
    pub value: f64,
    pub in_shifts: bool,
}

impl FromStr for Coordinate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (body, in_shifts) = match s.strip_suffix('h') {
            Some("") | Some("-") | Some("+") => (format!("{}1", &s[..s.len() - 1]), true),
            Some(rest) => (rest.to_string(), true),
            None => (s.to_string(), false),
        };
        let value: f64 = body.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if !value.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Coordinate { value, in_shifts })
    }
}

impl Coordinate {
    /// `h` units are only meaningful for momenta: one unit is the shift
    /// `2 lambda hbar h` of the label's particle (`= h` for unit constants).
    pub fn resolve(&self, label: Label, params_a: &DeformationParams, params_b: &DeformationParams) -> Result<f64, ConfigError> {
        if !self.in_shifts {
            return Ok(self.value);
        }
        let params = match label {
            Label::P | Label::PA => params_a,
            Label::PB => params_b,
            _ => return Err(bad(format!("`h` units apply to momenta only, not {label}"))),
        };
        Ok(self.value * params.momentum_shift())
    }
}

/// `label=value`.
pub fn parse_fix(s: &str) -> Result<(Label, Coordinate), ConfigError> {
    let (label, value) = s
        .split_once('=')
        .ok_or_else(|| bad(format!("--fix `{s}`: expected label=value")))?;
    let label: Label = label.trim().parse().map_err(|e| bad(format!("--fix: {e}")))?;
    let value = value.parse().map_err(|e| bad(format!("--fix {label}: {e}")))?;
    Ok((label, value))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub label: Label,
    pub min: Coordinate,
    pub max: Coordinate,
    pub count: usize,
}

/// `label:min:max:count`.
pub fn parse_window(s: &str) -> Result<WindowSpec, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(bad(format!("--window `{s}`: expected label:min:max:count")));
    }
    let label: Label = parts[0].parse().map_err(|e| bad(format!("--window: {e}")))?;
    let min = parts[1].parse().map_err(|e| bad(format!("--window {label} min: {e}")))?;
    let max = parts[2].parse().map_err(|e| bad(format!("--window {label} max: {e}")))?;
    let count = parts[3]
        .parse()
        .map_err(|_| bad(format!("--window {label}: count `{}` is not an integer", parts[3])))?;
    Ok(WindowSpec {
        label,
        min,
        max,
        count,
    })
}

/// `a,b`.
pub fn parse_free(s: &str) -> Result<(Label, Label), ConfigError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| bad(format!("--free `{s}`: expected two labels like xA,pA")))?;
    let a = a.trim().parse().map_err(|e| bad(format!("--free: {e}")))?;
    let b = b.trim().parse().map_err(|e| bad(format!("--free: {e}")))?;
    Ok((a, b))
}

pub fn path_or(out: &Option<PathBuf>, default: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| Path::new(default).to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_precedence() {
        let file = parse_config_text(
            "# figure run\nq-a = 0.5\nn = 1 # comment\nfix = xB=0 pB=-2h\ndecompose = true\nformat = both\n",
        )
        .unwrap();
        assert_eq!(file.q_a, Some(0.5));
        assert_eq!(file.fix, vec!["xB=0", "pB=-2h"]);
        let cli = Flags {
            q_a: Some(0.9),
            ..Flags::default()
        };
        let merged = merge(cli, file);
        assert_eq!(merged.q_a, Some(0.9));
        assert_eq!(merged.n, Some(1));
        assert!(merged.decompose);
        assert_eq!(merged.format, Some(Format::Both));
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = parse_config_text("n = 1\nwidth = 3\n").unwrap_err();
        assert!(err.0.contains("line 2") && err.0.contains("width"));
        let err = parse_config_text("mass = heavy\n").unwrap_err();
        assert!(err.0.contains("mass"));
        assert!(parse_config_text("justakey\n").is_err());
    }

    #[test]
    fn coordinates() {
        let p = DeformationParams::unit(0.001).unwrap();
        let c: Coordinate = "-2h".parse().unwrap();
        assert!((c.resolve(Label::PB, &p, &p).unwrap() + 2.0 * p.h()).abs() < 1e-12);
        let c: Coordinate = "-h".parse().unwrap();
        assert!((c.resolve(Label::P, &p, &p).unwrap() + p.h()).abs() < 1e-12);
        let c: Coordinate = "0.25".parse().unwrap();
        assert_eq!(c.resolve(Label::XA, &p, &p).unwrap(), 0.25);
        let c: Coordinate = "1h".parse().unwrap();
        assert!(c.resolve(Label::XA, &p, &p).is_err());
        assert!("abc".parse::<Coordinate>().is_err());
        assert!("inf".parse::<Coordinate>().is_err());
    }

    #[test]
    fn windows_and_fixes() {
        let w = parse_window("pA:-8h:2h:301").unwrap();
        assert_eq!(w.label, Label::PA);
        assert_eq!(w.count, 301);
        assert!(w.min.in_shifts);
        assert!(parse_window("pA:-8:2").is_err());
        assert!(parse_window("zz:-8:2:10").is_err());
        assert_eq!(parse_fix("xB=0").unwrap().0, Label::XB);
        assert!(parse_fix("xB").is_err());
        assert_eq!(parse_free("xA, xB").unwrap(), (Label::XA, Label::XB));
        assert!(parse_free("xA").is_err());
    }
}
