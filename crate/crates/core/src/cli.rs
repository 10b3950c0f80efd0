//! Command-line front end of `qkd-bound`.
//!
//! Exit codes: 0 success, 2 invalid arguments or unreadable input,
//! 3 inconsistent statistics, 4 numerical failure. Output files are written
//! to a temporary file next to the target and renamed into place, so a
//! failed run never leaves a partial file behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bound::{self, linear_grid, BoundReport};
use crate::bsa::{max_separable_weight_with, EquivalenceClassSpec};
use crate::detector::DetectorSpec;
use crate::error::{invalid, Error, Result};
use crate::info::{
    conditional_mutual_information, intrinsic_information, mutual_information, shannon_entropy,
    JointDistribution, SearchConfig,
};
use crate::protocol::{ChannelParam, ProtocolKind, ProtocolSpec};
use crate::sdp::SdpOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InconsistentStatistics(_) => EXIT_INCONSISTENT,
        Error::NumericalFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

#[derive(Parser, Debug)]
#[command(name = "qkd-bound", version, about = "Upper bounds on QKD secret key rates with trusted imperfect detectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Scan,
    Point,
    Bsa,
    Info,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bound over a grid of channel error rates.
    Scan(Flags),
    /// Bound at a single error rate.
    Point(Flags),
    /// Separable weight of a protocol model (--protocol, --e) or of custom data (--input).
    Bsa(Flags),
    /// Entropies, mutual information and intrinsic information of a distribution (--input).
    Info(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Raw flags; every field is optional so a `--config` file can fill gaps.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// four-state (alias bb84) or six-state.
    #[arg(long)]
    pub protocol: Option<String>,
    /// First error rate of the scan grid [default: 0].
    #[arg(long)]
    pub e_start: Option<f64>,
    /// Last error rate of the scan grid [default: 0.5].
    #[arg(long)]
    pub e_end: Option<f64>,
    /// Number of grid points, endpoints included [default: 100].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Channel error rate for point and bsa.
    #[arg(long)]
    pub e: Option<f64>,
    /// Total dark-count probability d in [0, 1) [default: 0].
    #[arg(long)]
    pub dark_count: Option<f64>,
    /// Detection efficiency in (0, 1] [default: 1].
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Input JSON: a compatible-state class for bsa, a distribution for info.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the flags above (kebab-case keys); flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Relative duality-gap tolerance of the SDP solver.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Flags {
    fn overlay(self, base: Flags) -> Flags {
        Flags {
            protocol: self.protocol.or(base.protocol),
            e_start: self.e_start.or(base.e_start),
            e_end: self.e_end.or(base.e_end),
            steps: self.steps.or(base.steps),
            e: self.e.or(base.e),
            dark_count: self.dark_count.or(base.dark_count),
            efficiency: self.efficiency.or(base.efficiency),
            input: self.input.or(base.input),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            config: self.config,
            tol: self.tol.or(base.tol),
        }
    }
}

/// Validated, defaults-filled configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub protocol: Option<ProtocolKind>,
    pub e_start: f64,
    pub e_end: f64,
    pub steps: usize,
    pub e: Option<f64>,
    pub detector: DetectorSpec,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub sdp: SdpOptions,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn check_e(flag: &str, v: f64) -> Result<f64> {
    if (0.0..=0.5).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(format!("--{flag} must lie in [0, 0.5], got {v}")))
    }
}

pub fn validate_config(command: CommandKind, flags: Flags) -> Result<RunConfig> {
    let flags = match &flags.config {
        Some(path) => {
            let text = read_file(path)?;
            let base: Flags = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("config file {}: {e}", path.display())))?;
            flags.overlay(base)
        }
        None => flags,
    };

    let protocol = flags.protocol.as_deref().map(str::parse::<ProtocolKind>).transpose()?;
    let d = flags.dark_count.unwrap_or(0.0);
    if !(0.0..1.0).contains(&d) {
        return Err(invalid(format!("--dark-count must lie in [0, 1), got {d}")));
    }
    let eta = flags.efficiency.unwrap_or(1.0);
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("--efficiency must lie in (0, 1], got {eta}")));
    }
    let steps = flags.steps.unwrap_or(100);
    if steps == 0 {
        return Err(invalid("--steps must be at least 1"));
    }
    let e_start = check_e("e-start", flags.e_start.unwrap_or(0.0))?;
    let e_end = check_e("e-end", flags.e_end.unwrap_or(0.5))?;
    if e_start > e_end {
        return Err(invalid(format!("--e-start {e_start} exceeds --e-end {e_end}")));
    }
    let e = flags.e.map(|v| check_e("e", v)).transpose()?;
    let mut sdp = SdpOptions::default();
    if let Some(tol) = flags.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("--tol must lie in (0, 1), got {tol}")));
        }
        sdp.gap_tol = tol;
    }

    match command {
        CommandKind::Scan | CommandKind::Point => {
            if protocol.is_none() {
                return Err(invalid("--protocol is required"));
            }
            if command == CommandKind::Point && e.is_none() {
                return Err(invalid("--e is required for point"));
            }
        }
        CommandKind::Bsa => match (&flags.input, protocol) {
            (Some(_), Some(_)) => return Err(invalid("--input and --protocol are mutually exclusive for bsa")),
            (None, None) => return Err(invalid("bsa needs either --input or --protocol")),
            (None, Some(_)) if e.is_none() => return Err(invalid("--e is required with --protocol for bsa")),
            _ => {}
        },
        CommandKind::Info => {
            if flags.input.is_none() {
                return Err(invalid("--input is required for info"));
            }
        }
    }

    Ok(RunConfig {
        command,
        protocol,
        e_start,
        e_end,
        steps,
        e,
        detector: DetectorSpec::uniform(d, eta)?,
        input: flags.input,
        out: flags.out,
        format: flags.format.unwrap_or(Format::Csv),
        sdp,
    })
}

/// Writes `contents` to `path` through a sibling temporary file, or to
/// stdout when `path` is `None`.
fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
        Some(path) => {
            let io_err = |source| Error::Io { path: path.display().to_string(), source };
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
            tmp.write_all(contents.as_bytes()).map_err(io_err)?;
            tmp.as_file().sync_all().map_err(io_err)?;
            tmp.persist(path).map_err(|e| io_err(e.error))?;
            Ok(())
        }
    }
}

fn render_reports(reports: &[BoundReport], format: Format) -> Result<String> {
    match format {
        Format::Csv => bound::to_csv_string(reports),
        Format::Json => bound::to_json_string(reports),
    }
}

fn protocol_spec(cfg: &RunConfig) -> ProtocolSpec {
    ProtocolSpec::equal_weights(cfg.protocol.expect("validated"))
}

fn run_bound(cfg: &RunConfig) -> Result<String> {
    let spec = protocol_spec(cfg);
    let grid = match cfg.command {
        CommandKind::Point => vec![cfg.e.expect("validated")],
        _ => linear_grid(cfg.e_start, cfg.e_end, cfg.steps)?,
    };
    let reports = bound::scan_with(&spec, &grid, &cfg.detector, &cfg.sdp)?;
    // a failed grid point fails the whole run so no partial artifact is written
    if let Some(r) = reports.iter().find(|r| r.error.is_some()) {
        let msg = format!("at e = {}: {}", r.e, r.error.as_deref().unwrap_or_default());
        return Err(if msg.contains("inconsistent statistics") {
            Error::InconsistentStatistics(msg)
        } else if msg.contains("numerical failure") {
            Error::NumericalFailure { message: msg, best_bound: None }
        } else {
            invalid(msg)
        });
    }
    render_reports(&reports, cfg.format)
}

fn run_bsa(cfg: &RunConfig) -> Result<(String, String)> {
    let class = match &cfg.input {
        Some(path) => {
            let text = read_file(path)?;
            serde_json::from_str::<EquivalenceClassSpec>(&text)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => bound::equivalence_class(
            &protocol_spec(cfg),
            ChannelParam::new(cfg.e.expect("validated"))?,
            &cfg.detector,
        )?,
    };
    let r = max_separable_weight_with(&class, &cfg.sdp)?;
    let summary = format!("lambda_max = {}\nverdict: {}\n", bound::format_sig9(r.lambda_max), r.verdict());
    let artifact = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&r.to_json())?;
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "lambda_max,verdict,duality_gap\n{},{},{}\n",
            bound::format_sig9(r.lambda_max),
            r.verdict().replace(';', ""),
            bound::format_sig9(r.duality_gap)
        ),
    };
    Ok((summary, artifact))
}

#[derive(Serialize)]
struct InfoReport {
    shape: Vec<usize>,
    entropy_a: f64,
    entropy_b: f64,
    mutual_information_ab: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional_mutual_information: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intrinsic_information: Option<f64>,
}

fn run_info(cfg: &RunConfig) -> Result<String> {
    let path = cfg.input.as_ref().expect("validated");
    let text = read_file(path)?;
    let p: JointDistribution =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if p.shape().len() < 2 {
        return Err(invalid("info needs a two- or three-party distribution"));
    }
    let ab = if p.shape().len() == 3 { p.marginal(&[0, 1]) } else { p.clone() };
    let (cmi, intrinsic) = if p.shape().len() == 3 {
        let cmi = conditional_mutual_information(&p)?;
        let ii = intrinsic_information(&p, &SearchConfig::default())?;
        (Some(cmi), Some(ii.value))
    } else {
        (None, None)
    };
    let report = InfoReport {
        shape: p.shape().to_vec(),
        entropy_a: shannon_entropy(ab.marginal(&[0]).probs())?,
        entropy_b: shannon_entropy(ab.marginal(&[1]).probs())?,
        mutual_information_ab: mutual_information(&ab)?,
        conditional_mutual_information: cmi,
        intrinsic_information: intrinsic,
    };
    Ok(match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("quantity,bits\n");
            let mut row = |k: &str, v: Option<f64>| {
                if let Some(v) = v {
                    s.push_str(&format!("{k},{}\n", bound::format_sig9(v)));
                }
            };
            row("entropy_a", Some(report.entropy_a));
            row("entropy_b", Some(report.entropy_b));
            row("mutual_information_ab", Some(report.mutual_information_ab));
            row("conditional_mutual_information", report.conditional_mutual_information);
            row("intrinsic_information", report.intrinsic_information);
            s
        }
    })
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        CommandKind::Scan | CommandKind::Point => emit(cfg.out.as_deref(), &run_bound(cfg)?),
        CommandKind::Info => emit(cfg.out.as_deref(), &run_info(cfg)?),
        CommandKind::Bsa => {
            let (summary, artifact) = run_bsa(cfg)?;
            match &cfg.out {
                Some(path) => {
                    emit(Some(path), &artifact)?;
                    print!("{summary}");
                    Ok(())
                }
                None => emit(None, &summary),
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let (kind, flags) = match cli.command {
        Command::Scan(f) => (CommandKind::Scan, f),
        Command::Point(f) => (CommandKind::Point, f),
        Command::Bsa(f) => (CommandKind::Bsa, f),
        Command::Info(f) => (CommandKind::Info, f),
    };
    match validate_config(kind, flags).and_then(|cfg| execute(&cfg)) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("qkd-bound: {err}");
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags { protocol: Some("six-state".into()), ..Flags::default() }
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = validate_config(CommandKind::Scan, flags()).unwrap();
        assert_eq!(cfg.detector, DetectorSpec::ideal());
        assert_eq!(cfg.steps, 100);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn bad_efficiency_names_the_flag() {
        let f = Flags { efficiency: Some(1.5), ..flags() };
        let err = validate_config(CommandKind::Scan, f).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INVALID);
        assert!(err.to_string().contains("efficiency"));
    }

    #[test]
    fn bsa_rejects_input_with_protocol() {
        let f = Flags { input: Some("x.json".into()), e: Some(0.1), ..flags() };
        assert!(validate_config(CommandKind::Bsa, f).is_err());
    }

    #[test]
    fn out_of_range_e() {
        let f = Flags { e_end: Some(0.7), ..flags() };
        assert!(validate_config(CommandKind::Scan, f).unwrap_err().to_string().contains("--e-end"));
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"protocol": "four-state", "steps": 7, "dark-count": 1e-6}"#).unwrap();
        let f = Flags { config: Some(path), steps: Some(3), protocol: None, ..Flags::default() };
        let cfg = validate_config(CommandKind::Scan, f).unwrap();
        assert_eq!(cfg.protocol, Some(ProtocolKind::FourState));
        assert_eq!(cfg.steps, 3);
        assert_eq!(cfg.detector.dark_total, 1e-6);
    }

    #[test]
    fn missing_input_is_exit_2() {
        let code = run(["qkd-bound", "info", "--input", "/nonexistent/dist.json"]);
        assert_eq!(code, EXIT_INVALID);
    }
}
