//! The composed key-rate bound and its comparison curves.
//!
//! For a protocol run on the depolarized Bell state:
//!
//! 1. simulate Bob's noisy statistics,
//! 2. undo the dark counts (the detectors are trusted, so `d_j` is known),
//! 3. find the largest separable weight `lambda` over the compatible states,
//! 4. measure the entangled remainder with the real key-basis detectors,
//! 5. report `(1 - lambda) * I_ent(A;B)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bsa::{max_separable_weight_with, BsaResult, EquivalenceClassSpec, SEPARABLE_THRESHOLD};
use crate::detector::{apply_efficiency, invert_dark_counts, noisy_povm, DetectorSpec};
use crate::error::{invalid, Result};
use crate::info::{binary_entropy, mutual_information};
use crate::protocol::{born_distribution, depolarized_bell_state, key_basis_distribution, ChannelParam, ProtocolSpec};
use crate::quantum::DensityMatrix;
use crate::sdp::SdpOptions;

/// Column header of the CSV output.
pub const CSV_HEADER: [&str; 6] = ["e", "lambda_max", "i_ent", "upper_bound", "mutual_info", "e_r"];

/// Label used wherever the `e_r` column is described.
pub const E_R_LABEL: &str = "E_r (single copy, >= E_r^inf)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub e: f64,
    pub lambda_max: f64,
    pub i_ent: f64,
    pub upper_bound: f64,
    pub mutual_info: f64,
    pub e_r: Option<f64>,
    pub detector: DetectorSpec,
    /// `Tr(rho_ent^2)`, absent when the data are separable-compatible.
    #[serde(default)]
    pub rho_ent_purity: Option<f64>,
    #[serde(default)]
    pub decomposition_residual: Option<f64>,
    /// Set when this grid point failed; the numeric fields are then NaN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BoundReport {
    fn failed(e: f64, detector: &DetectorSpec, err: &crate::Error) -> Self {
        Self {
            e,
            lambda_max: f64::NAN,
            i_ent: f64::NAN,
            upper_bound: f64::NAN,
            mutual_info: f64::NAN,
            e_r: None,
            detector: detector.clone(),
            rho_ent_purity: None,
            decomposition_residual: None,
            error: Some(err.to_string()),
        }
    }

    pub fn is_separable_compatible(&self) -> bool {
        self.lambda_max >= SEPARABLE_THRESHOLD
    }
}

/// Compatible-state class after dark-count inversion, on `2 x 3` when the
/// detectors are lossy.
pub fn equivalence_class(
    protocol: &ProtocolSpec,
    e: ChannelParam,
    detectors: &DetectorSpec,
) -> Result<EquivalenceClassSpec> {
    state_equivalence_class(protocol, &depolarized_bell_state(e), detectors)
}

/// Same as [`equivalence_class`] for an arbitrary two-qubit source state.
pub fn state_equivalence_class(
    protocol: &ProtocolSpec,
    rho: &DensityMatrix,
    detectors: &DetectorSpec,
) -> Result<EquivalenceClassSpec> {
    detectors.validate()?;
    let tomo = protocol.tomography();
    let lossy_bob = if detectors.has_losses() {
        apply_efficiency(&tomo.bob_povm, detectors)?
    } else {
        tomo.bob_povm.clone()
    };
    let noisy_bob = noisy_povm(&tomo.bob_povm, detectors)?;
    let observed = born_distribution(rho, &tomo.alice_povm, &noisy_bob)?;
    let ideal = invert_dark_counts(&observed, detectors, &lossy_bob)?;
    EquivalenceClassSpec::new(tomo.alice_povm, lossy_bob, ideal)
}

/// Separable weight, `I_ent` and `(1 - lambda) I_ent` for data produced by `rho`.
#[derive(Clone, Debug)]
pub struct StateBound {
    pub bsa: BsaResult,
    pub i_ent: f64,
    pub upper_bound: f64,
}

pub fn state_bound(
    protocol: &ProtocolSpec,
    rho: &DensityMatrix,
    detectors: &DetectorSpec,
    opts: &SdpOptions,
) -> Result<StateBound> {
    let class = state_equivalence_class(protocol, rho, detectors)?;
    let bsa = max_separable_weight_with(&class, opts)?;
    let key = protocol.key_povm();
    let (i_ent, upper_bound) = match &bsa.rho_ent {
        Some(ent) if bsa.lambda_max < SEPARABLE_THRESHOLD => {
            let p = born_distribution(ent, &key, &noisy_povm(&key, detectors)?)?;
            let i = mutual_information(&p)?;
            (i, (1.0 - bsa.lambda_max) * i)
        }
        _ => (0.0, 0.0),
    };
    Ok(StateBound { bsa, i_ent, upper_bound })
}

pub fn corollary2_bound(
    protocol: &ProtocolSpec,
    e: ChannelParam,
    detectors: &DetectorSpec,
) -> Result<BoundReport> {
    corollary2_bound_with(protocol, e, detectors, &SdpOptions::default())
}

pub fn corollary2_bound_with(
    protocol: &ProtocolSpec,
    e: ChannelParam,
    detectors: &DetectorSpec,
    opts: &SdpOptions,
) -> Result<BoundReport> {
    let sb = state_bound(protocol, &depolarized_bell_state(e), detectors, opts)?;
    let purity = match &sb.bsa.rho_ent {
        Some(ent) if !sb.bsa.is_separable_compatible() => Some(ent.purity()),
        _ => None,
    };
    Ok(BoundReport {
        e: e.value(),
        lambda_max: sb.bsa.lambda_max,
        i_ent: sb.i_ent,
        upper_bound: sb.upper_bound,
        mutual_info: mutual_info_bound(protocol, e, detectors)?,
        e_r: Some(relative_entropy_bell_diagonal(e)),
        detector: detectors.clone(),
        rho_ent_purity: purity,
        decomposition_residual: Some(sb.bsa.decomposition_residual()),
        error: None,
    })
}

/// `I(A;B)` of the observed key-basis statistics.
pub fn mutual_info_bound(protocol: &ProtocolSpec, e: ChannelParam, detectors: &DetectorSpec) -> Result<f64> {
    let rho = depolarized_bell_state(e);
    mutual_information(&key_basis_distribution(&rho, protocol, Some(detectors))?)
}

/// Single-copy relative entropy of entanglement of the depolarized Bell
/// state: `1 - h(1 - 3e/2)` up to `e = 1/3`, zero beyond.
pub fn relative_entropy_bell_diagonal(e: ChannelParam) -> f64 {
    let e = e.value();
    if e >= 1.0 / 3.0 {
        0.0
    } else {
        (1.0 - binary_entropy(1.0 - 1.5 * e)).max(0.0)
    }
}

/// `steps` evenly spaced points from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(invalid("steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (end - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k + 1 == steps { end } else { start + h * k as f64 })
        .collect())
}

/// One report per grid point, in grid order. A failing point is recorded
/// with its error and does not stop the scan.
pub fn scan(protocol: &ProtocolSpec, grid: &[f64], detectors: &DetectorSpec) -> Result<Vec<BoundReport>> {
    scan_with(protocol, grid, detectors, &SdpOptions::default())
}

pub fn scan_with(
    protocol: &ProtocolSpec,
    grid: &[f64],
    detectors: &DetectorSpec,
    opts: &SdpOptions,
) -> Result<Vec<BoundReport>> {
    let params: Vec<ChannelParam> = grid.iter().map(|&e| ChannelParam::new(e)).collect::<Result<_>>()?;
    detectors.validate()?;
    Ok(params
        .par_iter()
        .map(|&e| {
            corollary2_bound_with(protocol, e, detectors, opts).unwrap_or_else(|err| BoundReport::failed(e.value(), detectors, &err))
        })
        .collect())
}

/// Decimal rendering with 9 significant digits and no exponent.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mant) = mant.strip_prefix('-').map_or(("", mant), |m| ("-", m));
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{digits}{}", "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

pub fn write_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let to_io = |e: csv::Error| crate::Error::Io { path: "<csv>".into(), source: e.into() };
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for r in reports {
        let e_r = r.e_r.map(format_sig9).unwrap_or_default();
        w.write_record([
            format_sig9(r.e),
            format_sig9(r.lambda_max),
            format_sig9(r.i_ent),
            format_sig9(r.upper_bound),
            format_sig9(r.mutual_info),
            e_r,
        ])
        .map_err(to_io)?;
    }
    w.flush().map_err(|e| crate::Error::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}

pub fn to_csv_string(reports: &[BoundReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

pub fn to_json_string(reports: &[BoundReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ProtocolKind;

    fn p(e: f64) -> ChannelParam {
        ChannelParam::new(e).unwrap()
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.7), "0.700000000");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(-0.25), "-0.250000000");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(1.5e-7), "0.000000150000000");
        assert_eq!(format_sig9(123456789012.0), "123456789000");
        assert_eq!(format_sig9(0.99999999995), "1.00000000");
    }

    #[test]
    fn relative_entropy_closed_form() {
        assert!((relative_entropy_bell_diagonal(p(0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(relative_entropy_bell_diagonal(p(1.0 / 3.0)), 0.0);
        assert_eq!(relative_entropy_bell_diagonal(p(0.45)), 0.0);
        let want = 1.0 - binary_entropy(0.85);
        assert!((relative_entropy_bell_diagonal(p(0.1)) - want).abs() < 1e-15);
    }

    #[test]
    fn six_state_ideal_points() {
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        for (e, want) in [(0.0, 1.0), (0.1, 0.7), (0.2, 0.4), (0.3, 0.1), (0.34, 0.0)] {
            let r = corollary2_bound(&spec, p(e), &DetectorSpec::ideal()).unwrap();
            assert!((r.upper_bound - want).abs() < 1e-4, "e={e}: {}", r.upper_bound);
            assert!((r.upper_bound - (1.0 - r.lambda_max) * r.i_ent).abs() < 1e-10);
        }
    }

    #[test]
    fn mutual_information_bound_is_bsc() {
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        assert!((mutual_info_bound(&spec, p(0.0), &DetectorSpec::ideal()).unwrap() - 1.0).abs() < 1e-12);
        let i = mutual_info_bound(&spec, p(0.1), &DetectorSpec::ideal()).unwrap();
        assert!((i - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
    }

    #[test]
    fn lossy_endpoint() {
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        let det = DetectorSpec::uniform(1e-6, 0.15).unwrap();
        let r = corollary2_bound(&spec, p(0.0), &det).unwrap();
        assert!((r.upper_bound - 0.15).abs() < 5e-4, "{r:?}");
    }

    #[test]
    fn scan_keeps_order_and_records_failures() {
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        let grid = [0.3, 0.0, 0.1];
        let out = scan(&spec, &grid, &DetectorSpec::ideal()).unwrap();
        let es: Vec<f64> = out.iter().map(|r| r.e).collect();
        assert_eq!(es, grid);
        assert!(scan(&spec, &[0.6], &DetectorSpec::ideal()).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        let out = scan(&spec, &[0.0, 0.1], &DetectorSpec::ideal()).unwrap();
        let text = to_csv_string(&out).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], "e,lambda_max,i_ent,upper_bound,mutual_info,e_r");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = linear_grid(0.0, 0.35, 71).unwrap();
        assert_eq!(g.len(), 71);
        assert_eq!(g[70], 0.35);
        assert!((g[20] - 0.1).abs() < 1e-15);
        assert!(linear_grid(0.0, 1.0, 0).is_err());
    }
}
