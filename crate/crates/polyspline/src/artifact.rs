//! On-disk artifact formats: JSON spline/surface/report files and CSV tables.
//!
//! Every JSON artifact carries a `schema_version` and a `kind` tag. Floats
//! are serialized with 17 significant digits so that re-reading an artifact
//! reproduces the original values bit for bit, and re-running a command with
//! the same inputs reproduces the artifact byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ErrorReport;
use crate::knots::KnotSet;
use crate::powerlog::{PowerLogExpr, PowerLogTerm};
use crate::spline::{BeppoLeviSpline, ComplexSpline, SplineError};
use crate::surface::{SurfaceModel, ZeroModeProfile, ZeroModeStrategy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Error, Debug)]
pub enum ArtifactError {
    #[error("i/o failure on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error("unsupported schema version {found} (this build reads {SCHEMA_VERSION})")]
    Schema { found: u32 },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// 17-significant-digit JSON writing

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize with deterministic float formatting (17 significant digits).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, ArtifactError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let text = to_json_string(value)?;
    fs::write(path, text).map_err(io_at(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ArtifactError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn check_schema(kind_found: &str, kind_want: &str, version: u32) -> Result<(), ArtifactError> {
    if version != SCHEMA_VERSION {
        return Err(ArtifactError::Schema { found: version });
    }
    if kind_found != kind_want {
        return Err(ArtifactError::Malformed(format!(
            "expected kind \"{kind_want}\", found \"{kind_found}\""
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Expressions

/// One `coeff * r^(num/den) * ln(r)^log_power` term.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: f64,
    pub exponent: [i64; 2],
    pub log_power: u32,
}

pub type ExprJson = Vec<TermJson>;

pub fn expr_to_json(e: &PowerLogExpr) -> ExprJson {
    e.terms()
        .iter()
        .map(|t| TermJson {
            coeff: t.coeff,
            exponent: [*t.exponent.numer(), *t.exponent.denom()],
            log_power: t.log_power,
        })
        .collect()
}

pub fn expr_from_json(terms: &ExprJson) -> Result<PowerLogExpr, ArtifactError> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        if t.exponent[1] == 0 {
            return Err(ArtifactError::Malformed(
                "term exponent has zero denominator".into(),
            ));
        }
        if !t.coeff.is_finite() {
            return Err(ArtifactError::Malformed(
                "term coefficient not finite".into(),
            ));
        }
        out.push(PowerLogTerm::new(
            t.coeff,
            Ratio::new(t.exponent[0], t.exponent[1]),
            t.log_power,
        ));
    }
    Ok(PowerLogExpr::from_terms(out))
}

// ---------------------------------------------------------------------------
// Spline artifacts

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplinePartsJson {
    pub values: Vec<f64>,
    pub head: ExprJson,
    pub interior: Vec<ExprJson>,
    pub tail: ExprJson,
}

fn spline_to_parts(s: &BeppoLeviSpline) -> SplinePartsJson {
    SplinePartsJson {
        values: s.values().to_vec(),
        head: expr_to_json(s.head()),
        interior: s.interior().iter().map(expr_to_json).collect(),
        tail: expr_to_json(s.tail()),
    }
}

fn spline_from_parts(
    k: i32,
    knots: &[f64],
    parts: &SplinePartsJson,
) -> Result<BeppoLeviSpline, ArtifactError> {
    let knots = KnotSet::new(knots.to_vec()).map_err(SplineError::from)?;
    let interior = parts
        .interior
        .iter()
        .map(expr_from_json)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BeppoLeviSpline::from_parts(
        k,
        knots,
        parts.values.clone(),
        expr_from_json(&parts.head)?,
        interior,
        expr_from_json(&parts.tail)?,
    )?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplineArtifact {
    pub schema_version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub k: i32,
    pub knots: Vec<f64>,
    #[serde(flatten)]
    pub parts: SplinePartsJson,
}

impl SplineArtifact {
    pub fn from_spline(s: &BeppoLeviSpline, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "spline".into(),
            seed,
            k: s.k(),
            knots: s.knots().to_vec(),
            parts: spline_to_parts(s),
        }
    }

    pub fn to_spline(&self) -> Result<BeppoLeviSpline, ArtifactError> {
        check_schema(&self.kind, "spline", self.schema_version)?;
        spline_from_parts(self.k, &self.knots, &self.parts)
    }
}

// ---------------------------------------------------------------------------
// Surface artifacts

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeJson {
    pub k: i32,
    pub re: SplinePartsJson,
    pub im: SplinePartsJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroModeJson {
    pub strategy: String,
    pub values: Vec<f64>,
    /// Provenance note: the zero mode is interpolation plumbing, not part of
    /// the adjoint end-condition theory.
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceArtifact {
    pub schema_version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub truncation: usize,
    pub radii: Vec<f64>,
    pub zero_mode: ZeroModeJson,
    pub modes: Vec<ModeJson>,
}

impl SurfaceArtifact {
    pub fn from_model(model: &SurfaceModel, seed: Option<u64>) -> Self {
        let strategy = match model.zero_mode().strategy {
            ZeroModeStrategy::NaturalCubic => "natural-cubic",
            ZeroModeStrategy::Zero => "zero",
        };
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "surface".into(),
            seed,
            truncation: model.truncation(),
            radii: model.radii().radii().to_vec(),
            zero_mode: ZeroModeJson {
                strategy: strategy.into(),
                values: model.zero_mode().values.clone(),
                note: "C2 radial interpolant of the curve means; the k = 0 profile is \
                       outside the adjoint end-condition construction"
                    .into(),
            },
            modes: model
                .modes()
                .iter()
                .enumerate()
                .map(|(i, mode)| ModeJson {
                    k: (i + 1) as i32,
                    re: spline_to_parts(&mode.re),
                    im: spline_to_parts(&mode.im),
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<SurfaceModel, ArtifactError> {
        check_schema(&self.kind, "surface", self.schema_version)?;
        let radii = KnotSet::new(self.radii.clone()).map_err(SplineError::from)?;
        let mut modes = Vec::with_capacity(self.modes.len());
        for (i, mode) in self.modes.iter().enumerate() {
            if mode.k != (i + 1) as i32 {
                return Err(ArtifactError::Malformed(format!(
                    "modes must be stored for k = 1..K in order; slot {i} holds k = {}",
                    mode.k
                )));
            }
            modes.push(ComplexSpline {
                re: spline_from_parts(mode.k, &self.radii, &mode.re)?,
                im: spline_from_parts(mode.k, &self.radii, &mode.im)?,
            });
        }
        let strategy = match self.zero_mode.strategy.as_str() {
            "natural-cubic" => ZeroModeStrategy::NaturalCubic,
            "zero" => ZeroModeStrategy::Zero,
            other => {
                return Err(ArtifactError::Malformed(format!(
                    "unknown zero-mode strategy \"{other}\""
                )))
            }
        };
        let zero = ZeroModeProfile::build(strategy, &self.radii, &self.zero_mode.values);
        Ok(SurfaceModel::from_parts(radii, modes, zero))
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceArtifact {
    pub schema_version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub k: i32,
    pub datum: String,
    pub levels: Vec<ErrorReport>,
    pub fitted_order_l2_m0: Option<f64>,
    pub bounds_satisfied: bool,
}

// ---------------------------------------------------------------------------
// CSV tables

/// Read a two-column `r,value` table; a single header line is tolerated.
pub fn read_radius_value_csv(text: &str) -> Result<Vec<(f64, f64)>, ArtifactError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(ArtifactError::Csv {
                line: idx + 1,
                message: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(r), Ok(v)) => rows.push((r, v)),
            _ if idx == 0 => continue, // header
            _ => {
                return Err(ArtifactError::Csv {
                    line: idx + 1,
                    message: format!("cannot parse \"{line}\" as two numbers"),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(ArtifactError::Csv {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// Write a `r,value` table with 17-significant-digit floats.
pub fn write_radius_value_csv<W: Write>(out: &mut W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "r,value")?;
    for &(r, v) in rows {
        writeln!(out, "{r:.16e},{v:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::build_interpolant;

    #[test]
    fn spline_artifact_roundtrip_is_exact() {
        let ks = KnotSet::new(vec![1.0, 1.7, 2.9]).unwrap();
        let s = build_interpolant(3, &ks, &[0.25, -1.5, 2.0]).unwrap();
        let artifact = SplineArtifact::from_spline(&s, Some(11));
        let text = to_json_string(&artifact).unwrap();
        let back: SplineArtifact = serde_json::from_str(&text).unwrap();
        let s2 = back.to_spline().unwrap();
        assert_eq!(s.pieces(), s2.pieces());
        assert_eq!(s.values(), s2.values());
        // serialization is deterministic
        let again = to_json_string(&SplineArtifact::from_spline(&s2, Some(11))).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn half_integer_exponents_roundtrip() {
        let e = PowerLogExpr::term(0.1 + 0.2, Ratio::new(-3, 2), 2);
        let back = expr_from_json(&expr_to_json(&e)).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn schema_and_kind_are_enforced() {
        let ks = KnotSet::new(vec![1.0]).unwrap();
        let s = build_interpolant(2, &ks, &[1.0]).unwrap();
        let mut artifact = SplineArtifact::from_spline(&s, None);
        artifact.schema_version = 99;
        assert!(matches!(
            artifact.to_spline(),
            Err(ArtifactError::Schema { found: 99 })
        ));
        let mut artifact = SplineArtifact::from_spline(&s, None);
        artifact.kind = "surface".into();
        assert!(matches!(
            artifact.to_spline(),
            Err(ArtifactError::Malformed(_))
        ));
    }

    #[test]
    fn csv_parsing() {
        let rows = read_radius_value_csv("r,value\n1.0,2.0\n2.0,-1.0\n").unwrap();
        assert_eq!(rows, vec![(1.0, 2.0), (2.0, -1.0)]);
        // no header is fine too
        let rows = read_radius_value_csv("1.0,2.0").unwrap();
        assert_eq!(rows.len(), 1);
        assert!(read_radius_value_csv("1.0\n").is_err());
        assert!(read_radius_value_csv("r,value\n1.0,oops\n").is_err());
        assert!(read_radius_value_csv("").is_err());

        let mut buf = Vec::new();
        write_radius_value_csv(&mut buf, &[(1.5, 0.1 + 0.2)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_radius_value_csv(&text).unwrap();
        assert_eq!(back[0].1, 0.1 + 0.2); // exact through 17 digits
    }
}
