//! File formats: angle signals, phase images, edge lists, lifted solutions
//! and JSON run reports.
//!
//! * Signal text: header `# circle-signal v1 n=<N>`, then one angle in
//!   radians per line (17 significant digits) or `nan` for a missing sample.
//! * 16-bit PGM (`P5`, maxval 65535, big-endian samples): angle
//!   `theta in (-pi, pi]` is stored as `round((theta + pi) / (2 pi) * 65535)`.
//!   Quantization error is at most `pi / 65535`.
//! * Raw float image: 16-byte header (`b"CIRCF64\0"`, height and width as
//!   little-endian `u32`), then `height * width` little-endian `f64` angles in
//!   row-major order. Lossless; `NaN` marks a missing pixel.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::wrap_angle;
use crate::error::{Error, Result};
use crate::lifting::LiftedVariables;
use crate::solvers::{SolveReport, SolverConfig};

pub const SIGNAL_HEADER: &str = "# circle-signal v1";
pub const FLOAT_IMAGE_MAGIC: &[u8; 8] = b"CIRCF64\0";
const PGM_MAX: f64 = 65535.0;

pub fn write_signal(path: impl AsRef<Path>, angles: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{SIGNAL_HEADER} n={}", angles.len())?;
    for a in angles {
        if a.is_nan() {
            writeln!(out, "nan")?;
        } else {
            writeln!(out, "{a:.16e}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a signal file; missing samples come back as `NaN`.
pub fn read_signal(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty signal file".into()))??;
    let n: usize = header
        .trim()
        .strip_prefix(SIGNAL_HEADER)
        .and_then(|rest| rest.trim().strip_prefix("n="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("bad signal header {header:?}")))?;
    let mut angles = Vec::with_capacity(n);
    for (k, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = if t.eq_ignore_ascii_case("nan") {
            f64::NAN
        } else {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("line {}: bad angle {t:?}", k + 2)))?
        };
        angles.push(v);
    }
    if angles.len() != n {
        return Err(Error::Format(format!(
            "header announces {n} samples, found {}",
            angles.len()
        )));
    }
    Ok(angles)
}

/// Unit-modulus observations and an observed-mask from angles with `NaN`
/// gaps. Missing samples get `y = 1`, which is irrelevant once their weight
/// is zero.
pub fn angles_to_observations(angles: &[f64]) -> (Vec<Complex64>, Vec<bool>) {
    angles
        .iter()
        .map(|&a| {
            if a.is_nan() {
                (Complex64::new(1.0, 0.0), false)
            } else {
                (Complex64::from_polar(1.0, a), true)
            }
        })
        .unzip()
}

/// Row-major phase image.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseImage {
    pub height: usize,
    pub width: usize,
    pub angles: Vec<f64>,
}

impl PhaseImage {
    pub fn new(height: usize, width: usize, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != height * width {
            return Err(Error::DimensionMismatch {
                what: "pixels",
                expected: height * width,
                got: angles.len(),
            });
        }
        Ok(PhaseImage {
            height,
            width,
            angles,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm16,
    Float64,
}

impl ImageFormat {
    /// `.pgm` selects PGM; anything else the raw float format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") => ImageFormat::Pgm16,
            _ => ImageFormat::Float64,
        }
    }
}

pub fn quantize_angle(theta: f64) -> u16 {
    let t = wrap_angle(theta);
    ((t + PI) / (2.0 * PI) * PGM_MAX).round() as u16
}

pub fn dequantize_angle(v: u16) -> f64 {
    wrap_angle(v as f64 / PGM_MAX * 2.0 * PI - PI)
}

pub fn write_phase_image(
    path: impl AsRef<Path>,
    img: &PhaseImage,
    format: ImageFormat,
) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        ImageFormat::Pgm16 => {
            if img.angles.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidInput(
                    "PGM cannot store missing pixels".into(),
                ));
            }
            write!(buf, "P5\n{} {}\n65535\n", img.width, img.height)?;
            for &a in &img.angles {
                buf.extend_from_slice(&quantize_angle(a).to_be_bytes());
            }
        }
        ImageFormat::Float64 => {
            let dim = |v: usize| {
                u32::try_from(v)
                    .map_err(|_| Error::InvalidInput(format!("dimension {v} too large")))
            };
            buf.extend_from_slice(FLOAT_IMAGE_MAGIC);
            buf.extend_from_slice(&dim(img.height)?.to_le_bytes());
            buf.extend_from_slice(&dim(img.width)?.to_le_bytes());
            for &a in &img.angles {
                buf.extend_from_slice(&a.to_le_bytes());
            }
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Reads either image format, detected from the leading bytes.
pub fn read_phase_image(path: impl AsRef<Path>) -> Result<PhaseImage> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(FLOAT_IMAGE_MAGIC) {
        parse_float_image(&bytes)
    } else if bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else {
        Err(Error::Format("unrecognized image format".into()))
    }
}

fn parse_float_image(bytes: &[u8]) -> Result<PhaseImage> {
    if bytes.len() < 16 {
        return Err(Error::Format("truncated float image header".into()));
    }
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != height * width * 8 {
        return Err(Error::Format(format!(
            "float image body has {} bytes, expected {}",
            body.len(),
            height * width * 8
        )));
    }
    let angles = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PhaseImage::new(height, width, angles)
}

fn parse_pgm(bytes: &[u8]) -> Result<PhaseImage> {
    // header: magic, width, height, maxval separated by whitespace/comments
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte before the raster
    pos += 1;
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PGM header field {s:?}")))
    };
    let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != 65535 {
        return Err(Error::Format(format!(
            "expected 16-bit PGM, maxval is {maxval}"
        )));
    }
    let body = bytes.get(pos..).unwrap_or_default();
    if body.len() != width * height * 2 {
        return Err(Error::Format(format!(
            "PGM raster has {} bytes, expected {}",
            body.len(),
            width * height * 2
        )));
    }
    let angles = body
        .chunks_exact(2)
        .map(|c| dequantize_angle(u16::from_be_bytes([c[0], c[1]])))
        .collect();
    PhaseImage::new(height, width, angles)
}

/// Arbitrary-graph description: `n n' lambda` per line, `#` comments.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<(usize, usize)>,
    pub lambda: Vec<f64>,
}

impl EdgeList {
    /// One past the largest node id mentioned.
    pub fn implied_node_count(&self) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .unwrap_or(0)
    }
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

fn parse_field<T: std::str::FromStr>(line: usize, field: Option<&str>, what: &str) -> Result<T> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::Format(format!("line {line}: missing or bad {what}")))
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let mut list = EdgeList {
        edges: Vec::new(),
        lambda: Vec::new(),
    };
    for (k, line) in data_lines(path.as_ref())? {
        let mut it = line.split_whitespace();
        let a = parse_field(k, it.next(), "node id")?;
        let b = parse_field(k, it.next(), "node id")?;
        let l: f64 = parse_field(k, it.next(), "edge weight")?;
        list.edges.push((a, b));
        list.lambda.push(l);
    }
    Ok(list)
}

/// Hard constraints: `node angle` per line (0-based node ids).
pub fn read_constraints(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    data_lines(path.as_ref())?
        .into_iter()
        .map(|(k, line)| {
            let mut it = line.split_whitespace();
            let n = parse_field(k, it.next(), "node id")?;
            let a: f64 = parse_field(k, it.next(), "angle")?;
            if !a.is_finite() {
                return Err(Error::Format(format!(
                    "line {k}: constraint angle must be finite"
                )));
            }
            Ok((n, a))
        })
        .collect()
}

/// Per-node weights, one number per line; `inf` marks a hard constraint.
pub fn read_weights(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    data_lines(path.as_ref())?
        .into_iter()
        .map(|(k, line)| parse_field(k, Some(line.as_str()), "weight"))
        .collect()
}

pub fn write_lifted(path: impl AsRef<Path>, s: &LiftedVariables) -> Result<()> {
    fs::write(path, serde_json::to_string(s)?)?;
    Ok(())
}

pub fn read_lifted(path: impl AsRef<Path>) -> Result<LiftedVariables> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub method: String,
    pub solver: SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kernel_std: Option<f64>,
}

/// Serialized summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub psi_conv_star: Option<f64>,
    pub psi_approx: f64,
    pub psi_orig_baseline: Option<f64>,
    pub relative_gap: Option<f64>,
    pub tight: Option<bool>,
    pub max_modulus_deviation: Option<f64>,
    pub max_rank1_residual: Option<f64>,
    pub iterations_run: Option<usize>,
    pub final_step_change: Option<f64>,
    pub config: ConfigEcho,
    pub seed: Option<u64>,
}

impl RunReport {
    pub fn from_solve(report: &SolveReport, config: ConfigEcho, seed: Option<u64>) -> Self {
        RunReport {
            psi_conv_star: Some(report.psi_conv_star),
            psi_approx: report.psi_approx,
            psi_orig_baseline: None,
            relative_gap: report.relative_gap,
            tight: Some(report.certificate.tight),
            max_modulus_deviation: Some(report.certificate.max_modulus_deviation),
            max_rank1_residual: Some(report.certificate.max_rank1_residual),
            iterations_run: Some(report.iterations_run),
            final_step_change: Some(report.final_step_change),
            config,
            seed,
        }
    }

    /// Report for a method that only produces a rounded signal.
    pub fn from_cost(psi: f64, config: ConfigEcho, seed: Option<u64>) -> Self {
        RunReport {
            psi_conv_star: None,
            psi_approx: psi,
            psi_orig_baseline: None,
            relative_gap: None,
            tight: None,
            max_modulus_deviation: None,
            max_rank1_residual: None,
            iterations_run: None,
            final_step_change: None,
            config,
            seed,
        }
    }
}

pub fn write_report(path: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<RunReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
