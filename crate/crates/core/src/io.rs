//! File formats: CSV tables, JSON run records, SVG scatter plots. Every file
//! is written to a temporary sibling first and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rug::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{BranchValue, CurveSpec, DiscriminantLocus};
use crate::lemmas::LemmaReport;
use crate::operator::Classification;
use crate::poly::ComplexApprox;
use crate::scaling::{EmpiricalMeasure, ScalingOutcome, ScalingRecord};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SVG_SIZE: f64 = 300.0;
/// Fraction of the data span added on each side of the plot.
pub const SVG_MARGIN: f64 = 0.1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("refusing to plot an empty measure")]
    EmptyMeasure,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>, IoError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| IoError::Io(e.into_error()))
}

/// Columns `n, r, ratio, collision`; `r` and `ratio` are empty when there
/// was nothing to measure.
pub fn scan_csv(records: &[ScalingRecord]) -> Result<Vec<u8>, IoError> {
    csv_bytes(&["n", "r", "ratio", "collision"], |w| {
        for rec in records {
            let fmt = |x: Option<&rug::Float>| x.map(|v| v.to_f64().to_string()).unwrap_or_default();
            w.write_record([
                rec.n.to_string(),
                fmt(rec.r()),
                fmt(rec.ratio()),
                rec.is_collision().to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Columns `lemma, n, A, j, lhs, rhs, holds, seed`.
pub fn lemma_csv(reports: &[LemmaReport]) -> Result<Vec<u8>, IoError> {
    csv_bytes(&["lemma", "n", "A", "j", "lhs", "rhs", "holds", "seed"], |w| {
        for r in reports {
            w.write_record([
                r.lemma.name().to_string(),
                r.n.to_string(),
                r.radius_bound.to_string(),
                r.j.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.holds.to_string(),
                r.seed.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Columns `index, re, im, mass`.
pub fn measure_csv(m: &EmpiricalMeasure) -> Result<Vec<u8>, IoError> {
    let mass = m.mass().to_string();
    csv_bytes(&["index", "re", "im", "mass"], |w| {
        for (i, a) in m.atoms.iter().enumerate() {
            let (re, im) = a.to_f64();
            w.write_record([i.to_string(), re.to_string(), im.to_string(), mass.clone()])?;
        }
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub kind: String,
    pub j0: Option<usize>,
    /// Exact, as `"p/q"` (or an integer).
    pub d: Option<String>,
    #[serde(rename = "A")]
    pub attaining: Vec<usize>,
    pub jm: Option<usize>,
    pub reason: Option<String>,
}

impl ClassificationRecord {
    pub fn d_exact(&self) -> Option<Rational> {
        self.d.as_deref().and_then(|s| s.parse().ok())
    }
}

impl From<&Classification> for ClassificationRecord {
    fn from(c: &Classification) -> Self {
        let mut rec = Self {
            kind: c.kind_name().to_string(),
            j0: None,
            d: None,
            attaining: Vec::new(),
            jm: None,
            reason: None,
        };
        match c {
            Classification::Degenerate(deg) => {
                rec.j0 = Some(deg.j0);
                rec.d = Some(deg.d.to_string());
                rec.attaining = deg.attaining.iter().copied().collect();
                rec.jm = Some(deg.jm);
            }
            Classification::NonDegenerate { j0 } => rec.j0 = Some(*j0),
            Classification::Invalid(reason) => rec.reason = Some(reason.to_string()),
        }
        rec
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub r: Option<f64>,
    pub ratio: Option<f64>,
    pub collision: bool,
    pub precision_used: Option<u32>,
    pub error: Option<String>,
}

impl From<&ScalingRecord> for ScanRow {
    fn from(rec: &ScalingRecord) -> Self {
        Self {
            n: rec.n,
            r: rec.r().map(rug::Float::to_f64),
            ratio: rec.ratio().map(rug::Float::to_f64),
            collision: rec.is_collision(),
            precision_used: rec.precision_used(),
            error: match &rec.outcome {
                ScalingOutcome::Failed { reason } => Some(reason.clone()),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub operator: String,
    pub classification: ClassificationRecord,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: Vec<ScanRow>,
    pub timing_ms: u64,
    pub precision_used: Option<u32>,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl From<&ComplexApprox> for Point {
    fn from(c: &ComplexApprox) -> Self {
        let (re, im) = c.to_f64();
        Self { re, im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTermRecord {
    pub j: usize,
    pub coeff: String,
    pub z_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub z: Point,
    pub y: Point,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub schema_version: u32,
    pub tool_version: String,
    pub operator: String,
    pub curve: String,
    pub j0: usize,
    pub lead: String,
    pub terms: Vec<CurveTermRecord>,
    pub resultant_degree: Option<usize>,
    pub discriminant: Vec<Point>,
    pub degeneration: Vec<Point>,
    pub branch_samples: Vec<BranchRecord>,
}

impl CurveRecord {
    pub fn new(
        operator: &str,
        curve: &CurveSpec,
        locus: Option<&DiscriminantLocus>,
        samples: &[BranchValue],
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            operator: operator.to_string(),
            curve: curve.to_string(),
            j0: curve.j0,
            lead: curve.lead.to_string(),
            terms: curve
                .terms
                .iter()
                .map(|t| CurveTermRecord {
                    j: t.j,
                    coeff: t.coeff.to_string(),
                    z_degree: t.z_degree,
                })
                .collect(),
            resultant_degree: locus.and_then(|l| l.resultant.degree()),
            discriminant: locus
                .map(|l| l.points.iter().map(Point::from).collect())
                .unwrap_or_default(),
            degeneration: locus
                .map(|l| l.degeneration.iter().map(Point::from).collect())
                .unwrap_or_default(),
            branch_samples: samples
                .iter()
                .map(|b| BranchRecord {
                    z: Point::from(&b.z),
                    y: Point::from(&b.y),
                    residual: b.residual.to_f64(),
                })
                .collect(),
        }
    }
}

/// Data window of a scatter plot: the atoms and the origin, widened by
/// [`SVG_MARGIN`] of the larger span on every side and made square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotBox {
    pub min_re: f64,
    pub max_re: f64,
    pub min_im: f64,
    pub max_im: f64,
}

impl PlotBox {
    pub fn fit(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let pad = SVG_MARGIN * span;
        let half = span / 2.0 + pad;
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        Self {
            min_re: cx - half,
            max_re: cx + half,
            min_im: cy - half,
            max_im: cy + half,
        }
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        (self.min_re..=self.max_re).contains(&x) && (self.min_im..=self.max_im).contains(&y)
    }

    /// Canvas coordinates, imaginary axis pointing up.
    pub fn to_canvas(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let sx = SVG_SIZE / (self.max_re - self.min_re);
        let sy = SVG_SIZE / (self.max_im - self.min_im);
        ((x - self.min_re) * sx, (self.max_im - y) * sy)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone SVG scatter of the atoms with axes through the origin. Output
/// bytes depend only on the inputs.
pub fn measure_svg(m: &EmpiricalMeasure, title: &str) -> Result<String, IoError> {
    if m.atoms.is_empty() {
        return Err(IoError::EmptyMeasure);
    }
    let pts: Vec<(f64, f64)> = m.atoms.iter().map(ComplexApprox::to_f64).collect();
    let bx = PlotBox::fit(&pts);
    let (ox, oy) = bx.to_canvas((0.0, 0.0));
    let mut s = String::new();
    let f = |v: f64| {
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{v:.6}")
    };
    let size = f(SVG_SIZE);
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", xml_escape(title)).unwrap();
    writeln!(
        s,
        r#"<desc>re [{}, {}] im [{}, {}]</desc>"#,
        f(bx.min_re),
        f(bx.max_re),
        f(bx.min_im),
        f(bx.max_im)
    )
    .unwrap();
    writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<line x1="0.000000" y1="{oy}" x2="{size}" y2="{oy}" stroke="gray" stroke-width="0.5"/>"#,
        oy = f(oy)
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{ox}" y1="0.000000" x2="{ox}" y2="{size}" stroke="gray" stroke-width="0.5"/>"#,
        ox = f(ox)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="6.000000" y="14.000000" font-family="monospace" font-size="9">{}</text>"#,
        xml_escape(title)
    )
    .unwrap();
    for &p in &pts {
        let (cx, cy) = bx.to_canvas(p);
        writeln!(s, r#"<circle cx="{}" cy="{}" r="1" fill="black"/>"#, f(cx), f(cy)).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
