//! File formats: curve CSV with a JSON sidecar, bounds CSV, sorted-key JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::BoundCurve;
use crate::error::{Error, Result};
use crate::scrambling::{CurveRow, ExperimentConfig, MICurve};

pub const CURVE_HEADER: [&str; 7] = ["l", "mean_I", "min_I", "max_I", "std_error", "subsets", "samples"];

pub const BOUNDS_HEADER: [&str; 7] = [
    "l",
    "s",
    "pure_bound",
    "mixed_bound",
    "maximally_mixed_mi",
    "pure_bound_clamped",
    "mixed_bound_clamped",
];

/// Decimal rendering with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // The exponent after rounding to 12 digits, so 0.9999999999999 counts as 1.
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        return "0".into();
    }
    s
}

/// Pretty JSON with keys in lexicographic order and a trailing newline.
pub fn to_sorted_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // serde_json's map is ordered by key unless `preserve_order` is enabled.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_sorted_json(value)?)?;
    Ok(())
}

/// Metadata written next to a curve CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: usize,
    pub config: Option<ExperimentConfig>,
    pub note: String,
}

impl CurveMetadata {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        Self {
            n: cfg.n,
            s: cfg.s,
            config: Some(cfg.clone()),
            note: "statistics cover the evaluated subsets only".into(),
        }
    }
}

/// `curve.csv` → `curve.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn curve_csv_string(curve: &MICurve) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CURVE_HEADER)?;
    for r in &curve.rows {
        w.write_record([
            r.l.to_string(),
            fmt_sig(r.mean_i),
            fmt_sig(r.min_i),
            fmt_sig(r.max_i),
            fmt_sig(r.std_error),
            r.subsets.to_string(),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the CSV and its metadata sidecar.
pub fn write_curve(path: &Path, curve: &MICurve, meta: &CurveMetadata) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(curve_csv_string(curve)?.as_bytes())?;
    write_json(&sidecar_path(path), meta)
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse(format!("line {line}: missing column {}", CURVE_HEADER[i])))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {} value '{raw}'", CURVE_HEADER[i])))
}

/// Parses curve CSV text; `N` is the last ℓ.
pub fn parse_curve_csv(text: &str, s: usize) -> Result<MICurve> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(CURVE_HEADER) {
        return Err(Error::Parse(format!(
            "curve header must be '{}'",
            CURVE_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        rows.push(CurveRow {
            l: parse_field(&rec, 0, line)?,
            mean_i: parse_field(&rec, 1, line)?,
            min_i: parse_field(&rec, 2, line)?,
            max_i: parse_field(&rec, 3, line)?,
            std_error: parse_field(&rec, 4, line)?,
            subsets: parse_field(&rec, 5, line)?,
            samples: parse_field(&rec, 6, line)?,
        });
    }
    let n = rows
        .last()
        .map(|r| r.l)
        .ok_or_else(|| Error::Parse("curve has no rows".into()))?;
    let curve = MICurve { n, s, rows };
    curve.validate()?;
    Ok(curve)
}

/// Reads a curve CSV; `s` comes from the sidecar when present, else 0.
pub fn read_curve(path: &Path) -> Result<(MICurve, Option<CurveMetadata>)> {
    let text = fs::read_to_string(path)?;
    let side = sidecar_path(path);
    let meta: Option<CurveMetadata> = if side.exists() {
        Some(serde_json::from_str(&fs::read_to_string(&side)?)?)
    } else {
        None
    };
    let curve = parse_curve_csv(&text, meta.as_ref().map_or(0, |m| m.s))?;
    if let Some(m) = &meta {
        if m.n != curve.n {
            return Err(Error::Parse(format!(
                "sidecar says N = {}, CSV has N = {}",
                m.n, curve.n
            )));
        }
    }
    Ok((curve, meta))
}

/// Bounds for several `s` values, one block per `s`.
pub fn bounds_csv_string(curves: &[BoundCurve]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(BOUNDS_HEADER)?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                p.l.to_string(),
                c.s.to_string(),
                fmt_sig(p.pure),
                p.mixed.map(fmt_sig).unwrap_or_default(),
                fmt_sig(p.maximally_mixed),
                fmt_sig(p.pure_clamped()),
                p.mixed_clamped().map(fmt_sig).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// One parsed row of a bounds CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsRow {
    pub l: u32,
    pub s: u32,
    pub pure_clamped: f64,
    pub mixed_clamped: Option<f64>,
}

pub fn parse_bounds_csv(text: &str) -> Result<Vec<BoundsRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    if r.headers()?.iter().map(str::trim).ne(BOUNDS_HEADER) {
        return Err(Error::Parse(format!("bounds header must be '{}'", BOUNDS_HEADER.join(","))));
    }
    let num = |rec: &csv::StringRecord, i: usize| -> Result<Option<f64>> {
        match rec.get(i).map(str::trim) {
            None | Some("") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad {} value '{v}'", BOUNDS_HEADER[i]))),
        }
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let int = |i: usize| -> Result<u32> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad {} value", BOUNDS_HEADER[i])))
        };
        out.push(BoundsRow {
            l: int(0)?,
            s: int(1)?,
            pure_clamped: num(&rec, 5)?.ok_or_else(|| Error::Parse("missing pure_bound_clamped".into()))?,
            mixed_clamped: num(&rec, 6)?,
        });
    }
    Ok(out)
}
