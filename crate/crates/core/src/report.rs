//! Deterministic report encoding: fixed 17-significant-digit numbers, the
//! `re+imi` complex text form, RFC-4180 CSV, and JSON documents with a schema
//! version. Identical inputs must produce byte-identical files.

use crate::{Error, Result};
use num_complex::Complex64;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

/// Canonical float encoding: 17 significant digits, lossless for doubles.
pub fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0
    format!("{v:.16e}")
}

/// Canonical complex encoding `<re>+<im>i` / `<re>-<im>i`.
pub fn fmt_complex(z: Complex64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im.is_sign_negative() {
        format!("{}-{}i", fmt_f64(re), fmt_f64(-im))
    } else {
        format!("{}+{}i", fmt_f64(re), fmt_f64(im))
    }
}

/// Parses the canonical complex form; also accepts a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Config("empty complex literal".to_string()));
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Split at the sign of the imaginary part: the last +/- that is not
        // part of an exponent and not the leading sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let k = split.ok_or_else(|| {
            Error::Config(format!("cannot split complex literal '{t}' into re/im"))
        })?;
        let re: f64 = body[..k]
            .parse()
            .map_err(|_| Error::Config(format!("bad real part in '{t}'")))?;
        let sign = if bytes[k] as char == '-' { -1.0 } else { 1.0 };
        let im_str = &body[k + 1..];
        let im: f64 = if im_str.is_empty() {
            1.0
        } else {
            im_str
                .parse()
                .map_err(|_| Error::Config(format!("bad imaginary part in '{t}'")))?
        };
        Ok(Complex64::new(re, sign * im))
    } else {
        let re: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("bad number '{t}'")))?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// RFC-4180 CSV writer: fields holding commas, quotes or line breaks are
/// quoted, embedded quotes doubled, rows end in CRLF.
#[derive(Debug, Default)]
pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let encoded: Vec<String> = cells.iter().map(|c| encode_field(c.as_ref())).collect();
        self.buf.push_str(&encoded.join(","));
        self.buf.push_str("\r\n");
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

fn encode_field(f: &str) -> String {
    if f.contains(',') || f.contains('"') || f.contains('\r') || f.contains('\n') {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

/// JSON object builder that keeps the schema version in front and preserves
/// deterministic key order (serde_json maps are ordered by key).
pub fn json_document(kind: &str, body: Map<String, Value>) -> Value {
    let mut root = Map::new();
    root.insert(
        "schema_version".into(),
        Value::String(SCHEMA_VERSION.into()),
    );
    root.insert("kind".into(), Value::String(kind.into()));
    for (k, v) in body {
        root.insert(k, v);
    }
    Value::Object(root)
}

pub fn json_f64(v: f64) -> Value {
    Value::String(fmt_f64(v))
}

pub fn json_complex(z: Complex64) -> Value {
    Value::String(fmt_complex(z))
}
