use std::fmt::Write as _;
use std::path::Path;

use super::{OutputFormat, TimeSeriesRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "time,dist_eq6,dist_eq7,min_ppt_eig,n_negative_ppt";

/// C `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(record: &TimeSeriesRecord) -> String {
    let mut out = String::with_capacity(64 * (record.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in record.samples() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_number(s.time),
            format_number(s.dist_decohered),
            format_number(s.dist_microcanonical),
            format_number(s.min_ppt_eig),
            s.n_negative_ppt
        );
    }
    out
}

pub fn to_json(record: &TimeSeriesRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("record serializes");
    s.push('\n');
    s
}

pub fn emit(record: &TimeSeriesRecord, format: OutputFormat, path: &Path) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => to_csv(record),
        OutputFormat::Json => to_json(record),
    };
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
