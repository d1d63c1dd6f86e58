//! Risk tables as CSV.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{sort_points, RiskPoint};

pub const HEADER: &str =
    "d,gamma_tgt,gamma_src,estimator,sigma_eta2,alpha_used,empirical_mean,empirical_stderr,analytic";

/// C's `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 ≤ |x| < 1e17`. Infinities print as `inf`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

/// Sorted rows under [`HEADER`].
pub fn to_csv_string(points: &[RiskPoint]) -> String {
    let mut rows = points.to_vec();
    sort_points(&mut rows);
    let mut out = String::from(HEADER);
    out.push('\n');
    for p in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.d,
            fmt_g17(p.gamma_tgt),
            fmt_g17(p.gamma_src),
            p.estimator,
            fmt_g17(p.sigma_eta2),
            opt(p.alpha_used),
            opt(p.empirical_mean),
            opt(p.empirical_stderr),
            opt(p.analytic),
        ));
    }
    out
}

pub fn emit_csv(points: &[RiskPoint], path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(points))?;
    Ok(())
}

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {name} `{field}`"),
    })
}

fn parse_opt(field: &str, line: usize, name: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, line, name).map(Some)
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<RiskPoint>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected 9 fields, found {}", f.len()),
            });
        }
        out.push(RiskPoint {
            d: f[0].trim().parse().map_err(|_| Error::Parse {
                line: no,
                msg: format!("bad d `{}`", f[0]),
            })?,
            gamma_tgt: parse_f64(f[1], no, "gamma_tgt")?,
            gamma_src: parse_f64(f[2], no, "gamma_src")?,
            estimator: f[3].parse().map_err(|e: Error| Error::Parse {
                line: no,
                msg: e.to_string(),
            })?,
            sigma_eta2: parse_f64(f[4], no, "sigma_eta2")?,
            alpha_used: parse_opt(f[5], no, "alpha_used")?,
            empirical_mean: parse_opt(f[6], no, "empirical_mean")?,
            empirical_stderr: parse_opt(f[7], no, "empirical_stderr")?,
            analytic: parse_opt(f[8], no, "analytic")?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<RiskPoint>> {
    parse_csv(&fs::read_to_string(path)?)
}
