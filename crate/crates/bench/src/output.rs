//! CSV output for experiment records.

use std::io::{self, Write};

use crate::run::ExperimentRecord;

pub const HEADER: &str = "method,n,p,epsilon,noise,replicates,covered,coverage,\
avg_length_covered,unbounded_count,error_count,mean_runtime_ms,master_seed";

/// 17 significant digits, so every value parses back to the same `f64`.
/// Positional notation for decimal exponents in `[-5, 16]`, scientific
/// otherwise.
pub fn format_real(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    if !(-5..=16).contains(&exp) {
        return sci;
    }
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let point = exp as usize + 1;
        if point >= digits.len() {
            digits
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

/// Header plus one LF-terminated row per record. Missing values are empty.
pub fn write_csv<W: Write>(records: &[ExperimentRecord], mut sink: W) -> io::Result<()> {
    writeln!(sink, "{HEADER}")?;
    for r in records {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.n,
            r.p,
            format_real(r.epsilon),
            r.noise,
            r.replicates,
            r.covered,
            opt(r.coverage),
            opt(r.avg_length_covered),
            r.unbounded_count,
            r.error_count,
            format_real(r.mean_runtime_ms),
            r.master_seed
        )?;
    }
    sink.flush()
}
