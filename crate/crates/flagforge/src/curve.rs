//! CSV form of benchmark curves.

use std::fmt::Write;

use flagforge_core::harness::CurvePoint;
use thiserror::Error;

pub const HEADER: &str = "protocol,l,p,shots,accepted,errors,rate,ci_lo,ci_hi";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("csv line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

pub fn write_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.protocol, p.l, p.p, p.shots, p.accepted, p.errors, p.rate, p.ci_lo, p.ci_hi
        )
        .unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CurvePoint>, CsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(CsvError { line: 1, message: format!("expected header `{HEADER}`") }),
    }
    lines
        .map(|(n, l)| {
            let err = |m: String| CsvError { line: n + 1, message: m };
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != 9 {
                return Err(err(format!("expected 9 fields, found {}", f.len())));
            }
            let int = |i: usize| f[i].parse::<u64>().map_err(|_| err(format!("bad integer `{}`", f[i])));
            let float = |i: usize| f[i].parse::<f64>().map_err(|_| err(format!("bad number `{}`", f[i])));
            let point = CurvePoint {
                protocol: f[0].to_string(),
                l: f[1].parse().map_err(|_| err(format!("bad l `{}`", f[1])))?,
                p: float(2)?,
                shots: int(3)?,
                accepted: int(4)?,
                errors: int(5)?,
                rate: float(6)?,
                ci_lo: float(7)?,
                ci_hi: float(8)?,
            };
            if point.accepted > point.shots || point.errors > point.accepted {
                return Err(err("counts must satisfy errors <= accepted <= shots".into()));
            }
            Ok(point)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(rows in prop::collection::vec(
            (0u32..9, 1e-6f64..0.25, 1u64..10_000_000, 0.0f64..1.0, 0.0f64..1.0, any::<f64>()),
            0..8,
        )) {
            let points: Vec<CurvePoint> = rows
                .into_iter()
                .map(|(l, p, shots, fa, fe, rate)| {
                    let accepted = (shots as f64 * fa) as u64;
                    CurvePoint {
                        protocol: if l % 2 == 0 { "iceberg".into() } else { "steane-prep".into() },
                        l,
                        p,
                        shots,
                        accepted,
                        errors: (accepted as f64 * fe) as u64,
                        rate: if rate.is_finite() { rate } else { 0.5 },
                        ci_lo: p / 3.0,
                        ci_hi: 1.0 - p,
                    }
                })
                .collect();
            prop_assert_eq!(parse_csv(&write_csv(&points)).unwrap(), points);
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_csv("p,q\n").is_err());
        let bad = format!("{HEADER}\niceberg,2,0.001,10,11,0,0,0,1\n");
        assert_eq!(parse_csv(&bad).unwrap_err().line, 2);
        let short = format!("{HEADER}\niceberg,2\n");
        assert!(parse_csv(&short).is_err());
    }
}
