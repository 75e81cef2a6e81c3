//! Deterministic output: JSON with every float printed at 17 significant
//! digits (exact f64 round-trip, byte-identical across reruns) and plain
//! CSV writers for curves and sweeps.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::Error;
use crate::experiments::{RSweepPoint, RookSweepPoint};
use crate::rank_one::AmplitudeCurve;
use crate::Result;

/// JSON formatter that prints every float as `{:.16e}`: 17 significant
/// digits, enough to reconstruct the exact f64 bit pattern.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to JSON with full-precision floats. Struct fields serialize in
/// declaration order, so repeated runs produce byte-identical output.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Amplitude curve as CSV with header `t,re,im,abs`.
pub fn curve_csv(curve: &AmplitudeCurve) -> String {
    let mut out = String::from("t,re,im,abs\n");
    for (t, a) in curve.times.iter().zip(&curve.amplitudes) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(*t),
            fmt(a.re),
            fmt(a.im),
            fmt(a.norm())
        ));
    }
    out
}

/// Coupling sweep as CSV with header `r,in_window,sup_amp,peak_time,bound`;
/// the bound column is empty where no off-critical bound applies.
pub fn r_sweep_csv(points: &[RSweepPoint]) -> String {
    let mut out = String::from("r,in_window,sup_amp,peak_time,bound\n");
    for p in points {
        let bound = p.bound.map(fmt).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(p.r),
            p.in_window,
            fmt(p.sup_amp),
            fmt(p.peak_time),
            bound
        ));
    }
    out
}

/// Rook size scan as CSV, one row per (sigma, n).
pub fn rook_table_csv(rows: &[(f64, bool, RookSweepPoint)]) -> String {
    let mut out =
        String::from("sigma,column_subspace,n,n1,n2,achieved_sigma,d,r,peak_time,peak_abs,gap\n");
    for (sigma, column, p) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(*sigma),
            column,
            p.n,
            p.n1,
            p.n2,
            fmt(p.achieved_sigma),
            p.d,
            fmt(p.r),
            fmt(p.peak_time),
            fmt(p.peak_abs),
            fmt(p.gap)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: f64,
        }
        let vals = S {
            a: 1.0 / 3.0,
            b: 2.220446049250313e-16,
        };
        let text = to_json(&vals).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64().unwrap().to_bits(), vals.a.to_bits());
        assert_eq!(back["b"].as_f64().unwrap().to_bits(), vals.b.to_bits());
    }

    #[test]
    fn json_output_is_deterministic() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            name: &'static str,
            k: usize,
        }
        let v = S {
            x: 0.1 + 0.2,
            name: "probe",
            k: 7,
        };
        assert_eq!(to_json(&v).unwrap(), to_json(&v).unwrap());
    }

    #[test]
    fn sweep_csv_has_expected_header_and_empty_bound() {
        let points = vec![RSweepPoint {
            r: 1.0,
            in_window: true,
            sup_amp: 0.5,
            peak_time: 3.0,
            bound: None,
        }];
        let text = r_sweep_csv(&points);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "r,in_window,sup_amp,peak_time,bound");
        assert!(lines.next().unwrap().ends_with(','));
    }
}
