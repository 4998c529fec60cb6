//! CSV and JSON file formats.
//!
//! Floats are written in Rust's shortest round-trip form (`{:?}`), so reading
//! a file and writing it back reproduces the same bytes.
//!
//! | content            | header                                    |
//! |--------------------|-------------------------------------------|
//! | photon stream      | `t_seconds`                               |
//! | g2 histogram       | `tau_seconds,counts,g2`                   |
//! | efficiency curve   | `na,eta_planar,eta_sil,ratio`             |
//! | saturation data    | `intensity_uW,rate_cps[,rate_err_cps]`    |
//!
//! JSON reports are objects with the keys `config`, `result` and
//! `diagnostics`, in that order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::efficiency::{CurveRow, EfficiencyCurve};
use crate::error::{Error, Result};
use crate::photophysics::{Channel, CoincidenceHistogram, PhotonStream, SaturationDataset, SaturationPoint};

pub const STREAM_HEADER: &str = "t_seconds";
pub const HISTOGRAM_HEADER: &str = "tau_seconds,counts,g2";
pub const CURVE_HEADER: &str = "na,eta_planar,eta_sil,ratio";
pub const SATURATION_HEADER: &str = "intensity_uW,rate_cps";
pub const SATURATION_HEADER_WITH_ERRORS: &str = "intensity_uW,rate_cps,rate_err_cps";

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: '{field}' is not a number")))
}

fn records<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let joined = headers.iter().map(str::trim).collect::<Vec<_>>().join(",");
    if !expected.contains(&joined.as_str()) {
        return Err(Error::Parse(format!("unexpected header '{joined}', expected one of {expected:?}")));
    }
    rdr.records()
        .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

pub fn write_stream_csv<W: Write>(stream: &PhotonStream, mut w: W) -> Result<()> {
    writeln!(w, "{STREAM_HEADER}")?;
    for t in stream.timestamps() {
        writeln!(w, "{t:?}")?;
    }
    Ok(())
}

/// Reads a stream file. Without an explicit `duration` the last timestamp
/// is taken as the end of the acquisition.
pub fn read_stream_csv<R: Read>(reader: R, duration: Option<f64>, channel: Channel) -> Result<PhotonStream> {
    let ts = records(reader, &[STREAM_HEADER])?
        .iter()
        .enumerate()
        .map(|(i, r)| parse_f64(&r[0], i + 2))
        .collect::<Result<Vec<_>>>()?;
    let duration = match duration {
        Some(d) => d,
        None => *ts
            .last()
            .ok_or_else(|| Error::EmptyStream("stream file has no events and no duration".into()))?,
    };
    PhotonStream::new(ts, duration, channel).map_err(|e| Error::Parse(e.to_string()))
}

/// One line of a histogram file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub tau_seconds: f64,
    pub counts: u64,
    pub g2: f64,
}

pub fn histogram_rows(h: &CoincidenceHistogram) -> Vec<HistogramRow> {
    h.taus()
        .zip(&h.counts)
        .zip(&h.g2)
        .map(|((tau_seconds, &counts), &g2)| HistogramRow {
            tau_seconds,
            counts,
            g2,
        })
        .collect()
}

pub fn write_histogram_csv<W: Write>(rows: &[HistogramRow], mut w: W) -> Result<()> {
    writeln!(w, "{HISTOGRAM_HEADER}")?;
    for r in rows {
        writeln!(w, "{:?},{},{:?}", r.tau_seconds, r.counts, r.g2)?;
    }
    Ok(())
}

pub fn read_histogram_csv<R: Read>(reader: R) -> Result<Vec<HistogramRow>> {
    records(reader, &[HISTOGRAM_HEADER])?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(HistogramRow {
                tau_seconds: parse_f64(&r[0], i + 2)?,
                counts: r[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad count '{}'", i + 2, &r[1])))?,
                g2: parse_f64(&r[2], i + 2)?,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(curve: &EfficiencyCurve, mut w: W) -> Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for r in &curve.rows {
        let ratio = r.ratio.map(|x| format!("{x:?}")).unwrap_or_default();
        writeln!(w, "{:?},{:?},{:?},{ratio}", r.na, r.eta_planar, r.eta_sil)?;
    }
    Ok(())
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<EfficiencyCurve> {
    let rows = records(reader, &[CURVE_HEADER])?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ratio = match r[3].trim() {
                "" => None,
                s => Some(parse_f64(s, i + 2)?),
            };
            Ok(CurveRow {
                na: parse_f64(&r[0], i + 2)?,
                eta_planar: parse_f64(&r[1], i + 2)?,
                eta_sil: parse_f64(&r[2], i + 2)?,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EfficiencyCurve::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_saturation_csv<R: Read>(reader: R) -> Result<SaturationDataset> {
    let points = records(reader, &[SATURATION_HEADER, SATURATION_HEADER_WITH_ERRORS])?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(SaturationPoint {
                intensity_uw: parse_f64(&r[0], i + 2)?,
                rate_cps: parse_f64(&r[1], i + 2)?,
                rate_err_cps: r.get(2).map(|e| parse_f64(e, i + 2)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SaturationDataset::new(points).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_saturation_csv<W: Write>(data: &SaturationDataset, mut w: W) -> Result<()> {
    let with_errors = !data.points.is_empty() && data.points.iter().all(|p| p.rate_err_cps.is_some());
    if with_errors {
        writeln!(w, "{SATURATION_HEADER_WITH_ERRORS}")?;
    } else {
        writeln!(w, "{SATURATION_HEADER}")?;
    }
    for p in &data.points {
        match (with_errors, p.rate_err_cps) {
            (true, Some(e)) => writeln!(w, "{:?},{:?},{e:?}", p.intensity_uw, p.rate_cps)?,
            _ => writeln!(w, "{:?},{:?}", p.intensity_uw, p.rate_cps)?,
        }
    }
    Ok(())
}

/// Self-describing JSON result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<C, R, D> {
    pub config: C,
    pub result: R,
    pub diagnostics: D,
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> Result<T> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))
}
