use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::SensorFrame;

pub const LOG_HEADER: [&str; 4] = ["t", "sh_px", "depth_cb_m", "gt_cb_m"];

/// One line of a paired sensor log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorLogRecord {
    pub t: f64,
    pub sh_px: Option<f64>,
    pub depth_cb_m: Option<f64>,
    pub gt_cb_m: Option<f64>,
}

impl SensorLogRecord {
    pub fn sensor_frame(&self) -> SensorFrame {
        SensorFrame::new(self.t, self.sh_px, self.depth_cb_m)
    }
}

/// Fixed six-decimal rendering used by every CSV this crate writes.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_default()
}

pub fn write_sensor_log<W: Write>(mut w: W, records: &[SensorLogRecord]) -> Result<()> {
    writeln!(w, "{}", LOG_HEADER.join(","))?;
    for r in records {
        writeln!(w, "{},{},{},{}", fmt6(r.t), fmt_opt(r.sh_px), fmt_opt(r.depth_cb_m), fmt_opt(r.gt_cb_m))?;
    }
    Ok(())
}

fn parse_field(raw: &str, line: u64, name: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| Error::Parse { line, message: format!("{name}: '{raw}' is not a number") })?;
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Parse { line, message: format!("{name}: {raw} must be finite and positive") });
    }
    Ok(Some(v))
}

/// Parse a sensor log. Empty fields mean the channel is absent.
pub fn parse_sensor_log<R: Read>(reader: R) -> Result<Vec<SensorLogRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::None).from_reader(reader);
    let mut rows = rdr.records();
    let expected = LOG_HEADER.join(",");
    let header = match rows.next() {
        None => return Err(Error::HeaderMismatch { expected, found: String::new() }),
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != LOG_HEADER {
        return Err(Error::HeaderMismatch { expected, found: found.join(",") });
    }

    let mut out: Vec<SensorLogRecord> = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != LOG_HEADER.len() {
            return Err(Error::Parse { line, message: format!("expected 4 fields, found {}", row.len()) });
        }
        let t_raw = row[0].trim();
        let t: f64 = t_raw.parse().map_err(|_| Error::Parse { line, message: format!("t: '{t_raw}' is not a number") })?;
        if !t.is_finite() {
            return Err(Error::Parse { line, message: "t must be finite".into() });
        }
        if let Some(prev) = out.last() {
            if t <= prev.t {
                return Err(Error::NonMonotoneTimestamp { index: out.len(), prev: prev.t, next: t });
            }
        }
        out.push(SensorLogRecord {
            t,
            sh_px: parse_field(&row[1], line, "sh_px")?,
            depth_cb_m: parse_field(&row[2], line, "depth_cb_m")?,
            gt_cb_m: parse_field(&row[3], line, "gt_cb_m")?,
        });
    }
    Ok(out)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => Error::Parse { line, message: e.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "t,sh_px,depth_cb_m,gt_cb_m\n";

    fn parse(body: &str) -> Result<Vec<SensorLogRecord>> {
        parse_sensor_log(format!("{HEADER}{body}").as_bytes())
    }

    #[test]
    fn full_record() {
        let r = parse("0.000000,210.5,3.012,3.000\n").unwrap();
        assert_eq!(r, vec![SensorLogRecord { t: 0.0, sh_px: Some(210.5), depth_cb_m: Some(3.012), gt_cb_m: Some(3.0) }]);
    }

    #[test]
    fn empty_field_is_an_absent_channel() {
        let r = parse("0.033333,,2.998,3.000\n").unwrap();
        assert_eq!(r[0].sh_px, None);
        assert_eq!(r[0].depth_cb_m, Some(2.998));
        let r = parse("0.033333,200,,\n").unwrap();
        assert_eq!((r[0].depth_cb_m, r[0].gt_cb_m), (None, None));
    }

    #[test]
    fn malformed_value_names_its_line() {
        let e = parse("0.000000,210,3,3\n0.033333,210,3,3\n0.066666,abc,3,3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e:?}");
    }

    #[test]
    fn wrong_field_count() {
        assert!(matches!(parse("0.0,1,2\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn header_must_match() {
        let e = parse_sensor_log("time,sh,depth,gt\n0,1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::HeaderMismatch { .. }));
        assert!(matches!(parse_sensor_log("".as_bytes()), Err(Error::HeaderMismatch { .. })));
    }

    #[test]
    fn timestamps_must_increase() {
        let e = parse("0.1,,3,\n0.1,,3,\n").unwrap_err();
        assert!(matches!(e, Error::NonMonotoneTimestamp { index: 1, .. }));
    }

    #[test]
    fn values_must_be_positive() {
        assert!(matches!(parse("0.0,,-3,\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("0.0,,NaN,\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn write_then_parse() {
        let recs = vec![
            SensorLogRecord { t: 0.0, sh_px: Some(187.123456), depth_cb_m: None, gt_cb_m: Some(3.0) },
            SensorLogRecord { t: 0.033333, sh_px: None, depth_cb_m: Some(2.5), gt_cb_m: None },
        ];
        let mut buf = Vec::new();
        write_sensor_log(&mut buf, &recs).unwrap();
        assert_eq!(parse_sensor_log(buf.as_slice()).unwrap(), recs);
        assert!(String::from_utf8(buf).unwrap().ends_with("0.033333,,2.500000,\n"));
    }
}
