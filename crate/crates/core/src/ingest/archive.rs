//! Line-delimited JSON archive of trajectory samples, one sample per line.

use std::io::{BufRead, Write};
use std::sync::Arc;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{GpsPoint, TrajectorySample};
use crate::error::{Error, RecordError, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord<'a> {
    #[serde(borrow)]
    user_id: std::borrow::Cow<'a, str>,
    day: NaiveDate,
    mode: std::borrow::Cow<'a, str>,
    /// `[latitude, longitude, altitude, timestamp]`
    points: Vec<(f64, f64, f64, NaiveDateTime)>,
}

pub fn write_archive<W: Write>(samples: &[TrajectorySample], mut w: W) -> Result<()> {
    for s in samples {
        let rec = SampleRecord {
            user_id: s.user_id().into(),
            day: s.day(),
            mode: s.mode().into(),
            points: s
                .points()
                .iter()
                .map(|p| (p.latitude, p.longitude, p.altitude, p.timestamp))
                .collect(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Decodes one archive line; `line_no` is used for error reporting.
pub fn parse_archive_line(line: &str, line_no: usize) -> Result<TrajectorySample> {
    let rec_err = |message: String| Error::Record(RecordError { line: line_no, message });
    let rec: SampleRecord<'_> = serde_json::from_str(line).map_err(|e| rec_err(e.to_string()))?;
    let user: Arc<str> = Arc::from(rec.user_id.as_ref());
    let points = rec
        .points
        .into_iter()
        .map(|(lat, lon, alt, ts)| GpsPoint::new(user.clone(), lat, lon, alt, ts))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(rec_err)?;
    let sample = TrajectorySample::new(rec.mode.into_owned(), points).map_err(|e| rec_err(e.to_string()))?;
    if sample.day() != rec.day {
        return Err(rec_err(format!(
            "day {} does not match point dates {}",
            rec.day,
            sample.day()
        )));
    }
    Ok(sample)
}

pub fn read_archive<R: BufRead>(r: R) -> Result<Vec<TrajectorySample>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_archive_line(&line, idx + 1)?);
    }
    Ok(out)
}
