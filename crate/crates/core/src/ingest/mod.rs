//! GeoLife ingestion: `.plt` and `labels.txt` parsing, and grouping of labeled
//! fixes into trajectory samples.

mod archive;
mod geolife;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordError, Result};

pub use archive::{parse_archive_line, read_archive, write_archive};
pub use geolife::{emit_geolife, load_geolife, load_user, GeolifeLoad, UserLoad};

/// Number of header lines at the top of every `.plt` file.
pub const PLT_HEADER_LINES: usize = 6;

/// Altitude value GeoLife uses for "no altitude recorded".
pub const MISSING_ALTITUDE: f64 = -777.0;

/// Default minimum number of fixes a sample must have to be kept.
pub const DEFAULT_MIN_POINTS: usize = 10;

const PLT_DATE_FORMAT: &str = "%Y-%m-%d";
const PLT_TIME_FORMAT: &str = "%H:%M:%S";
const LABEL_DATETIME_FORMAT: &str = "%Y/%m/%d %H:%M:%S";

/// The eleven transportation modes annotated in GeoLife.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Taxi,
    Car,
    Train,
    Subway,
    Walk,
    Airplane,
    Boat,
    Bike,
    Run,
    Motorcycle,
    Bus,
}

impl Mode {
    pub const ALL: [Mode; 11] = [
        Mode::Taxi,
        Mode::Car,
        Mode::Train,
        Mode::Subway,
        Mode::Walk,
        Mode::Airplane,
        Mode::Boat,
        Mode::Bike,
        Mode::Run,
        Mode::Motorcycle,
        Mode::Bus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Taxi => "taxi",
            Mode::Car => "car",
            Mode::Train => "train",
            Mode::Subway => "subway",
            Mode::Walk => "walk",
            Mode::Airplane => "airplane",
            Mode::Boat => "boat",
            Mode::Bike => "bike",
            Mode::Run => "run",
            Mode::Motorcycle => "motorcycle",
            Mode::Bus => "bus",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Mode::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == lower)
            .ok_or_else(|| format!("unknown mode `{}`", s.trim()))
    }
}

/// One timestamped GPS fix.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsPoint {
    pub user_id: Arc<str>,
    pub latitude: f64,
    pub longitude: f64,
    /// Feet; [`MISSING_ALTITUDE`] when unknown.
    pub altitude: f64,
    pub timestamp: NaiveDateTime,
}

impl GpsPoint {
    pub fn new(
        user_id: Arc<str>,
        latitude: f64,
        longitude: f64,
        altitude: f64,
        timestamp: NaiveDateTime,
    ) -> std::result::Result<Self, String> {
        check_coordinates(latitude, longitude)?;
        Ok(GpsPoint {
            user_id,
            latitude,
            longitude,
            altitude,
            timestamp,
        })
    }

    pub fn day(&self) -> NaiveDate {
        self.timestamp.date()
    }
}

fn check_coordinates(latitude: f64, longitude: f64) -> std::result::Result<(), String> {
    if !latitude.is_finite() || !(-90.0..=90.0).contains(&latitude) {
        return Err(format!("latitude {latitude} out of bounds [-90, 90]"));
    }
    if !longitude.is_finite() || !(-180.0..=180.0).contains(&longitude) {
        return Err(format!("longitude {longitude} out of bounds [-180, 180]"));
    }
    Ok(())
}

/// A labeled time span from `labels.txt`. Bounds are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelInterval {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub mode: Mode,
}

impl LabelInterval {
    pub fn contains(&self, t: NaiveDateTime) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Ordered fixes of one user on one calendar day under one mode label.
///
/// Fields are private so every instance satisfies the ordering and grouping
/// invariants; the minimum-size rule is applied separately by
/// [`filter_short`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    user_id: Arc<str>,
    day: NaiveDate,
    mode: String,
    points: Vec<GpsPoint>,
}

impl TrajectorySample {
    pub fn new(mode: impl Into<String>, points: Vec<GpsPoint>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("trajectory sample has no points"))?;
        let user_id = first.user_id.clone();
        let day = first.day();
        for (i, p) in points.iter().enumerate() {
            if p.user_id != user_id {
                return Err(Error::Invariant(format!(
                    "point {i} belongs to user `{}`, sample is `{user_id}`",
                    p.user_id
                )));
            }
            if p.day() != day {
                return Err(Error::Invariant(format!(
                    "point {i} is on {}, sample is on {day}",
                    p.day()
                )));
            }
            check_coordinates(p.latitude, p.longitude).map_err(Error::Invariant)?;
        }
        if let Some(i) = points.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::Invariant(format!(
                "timestamps not strictly increasing at point {}",
                i + 1
            )));
        }
        Ok(TrajectorySample {
            user_id,
            day,
            mode: mode.into(),
            points,
        })
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn day(&self) -> NaiveDate {
        self.day
    }

    pub fn mode(&self) -> &str {
        &self.mode
    }

    pub fn set_mode(&mut self, mode: impl Into<String>) {
        self.mode = mode.into();
    }

    pub fn points(&self) -> &[GpsPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<GpsPoint> {
        self.points
    }
}

/// How parsers react to a malformed record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParsePolicy {
    /// Skip the record and report it in [`Parsed::skipped`].
    #[default]
    Lenient,
    /// Abort on the first malformed record.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub items: Vec<T>,
    pub skipped: Vec<RecordError>,
}

impl<T> Parsed<T> {
    fn push(&mut self, policy: ParsePolicy, res: std::result::Result<T, RecordError>) -> Result<()> {
        match res {
            Ok(item) => self.items.push(item),
            Err(e) if policy == ParsePolicy::Strict => return Err(e.into()),
            Err(e) => self.skipped.push(e),
        }
        Ok(())
    }
}

/// Parses a GeoLife `.plt` file: six header lines, then
/// `lat,lon,0,altitude,serial_date,YYYY-MM-DD,HH:MM:SS` records.
///
/// The serial-date field is ignored; the timestamp comes from the last two
/// fields. Blank lines are ignored.
pub fn parse_plt(content: &str, user_id: &str, policy: ParsePolicy) -> Result<Parsed<GpsPoint>> {
    let user: Arc<str> = Arc::from(user_id);
    let mut out = Parsed {
        items: Vec::new(),
        skipped: Vec::new(),
    };
    for (idx, raw) in content.lines().enumerate().skip(PLT_HEADER_LINES) {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let rec = parse_plt_record(line, &user).map_err(|message| RecordError { line: idx + 1, message });
        out.push(policy, rec)?;
    }
    Ok(out)
}

fn parse_plt_record(line: &str, user: &Arc<str>) -> std::result::Result<GpsPoint, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 7 {
        return Err(format!("expected 7 fields, found {}", fields.len()));
    }
    let latitude = parse_f64(fields[0], "latitude")?;
    let longitude = parse_f64(fields[1], "longitude")?;
    let altitude = parse_f64(fields[3], "altitude")?;
    let date =
        NaiveDate::parse_from_str(fields[5], PLT_DATE_FORMAT).map_err(|e| format!("bad date `{}`: {e}", fields[5]))?;
    let time = chrono::NaiveTime::parse_from_str(fields[6], PLT_TIME_FORMAT)
        .map_err(|e| format!("bad time `{}`: {e}", fields[6]))?;
    GpsPoint::new(user.clone(), latitude, longitude, altitude, date.and_time(time))
}

fn parse_f64(s: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad {what} `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite {what} `{s}`"))
    }
}

/// Parses a GeoLife `labels.txt`: a `Start Time\tEnd Time\tTransportation Mode`
/// header followed by tab-separated rows.
pub fn parse_labels(content: &str, policy: ParsePolicy) -> Result<Parsed<LabelInterval>> {
    let mut out = Parsed {
        items: Vec::new(),
        skipped: Vec::new(),
    };
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (idx == 0 && line.starts_with("Start Time")) {
            continue;
        }
        let rec = parse_label_record(line).map_err(|message| RecordError { line: idx + 1, message });
        out.push(policy, rec)?;
    }
    Ok(out)
}

fn parse_label_record(line: &str) -> std::result::Result<LabelInterval, String> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    let start = NaiveDateTime::parse_from_str(fields[0], LABEL_DATETIME_FORMAT)
        .map_err(|e| format!("bad start time `{}`: {e}", fields[0]))?;
    let end = NaiveDateTime::parse_from_str(fields[1], LABEL_DATETIME_FORMAT)
        .map_err(|e| format!("bad end time `{}`: {e}", fields[1]))?;
    let mode: Mode = fields[2].parse()?;
    if start > end {
        return Err(format!("start {start} is after end {end}"));
    }
    Ok(LabelInterval { start, end, mode })
}

/// Attaches label modes to fixes and groups them into samples.
///
/// Points are sorted by (user, timestamp) and duplicate timestamps keep the
/// first occurrence. A point takes the mode of the label interval covering
/// it; unlabeled points are dropped. A new sample starts whenever the user,
/// calendar day or covering interval changes, so two disjoint intervals of the
/// same mode on one day produce two samples.
pub fn assemble_samples(mut points: Vec<GpsPoint>, labels: &[LabelInterval]) -> Vec<TrajectorySample> {
    points.sort_by(|a, b| a.user_id.cmp(&b.user_id).then(a.timestamp.cmp(&b.timestamp)));
    points.dedup_by(|cur, prev| cur.user_id == prev.user_id && cur.timestamp == prev.timestamp);

    let mut intervals: Vec<&LabelInterval> = labels.iter().collect();
    intervals.sort_by(|a, b| a.start.cmp(&b.start).then(a.end.cmp(&b.end)));

    let mut samples = Vec::new();
    let mut run: Vec<GpsPoint> = Vec::new();
    let mut run_key: Option<(Arc<str>, NaiveDate, usize)> = None;
    let mut cursor = 0usize;
    let mut cursor_user: Option<Arc<str>> = None;

    for p in points {
        if cursor_user.as_ref() != Some(&p.user_id) {
            cursor = 0;
            cursor_user = Some(p.user_id.clone());
        }
        while cursor < intervals.len() && intervals[cursor].end < p.timestamp {
            cursor += 1;
        }
        let covering = (cursor < intervals.len() && intervals[cursor].start <= p.timestamp).then_some(cursor);
        let Some(iv) = covering else {
            continue;
        };
        let key = (p.user_id.clone(), p.day(), iv);
        if run_key.as_ref() != Some(&key) {
            flush_run(&mut samples, &mut run, run_key.take(), &intervals);
            run_key = Some(key);
        }
        run.push(p);
    }
    flush_run(&mut samples, &mut run, run_key, &intervals);
    samples
}

fn flush_run(
    samples: &mut Vec<TrajectorySample>,
    run: &mut Vec<GpsPoint>,
    key: Option<(Arc<str>, NaiveDate, usize)>,
    intervals: &[&LabelInterval],
) {
    if let Some((_, _, iv)) = key {
        let points = std::mem::take(run);
        // Points are sorted, deduplicated and share user, day and interval.
        let sample = TrajectorySample::new(intervals[iv].mode.as_str(), points)
            .expect("grouped run satisfies sample invariants");
        samples.push(sample);
    }
}

/// Keeps the samples with at least `min_points` fixes, in order.
///
/// `min_points` must be at least 4 so that the jerk series is non-empty.
pub fn filter_short(samples: Vec<TrajectorySample>, min_points: usize) -> Result<Vec<TrajectorySample>> {
    if min_points < 4 {
        return Err(Error::Config(format!(
            "min_points must be at least 4, got {min_points}"
        )));
    }
    Ok(samples.into_iter().filter(|s| s.len() >= min_points).collect())
}
