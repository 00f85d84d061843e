//! Per-point motion features computed between consecutive fixes.
//!
//! For a sample of `n` fixes, distance, speed and bearing have `n - 1`
//! entries, acceleration and bearing rate `n - 2`, jerk and rate of bearing
//! rate `n - 3`. A difference that produces index `i + 1` of a series is
//! divided by the time gap that ends at fix `i + 1` of that series, so
//! acceleration `i` uses `dt[i + 1]` and jerk `i` uses `dt[i + 2]`.

use crate::error::{Error, Result};
use crate::ingest::{GpsPoint, TrajectorySample};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Names of the seven point features in canonical order.
pub const POINT_FEATURE_NAMES: [&str; 7] = [
    "distance",
    "speed",
    "acceleration",
    "jerk",
    "bearing",
    "bearing_rate",
    "bearing_rate_rate",
];

/// Great-circle distance in meters between two coordinates in degrees.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

/// Forward azimuth in degrees `[0, 360)`, clockwise from true north.
/// Coincident positions have bearing 0.
pub fn bearing_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    if lat1 == lat2 && lon1 == lon2 {
        return 0.0;
    }
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dlambda = (lon2 - lon1).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    normalize_degrees(y.atan2(x).to_degrees())
}

fn normalize_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

pub fn haversine_distance(p1: &GpsPoint, p2: &GpsPoint) -> f64 {
    haversine_m(p1.latitude, p1.longitude, p2.latitude, p2.longitude)
}

pub fn initial_bearing(p1: &GpsPoint, p2: &GpsPoint) -> f64 {
    bearing_deg(p1.latitude, p1.longitude, p2.latitude, p2.longitude)
}

/// Bearing rate between two consecutive bearings over `dt` seconds.
///
/// With `wrap` unset this is the literal signed difference, so 350° to 10°
/// gives -340°; with `wrap` set the difference is folded into `[-180, 180)`.
pub fn bearing_rate(b_prev: f64, b_next: f64, dt: f64, wrap: bool) -> f64 {
    let mut diff = b_next - b_prev;
    if wrap {
        diff = (diff + 180.0).rem_euclid(360.0) - 180.0;
    }
    diff / dt
}

/// Rate of bearing rate between two consecutive bearing rates.
pub fn bearing_rate_rate(rate_prev: f64, rate_next: f64, dt: f64) -> f64 {
    (rate_next - rate_prev) / dt
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PointFeatureOptions {
    /// Fold bearing differences across north before dividing by `dt`.
    pub wrap_bearing: bool,
}

/// The seven per-point feature series of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFeatureSeries {
    pub distance: Vec<f64>,
    pub speed: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub jerk: Vec<f64>,
    pub bearing: Vec<f64>,
    pub bearing_rate: Vec<f64>,
    pub bearing_rate_rate: Vec<f64>,
}

impl PointFeatureSeries {
    /// Series in canonical order, matching [`POINT_FEATURE_NAMES`].
    pub fn series(&self) -> [&[f64]; 7] {
        [
            &self.distance,
            &self.speed,
            &self.acceleration,
            &self.jerk,
            &self.bearing,
            &self.bearing_rate,
            &self.bearing_rate_rate,
        ]
    }
}

fn forward_diff(values: &[f64], dt: &[f64]) -> Vec<f64> {
    values.windows(2).zip(dt).map(|(w, &dt)| (w[1] - w[0]) / dt).collect()
}

pub fn compute_point_features(sample: &TrajectorySample) -> Result<PointFeatureSeries> {
    compute_point_features_with(sample.points(), PointFeatureOptions::default())
}

/// Computes the feature series from raw fixes. Needs at least 4 fixes and
/// strictly increasing timestamps.
pub fn compute_point_features_with(points: &[GpsPoint], opts: PointFeatureOptions) -> Result<PointFeatureSeries> {
    if points.len() < 4 {
        return Err(Error::Invariant(format!(
            "point features need at least 4 fixes, got {}",
            points.len()
        )));
    }
    let dt: Vec<f64> = points
        .windows(2)
        .map(|w| (w[1].timestamp - w[0].timestamp).num_milliseconds() as f64 / 1000.0)
        .collect();
    if let Some(i) = dt.iter().position(|&d| d <= 0.0) {
        return Err(Error::Invariant(format!(
            "non-positive time gap between fixes {i} and {}",
            i + 1
        )));
    }

    let distance: Vec<f64> = points.windows(2).map(|w| haversine_distance(&w[0], &w[1])).collect();
    let speed: Vec<f64> = distance.iter().zip(&dt).map(|(d, t)| d / t).collect();
    let acceleration = forward_diff(&speed, &dt[1..]);
    let jerk = forward_diff(&acceleration, &dt[2..]);
    let bearing: Vec<f64> = points.windows(2).map(|w| initial_bearing(&w[0], &w[1])).collect();
    let bearing_rate_series: Vec<f64> = bearing
        .windows(2)
        .zip(&dt[1..])
        .map(|(w, &t)| bearing_rate(w[0], w[1], t, opts.wrap_bearing))
        .collect();
    let bearing_rate_rate_series: Vec<f64> = bearing_rate_series
        .windows(2)
        .zip(&dt[2..])
        .map(|(w, &t)| bearing_rate_rate(w[0], w[1], t))
        .collect();

    Ok(PointFeatureSeries {
        distance,
        speed,
        acceleration,
        jerk,
        bearing,
        bearing_rate: bearing_rate_series,
        bearing_rate_rate: bearing_rate_rate_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, NaiveDate};
    use std::sync::Arc;

    fn march(n: usize, step_deg: f64, dt_s: i64) -> Vec<GpsPoint> {
        let t0 = NaiveDate::from_ymd_opt(2008, 1, 1)
            .unwrap()
            .and_hms_opt(8, 0, 0)
            .unwrap();
        let user: Arc<str> = Arc::from("u");
        (0..n)
            .map(|i| {
                GpsPoint::new(
                    user.clone(),
                    0.0,
                    i as f64 * step_deg,
                    0.0,
                    t0 + Duration::seconds(i as i64 * dt_s),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn haversine_axis_values() {
        assert_eq!(haversine_m(10.0, 20.0, 10.0, 20.0), 0.0);
        // R * (pi / 180)
        let arc = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        assert!((haversine_m(0.0, 0.0, 0.0, 1.0) - arc).abs() < 1e-6);
        assert!((haversine_m(0.0, 0.0, 1.0, 0.0) - arc).abs() < 1e-6);
        assert!((haversine_m(0.0, 0.0, 0.0, 1.0) - 111_194.9).abs() < 0.1);
    }

    #[test]
    fn bearing_axis_values() {
        assert_eq!(bearing_deg(0.0, 0.0, 0.0, 1.0), 90.0);
        assert_eq!(bearing_deg(0.0, 0.0, 1.0, 0.0), 0.0);
        assert_eq!(bearing_deg(1.0, 0.0, 0.0, 0.0), 180.0);
        assert!((bearing_deg(0.0, 0.0, 0.0, -1.0) - 270.0).abs() < 1e-9);
        assert_eq!(bearing_deg(5.0, 5.0, 5.0, 5.0), 0.0);
    }

    #[test]
    fn bearing_rate_spot_values() {
        assert_eq!(bearing_rate(10.0, 40.0, 2.0, false), 15.0);
        assert_eq!(bearing_rate(350.0, 10.0, 1.0, false), -340.0);
        assert_eq!(bearing_rate(350.0, 10.0, 1.0, true), 20.0);
        assert_eq!(bearing_rate(10.0, 350.0, 1.0, true), -20.0);
        assert_eq!(bearing_rate_rate(15.0, 21.0, 3.0), 2.0);
    }

    #[test]
    fn constant_march_east() {
        let pts = march(10, 0.001, 1);
        let f = compute_point_features_with(&pts, PointFeatureOptions::default()).unwrap();
        let lens: Vec<_> = f.series().iter().map(|s| s.len()).collect();
        assert_eq!(lens, vec![9, 9, 8, 7, 9, 8, 7]);
        let v0 = f.speed[0];
        assert!(f.speed.iter().all(|&v| (v - v0).abs() < 1e-6));
        assert!(f.acceleration.iter().all(|&a| a.abs() < 1e-6));
        assert!(f.jerk.iter().all(|&j| j.abs() < 1e-6));
        assert!(f.bearing.iter().all(|&b| b == 90.0));
        assert!(f.bearing_rate.iter().all(|&b| b == 0.0));
        assert!(f.bearing_rate_rate.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn uses_later_time_gap() {
        // speeds 1/1, then same distance over 2 s: acceleration uses dt = 2
        let mut pts = march(4, 0.001, 1);
        for (i, p) in pts.iter_mut().enumerate().skip(2) {
            p.timestamp += Duration::seconds(i as i64 - 1);
        }
        let f = compute_point_features_with(&pts, PointFeatureOptions::default()).unwrap();
        let d = f.distance[0];
        assert!((f.speed[1] - d / 2.0).abs() < 1e-9);
        assert!((f.acceleration[0] - (d / 2.0 - d) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_points() {
        let mut pts = march(5, 0.0, 1);
        pts[3].longitude = 0.0;
        let f = compute_point_features_with(&pts, PointFeatureOptions::default()).unwrap();
        assert!(f.distance.iter().all(|&d| d == 0.0));
        assert!(f.bearing.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let pts = march(3, 0.001, 1);
        assert!(compute_point_features_with(&pts, PointFeatureOptions::default()).is_err());
        let mut pts = march(5, 0.001, 1);
        pts[2].timestamp = pts[1].timestamp;
        assert!(compute_point_features_with(&pts, PointFeatureOptions::default()).is_err());
    }
}
