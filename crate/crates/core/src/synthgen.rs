//! Seeded synthetic trajectories with mode-specific speed profiles, plus a
//! corruption pass that teleports fixes to create noisy samples.
//!
//! Every sample draws from its own ChaCha8 stream, so output depends only on
//! the profiles and the seed.

use std::sync::Arc;

use chrono::{Duration, NaiveDate};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{GpsPoint, TrajectorySample, MISSING_ALTITUDE};
use crate::pointfeat::EARTH_RADIUS_M;

pub const ORIGIN: (f64, f64) = (39.9, 116.4);
const ORIGIN_JITTER_DEG: f64 = 0.05;
const MIN_SPEED: f64 = 0.1;
const CORRUPT_POINT_SHARE: f64 = 0.2;
const JUMP_DEG: (f64, f64) = (0.05, 0.2);
/// Stream offset separating corruption streams from generation streams.
const CORRUPT_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub mode: String,
    /// m/s
    pub speed_mean: f64,
    /// m/s
    pub speed_sd: f64,
    /// Standard deviation of the per-step heading change, degrees.
    pub heading_volatility: f64,
    pub points_per_sample: usize,
    pub samples: usize,
}

impl ModeProfile {
    pub fn new(mode: &str, speed_mean: f64, speed_sd: f64, heading_volatility: f64) -> Self {
        ModeProfile {
            mode: mode.to_string(),
            speed_mean,
            speed_sd,
            heading_volatility,
            points_per_sample: 60,
            samples: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("profile `{}`: {m}", self.mode)));
        if !(self.speed_mean > 0.0 && self.speed_mean.is_finite()) {
            return bad(format!("speed_mean must be positive, got {}", self.speed_mean));
        }
        if !(self.speed_sd >= 0.0 && self.speed_sd.is_finite()) {
            return bad(format!("speed_sd must be non-negative, got {}", self.speed_sd));
        }
        if !(self.heading_volatility >= 0.0 && self.heading_volatility.is_finite()) {
            return bad("heading_volatility must be non-negative".into());
        }
        if self.points_per_sample < 10 {
            return bad(format!(
                "points_per_sample must be at least 10, got {}",
                self.points_per_sample
            ));
        }
        // one sample per day, starting no later than 18:00
        if self.points_per_sample > 6 * 3600 {
            return bad("points_per_sample must fit in one day".into());
        }
        Ok(())
    }
}

/// Walk, bike, bus and car; 200 samples of 60 fixes each.
pub fn default_profiles() -> Vec<ModeProfile> {
    vec![
        ModeProfile::new("walk", 1.4, 0.3, 15.0),
        ModeProfile::new("bike", 4.0, 1.0, 8.0),
        ModeProfile::new("bus", 8.0, 3.0, 5.0),
        ModeProfile::new("car", 15.0, 5.0, 4.0),
    ]
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates samples profile by profile. Profile `i` is user `{i:03}`; its
/// `j`-th sample lies on day `j` after 2008-01-01, starting between 08:00 and
/// 18:00, with one fix per second.
pub fn generate(profiles: &[ModeProfile], seed: u64) -> Result<Vec<TrajectorySample>> {
    for p in profiles {
        p.validate()?;
    }
    let base = NaiveDate::from_ymd_opt(2008, 1, 1).expect("valid date");
    let mut out = Vec::new();
    let mut stream = 0u64;
    for (pi, profile) in profiles.iter().enumerate() {
        let user: Arc<str> = Arc::from(format!("{pi:03}"));
        let speed = Normal::new(profile.speed_mean, profile.speed_sd).map_err(|e| Error::Config(e.to_string()))?;
        let turn = Normal::new(0.0, profile.heading_volatility).map_err(|e| Error::Config(e.to_string()))?;
        for si in 0..profile.samples {
            let mut rng = stream_rng(seed, stream);
            stream += 1;
            let day = base + Duration::days(si as i64);
            let start =
                day.and_hms_opt(8, 0, 0).expect("valid time") + Duration::seconds(rng.random_range(0..10 * 3600));
            let mut lat = ORIGIN.0 + rng.random_range(-ORIGIN_JITTER_DEG..ORIGIN_JITTER_DEG);
            let mut lon = ORIGIN.1 + rng.random_range(-ORIGIN_JITTER_DEG..ORIGIN_JITTER_DEG);
            let mut heading: f64 = rng.random_range(0.0..360.0);
            let mut points = Vec::with_capacity(profile.points_per_sample);
            for i in 0..profile.points_per_sample {
                points.push(
                    GpsPoint::new(
                        user.clone(),
                        lat,
                        lon,
                        MISSING_ALTITUDE,
                        start + Duration::seconds(i as i64),
                    )
                    .map_err(Error::Invariant)?,
                );
                let v = speed.sample(&mut rng).max(MIN_SPEED);
                let h = heading.to_radians();
                // local equirectangular step, dt = 1 s
                lat += (v * h.cos() / EARTH_RADIUS_M).to_degrees();
                lon += (v * h.sin() / (EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees();
                if profile.heading_volatility > 0.0 {
                    heading = (heading + turn.sample(&mut rng)).rem_euclid(360.0);
                }
            }
            out.push(TrajectorySample::new(profile.mode.clone(), points)?);
        }
    }
    Ok(out)
}

/// Teleports a share of the fixes in `round(fraction * n)` samples by
/// 0.05°–0.2° in a random direction. Returns the samples, in the original
/// order with labels unchanged, and the sorted indices of those corrupted.
pub fn corrupt(
    samples: Vec<TrajectorySample>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<TrajectorySample>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config(format!(
            "corruption fraction must be in [0, 1], got {fraction}"
        )));
    }
    let n = samples.len();
    let count = ((fraction * n as f64).round() as usize).min(n);
    let mut chosen = sample(&mut stream_rng(seed, CORRUPT_STREAM_BASE), n, count).into_vec();
    chosen.sort_unstable();

    let mut out = samples;
    for &si in &chosen {
        let mut rng = stream_rng(seed, CORRUPT_STREAM_BASE + 1 + si as u64);
        let s = &out[si];
        let len = s.len();
        let moved = ((CORRUPT_POINT_SHARE * len as f64).round() as usize).clamp(1, len);
        let mode = s.mode().to_string();
        let mut points = s.points().to_vec();
        for pi in sample(&mut rng, len, moved).into_vec() {
            let mag = rng.random_range(JUMP_DEG.0..=JUMP_DEG.1);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let p = &mut points[pi];
            p.latitude = (p.latitude + mag * angle.cos()).clamp(-90.0, 90.0);
            p.longitude = (p.longitude + mag * angle.sin() + 180.0).rem_euclid(360.0) - 180.0;
        }
        out[si] = TrajectorySample::new(mode, points)?;
    }
    Ok((out, chosen))
}
