//! GeoLife directory layout: `Data/<user>/Trajectory/*.plt` plus
//! `Data/<user>/labels.txt`.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use super::{assemble_samples, parse_labels, parse_plt, ParsePolicy, TrajectorySample};
use crate::error::{Error, RecordError, Result};

#[derive(Debug, Default)]
pub struct UserLoad {
    pub user_id: String,
    /// Assembled samples, before any minimum-size filtering.
    pub samples: Vec<TrajectorySample>,
    pub points_read: usize,
    pub skipped: Vec<(PathBuf, RecordError)>,
}

#[derive(Debug, Default)]
pub struct GeolifeLoad {
    pub users: usize,
    pub points_read: usize,
    pub samples: Vec<TrajectorySample>,
    pub skipped: Vec<(PathBuf, RecordError)>,
}

fn in_file(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    }
}

/// Loads one user directory. Users without a `labels.txt` yield no samples.
pub fn load_user(user_dir: &Path, user_id: &str, policy: ParsePolicy) -> Result<UserLoad> {
    let mut load = UserLoad {
        user_id: user_id.to_string(),
        ..Default::default()
    };
    let labels_path = user_dir.join("labels.txt");
    if !labels_path.is_file() {
        return Ok(load);
    }
    let text = fs::read_to_string(&labels_path).map_err(|e| in_file(&labels_path)(e.into()))?;
    let labels = parse_labels(&text, policy).map_err(in_file(&labels_path))?;
    load.skipped
        .extend(labels.skipped.into_iter().map(|e| (labels_path.clone(), e)));

    let traj_dir = user_dir.join("Trajectory");
    let mut files: Vec<PathBuf> = match fs::read_dir(&traj_dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("plt")))
            .collect(),
        Err(_) => Vec::new(),
    };
    files.sort();

    let mut points = Vec::new();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|e| in_file(&path)(e.into()))?;
        let parsed = parse_plt(&text, user_id, policy).map_err(in_file(&path))?;
        load.skipped
            .extend(parsed.skipped.into_iter().map(|e| (path.clone(), e)));
        points.extend(parsed.items);
    }
    load.points_read = points.len();
    load.samples = assemble_samples(points, &labels.items);
    Ok(load)
}

/// Loads every user under `root` (either the dataset root containing `Data/`
/// or the `Data/` directory itself). Users are processed in parallel and the
/// result is ordered by user id.
pub fn load_geolife(root: &Path, policy: ParsePolicy) -> Result<GeolifeLoad> {
    let data = if root.join("Data").is_dir() {
        root.join("Data")
    } else {
        root.to_path_buf()
    };
    let mut users: Vec<(String, PathBuf)> = fs::read_dir(&data)
        .map_err(|e| in_file(&data)(e.into()))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.path()))
        .collect();
    if users.is_empty() {
        return Err(Error::Empty("no user directories found"));
    }
    users.sort();

    let loads: Vec<UserLoad> = users
        .par_iter()
        .map(|(id, dir)| load_user(dir, id, policy))
        .collect::<Result<_>>()?;

    let mut out = GeolifeLoad {
        users: loads.len(),
        ..Default::default()
    };
    for l in loads {
        out.points_read += l.points_read;
        out.samples.extend(l.samples);
        out.skipped.extend(l.skipped);
    }
    Ok(out)
}

fn serial_date(ts: chrono::NaiveDateTime) -> f64 {
    let epoch = NaiveDate::from_ymd_opt(1899, 12, 30)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    (ts - epoch).num_seconds() as f64 / 86_400.0
}

/// Writes samples in GeoLife layout under `root/Data`: one `.plt` per sample
/// and one `labels.txt` per user with an interval spanning each sample.
pub fn emit_geolife(samples: &[TrajectorySample], root: &Path) -> Result<()> {
    let mut by_user: BTreeMap<&str, Vec<&TrajectorySample>> = BTreeMap::new();
    for s in samples {
        by_user.entry(s.user_id()).or_default().push(s);
    }
    for (user, mut list) in by_user {
        list.sort_by_key(|s| s.points()[0].timestamp);
        let user_dir = root.join("Data").join(user);
        let traj_dir = user_dir.join("Trajectory");
        fs::create_dir_all(&traj_dir)?;

        let mut labels = String::from("Start Time\tEnd Time\tTransportation Mode\n");
        let mut names = HashSet::new();
        for s in list {
            let first = &s.points()[0];
            let last = &s.points()[s.len() - 1];
            let _ = writeln!(
                labels,
                "{}\t{}\t{}",
                first.timestamp.format(super::LABEL_DATETIME_FORMAT),
                last.timestamp.format(super::LABEL_DATETIME_FORMAT),
                s.mode()
            );

            let stem = first.timestamp.format("%Y%m%d%H%M%S").to_string();
            let mut name = format!("{stem}.plt");
            let mut n = 1;
            while !names.insert(name.clone()) {
                name = format!("{stem}_{n}.plt");
                n += 1;
            }
            let mut plt = String::from(
                "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n",
            );
            for p in s.points() {
                let _ = writeln!(
                    plt,
                    "{},{},0,{},{:.10},{},{}",
                    p.latitude,
                    p.longitude,
                    p.altitude,
                    serial_date(p.timestamp),
                    p.timestamp.format(super::PLT_DATE_FORMAT),
                    p.timestamp.format(super::PLT_TIME_FORMAT),
                );
            }
            fs::write(traj_dir.join(name), plt)?;
        }
        fs::write(user_dir.join("labels.txt"), labels)?;
    }
    Ok(())
}
