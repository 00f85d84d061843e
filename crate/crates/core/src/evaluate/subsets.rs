//! Class subsets: which GeoLife modes take part in an experiment and how
//! they are merged.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Mode, TrajectorySample};
use crate::trajfeat::FeatureVector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSubsetConfig {
    pub name: String,
    /// Source mode to target class.
    #[serde(default)]
    pub merges: BTreeMap<String, String>,
    pub keep: Vec<String>,
    #[serde(default = "default_true")]
    pub drop_others: bool,
}

fn default_true() -> bool {
    true
}

pub const PRESET_NAMES: [&str; 6] = ["dabiri", "jiang", "xiao", "zheng", "endo", "all11"];

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn merges(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

impl ClassSubsetConfig {
    /// Built-in subsets. `driving` covers both car and taxi.
    pub fn preset(name: &str) -> Option<Self> {
        let (merge, keep): (&[(&str, &str)], &[&str]) = match name {
            "dabiri" => (
                &[("car", "driving"), ("taxi", "driving")],
                &["walk", "bike", "bus", "driving", "train"],
            ),
            "jiang" => (&[], &["bike", "car", "walk", "bus"]),
            "xiao" => (
                &[("bus", "bus&taxi"), ("taxi", "bus&taxi")],
                &["walk", "bus&taxi", "bike", "car", "subway", "train"],
            ),
            "zheng" => (
                &[("car", "driving"), ("taxi", "driving")],
                &["walk", "driving", "bus", "bike"],
            ),
            "endo" => (&[], &["walk", "car", "taxi", "bike", "subway", "bus", "train"]),
            "all11" => {
                let all: Vec<String> = Mode::ALL.iter().map(|m| m.to_string()).collect();
                return Some(ClassSubsetConfig {
                    name: name.into(),
                    merges: BTreeMap::new(),
                    keep: all,
                    drop_others: true,
                });
            }
            _ => return None,
        };
        Some(ClassSubsetConfig {
            name: name.into(),
            merges: merges(merge),
            keep: strings(keep),
            drop_others: true,
        })
    }

    /// A preset name, or a path to a JSON subset file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Some(p) = Self::preset(name_or_path) {
            return Ok(p);
        }
        let path = std::path::Path::new(name_or_path);
        if path.is_file() {
            return Self::from_json(&std::fs::read_to_string(path)?);
        }
        Err(Error::Config(format!(
            "unknown subset `{name_or_path}`; available: {}",
            PRESET_NAMES.join(", ")
        )))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ClassSubsetConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.keep.is_empty() {
            return Err(Error::Config(format!("subset `{}` keeps no classes", self.name)));
        }
        let mut seen = BTreeSet::new();
        for k in &self.keep {
            if !seen.insert(k) {
                return Err(Error::Config(format!("subset `{}` lists `{k}` twice", self.name)));
            }
        }
        for k in &self.keep {
            let merged_in = self.merges.values().any(|t| t == k);
            let direct = !self.merges.contains_key(k) && k.parse::<Mode>().is_ok();
            if !merged_in && !direct {
                return Err(Error::Config(format!(
                    "subset `{}`: class `{k}` receives no source mode",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Target class of `label`, or `None` when it is dropped.
    pub fn map_label(&self, label: &str) -> Option<String> {
        let target = self.merges.get(label).map_or(label, String::as_str);
        if self.keep.iter().any(|k| k == target) || !self.drop_others {
            Some(target.to_string())
        } else {
            None
        }
    }
}

/// Items carrying a class label.
pub trait Labeled {
    fn label(&self) -> &str;
    fn set_label(&mut self, label: String);
}

impl Labeled for TrajectorySample {
    fn label(&self) -> &str {
        self.mode()
    }
    fn set_label(&mut self, label: String) {
        self.set_mode(label);
    }
}

impl Labeled for FeatureVector {
    fn label(&self) -> &str {
        &self.label
    }
    fn set_label(&mut self, label: String) {
        self.label = label;
    }
}

/// Renames labels per `cfg.merges` and drops items outside `cfg.keep`.
pub fn map_classes<T: Labeled>(items: Vec<T>, cfg: &ClassSubsetConfig) -> Result<Vec<T>> {
    cfg.validate()?;
    Ok(items
        .into_iter()
        .filter_map(|mut item| {
            let target = cfg.map_label(item.label())?;
            item.set_label(target);
            Some(item)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct L(String);
    impl Labeled for L {
        fn label(&self) -> &str {
            &self.0
        }
        fn set_label(&mut self, label: String) {
            self.0 = label;
        }
    }

    fn run(cfg: &ClassSubsetConfig, labels: &[&str]) -> Vec<String> {
        let items = labels.iter().map(|s| L(s.to_string())).collect();
        map_classes(items, cfg).unwrap().into_iter().map(|l| l.0).collect()
    }

    #[test]
    fn zheng_merges_driving() {
        let cfg = ClassSubsetConfig::preset("zheng").unwrap();
        assert_eq!(
            run(
                &cfg,
                &["car", "taxi", "train", "subway", "walk", "airplane", "bus", "bike"]
            ),
            vec!["driving", "driving", "walk", "bus", "bike"]
        );
    }

    #[test]
    fn xiao_merges_bus_and_taxi() {
        let cfg = ClassSubsetConfig::preset("xiao").unwrap();
        assert_eq!(
            run(&cfg, &["bus", "taxi", "car", "boat"]),
            vec!["bus&taxi", "bus&taxi", "car"]
        );
    }

    #[test]
    fn identity_subset() {
        let cfg = ClassSubsetConfig::preset("all11").unwrap();
        let all: Vec<&str> = Mode::ALL.iter().map(|m| m.as_str()).collect();
        assert_eq!(run(&cfg, &all), all);
    }

    #[test]
    fn presets_are_valid() {
        for name in PRESET_NAMES {
            ClassSubsetConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(ClassSubsetConfig::preset("nope").is_none());
        let err = ClassSubsetConfig::resolve("nope").unwrap_err().to_string();
        assert!(err.contains("zheng") && err.contains("all11"));
    }

    #[test]
    fn invalid_configs() {
        let dup = r#"{"name":"x","keep":["walk","walk"]}"#;
        assert!(ClassSubsetConfig::from_json(dup).is_err());
        let orphan = r#"{"name":"x","keep":["flying"]}"#;
        assert!(ClassSubsetConfig::from_json(orphan).is_err());
        let ok = r#"{"name":"x","merges":{"run":"flying"},"keep":["flying"]}"#;
        assert!(ClassSubsetConfig::from_json(ok).is_ok());
        let merged_away = r#"{"name":"x","merges":{"car":"driving"},"keep":["car"]}"#;
        assert!(ClassSubsetConfig::from_json(merged_away).is_err());
    }

    #[test]
    fn keep_others_when_not_dropping() {
        let cfg = ClassSubsetConfig {
            name: "x".into(),
            merges: merges(&[("car", "driving")]),
            keep: strings(&["driving"]),
            drop_others: false,
        };
        assert_eq!(run(&cfg, &["car", "boat"]), vec!["driving", "boat"]);
    }
}
