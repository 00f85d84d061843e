//! Decision tree, random forest and Gaussian naive Bayes classifiers.
//!
//! Labels are encoded against a class vocabulary; every argmax tie resolves
//! to the earliest class in that vocabulary.

mod bayes;
mod forest;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::MinMaxParams;

pub use bayes::GaussianNb;
pub use forest::{RandomForest, TreeSeed};
pub use tree::{DecisionTree, MaxFeatures, Node};

use tree::GrowParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Depth limit of the standalone decision tree.
    pub max_depth: usize,
    /// Depth limit of forest trees; `None` grows until pure.
    pub forest_max_depth: Option<usize>,
    pub n_trees: usize,
    pub rng_seed: u64,
    pub min_samples_split: usize,
    pub features_per_split: MaxFeatures,
    pub bootstrap: bool,
    /// Variance floor as a fraction of the largest column variance.
    pub gnb_var_smoothing: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_depth: 5,
            forest_max_depth: None,
            n_trees: 50,
            rng_seed: 0,
            min_samples_split: 2,
            features_per_split: MaxFeatures::Sqrt,
            bootstrap: true,
            gnb_var_smoothing: 1e-9,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.forest_max_depth == Some(0) {
            return Err(Error::Config("forest_max_depth must be at least 1".into()));
        }
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.gnb_var_smoothing.is_nan() || self.gnb_var_smoothing <= 0.0 {
            return Err(Error::Config("gnb_var_smoothing must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    GaussianNb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::GaussianNb,
    ];

    /// Short name used in reports and on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::GaussianNb => "NB",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dt" | "decision_tree" | "tree" => Ok(ClassifierKind::DecisionTree),
            "rf" | "random_forest" | "forest" => Ok(ClassifierKind::RandomForest),
            "nb" | "gnb" | "gaussian_nb" | "naive_bayes" => Ok(ClassifierKind::GaussianNb),
            other => Err(Error::Config(format!(
                "unknown classifier `{other}` (expected dt, rf or nb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    GaussianNb(GaussianNb),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub class_vocabulary: Vec<String>,
    pub n_features: usize,
    pub model: ModelKind,
}

/// Sorted distinct labels and each label's index in that list.
pub fn encode_labels(y: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut vocab: Vec<String> = y.to_vec();
    vocab.sort();
    vocab.dedup();
    let idx = y
        .iter()
        .map(|l| vocab.binary_search(l).expect("label is in vocabulary"))
        .collect();
    (vocab, idx)
}

fn check_training(x: &[Vec<f64>], y_len: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.len() != y_len {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y_len,
        });
    }
    let d = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::Layout {
            expected: d,
            found: r.len(),
        });
    }
    Ok(d)
}

impl ClassifierModel {
    /// Trains on encoded labels; `vocab` fixes the class order and may list
    /// classes absent from `y`.
    pub fn fit_encoded(
        kind: ClassifierKind,
        x: &[Vec<f64>],
        y: &[usize],
        vocab: &[String],
        cfg: &TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let n_features = check_training(x, y.len())?;
        let n_classes = vocab.len();
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::UnknownClass(format!("class index {bad}")));
        }
        let model = match kind {
            ClassifierKind::DecisionTree => {
                let params = GrowParams {
                    max_depth: Some(cfg.max_depth),
                    min_samples_split: cfg.min_samples_split,
                    max_features: MaxFeatures::All,
                };
                ModelKind::DecisionTree(DecisionTree::grow(
                    x,
                    y,
                    n_classes,
                    (0..x.len()).collect(),
                    params,
                    None,
                ))
            }
            ClassifierKind::RandomForest => {
                let params = GrowParams {
                    max_depth: cfg.forest_max_depth,
                    min_samples_split: cfg.min_samples_split,
                    max_features: cfg.features_per_split,
                };
                ModelKind::RandomForest(RandomForest::fit(
                    x,
                    y,
                    n_classes,
                    cfg.n_trees,
                    cfg.rng_seed,
                    cfg.bootstrap,
                    params,
                ))
            }
            ClassifierKind::GaussianNb => {
                let nb = GaussianNb::fit(x, y, n_classes, cfg.gnb_var_smoothing)
                    .map_err(|c| Error::Config(format!("class `{}` has no training rows", vocab[c])))?;
                ModelKind::GaussianNb(nb)
            }
        };
        Ok(ClassifierModel {
            class_vocabulary: vocab.to_vec(),
            n_features,
            model,
        })
    }

    pub fn fit(kind: ClassifierKind, x: &[Vec<f64>], y: &[String], cfg: &TrainConfig) -> Result<Self> {
        check_training(x, y.len())?;
        let (vocab, idx) = encode_labels(y);
        Self::fit_encoded(kind, x, &idx, &vocab, cfg)
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            ModelKind::DecisionTree(_) => ClassifierKind::DecisionTree,
            ModelKind::RandomForest(_) => ClassifierKind::RandomForest,
            ModelKind::GaussianNb(_) => ClassifierKind::GaussianNb,
        }
    }

    pub fn predict_indices(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        if let Some(r) = x.iter().find(|r| r.len() != self.n_features) {
            return Err(Error::Layout {
                expected: self.n_features,
                found: r.len(),
            });
        }
        Ok(x.iter()
            .map(|row| match &self.model {
                ModelKind::DecisionTree(t) => t.predict_row(row),
                ModelKind::RandomForest(f) => f.predict_row(row),
                ModelKind::GaussianNb(nb) => nb.predict_row(row),
            })
            .collect())
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<String>> {
        Ok(self
            .predict_indices(x)?
            .into_iter()
            .map(|i| self.class_vocabulary[i].clone())
            .collect())
    }

    fn validate(&self) -> Result<(), String> {
        let k = self.class_vocabulary.len();
        if k == 0 {
            return Err("empty class vocabulary".into());
        }
        let check_tree = |t: &DecisionTree| -> Result<(), String> {
            if t.n_classes != k || t.n_features != self.n_features {
                return Err("tree dimensions do not match the model".into());
            }
            t.validate()
        };
        match &self.model {
            ModelKind::DecisionTree(t) => check_tree(t),
            ModelKind::RandomForest(f) => {
                if f.trees.is_empty() || f.trees.len() != f.seeds.len() || f.n_classes != k {
                    return Err("forest trees, seeds and classes disagree".into());
                }
                f.trees.iter().try_for_each(check_tree)
            }
            ModelKind::GaussianNb(nb) => {
                if nb.priors.len() != k {
                    return Err("naive Bayes class count does not match vocabulary".into());
                }
                nb.validate(self.n_features)
            }
        }
    }
}

pub const MODEL_FORMAT: &str = "trajmode-model";
pub const MODEL_VERSION: u32 = 1;

/// Versioned JSON document holding a trained model and the scaling it was
/// trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub normalization: Option<MinMaxParams>,
    pub model: ClassifierModel,
}

impl ModelDocument {
    pub fn new(model: ClassifierModel, normalization: Option<MinMaxParams>) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            normalization,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Decodes and structurally validates a model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        doc.model.validate().map_err(Error::Config)?;
        if let Some(p) = &doc.normalization {
            if p.n_columns() != doc.model.n_features || p.max.len() != p.min.len() {
                return Err(Error::Config("normalization width does not match the model".into()));
            }
        }
        Ok(doc)
    }
}

/// Anything that can label feature rows by class index.
pub trait Predictor: Send + Sync {
    fn predict_indices(&self, x: &[Vec<f64>]) -> Result<Vec<usize>>;
}

impl Predictor for ClassifierModel {
    fn predict_indices(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        ClassifierModel::predict_indices(self, x)
    }
}

/// A trainable classifier the evaluation harness can run.
pub trait Learner: Send + Sync {
    fn name(&self) -> String;
    fn fit(&self, x: &[Vec<f64>], y: &[usize], vocab: &[String], seed: u64) -> Result<Box<dyn Predictor>>;
}

/// One of the built-in classifiers with its training configuration.
#[derive(Debug, Clone)]
pub struct BuiltinLearner {
    pub kind: ClassifierKind,
    pub config: TrainConfig,
}

impl BuiltinLearner {
    pub fn new(kind: ClassifierKind) -> Self {
        BuiltinLearner {
            kind,
            config: TrainConfig::default(),
        }
    }
}

impl Learner for BuiltinLearner {
    fn name(&self) -> String {
        self.kind.short_name().to_string()
    }

    fn fit(&self, x: &[Vec<f64>], y: &[usize], vocab: &[String], seed: u64) -> Result<Box<dyn Predictor>> {
        let cfg = TrainConfig {
            rng_seed: seed,
            ..self.config.clone()
        };
        Ok(Box::new(ClassifierModel::fit_encoded(self.kind, x, y, vocab, &cfg)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    fn xor(reps: usize) -> (Vec<Vec<f64>>, Vec<String>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..reps {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                x.push(vec![a, b]);
                y.push(if (a == 1.0) ^ (b == 1.0) { "b" } else { "a" }.to_string());
            }
        }
        (x, y)
    }

    fn accuracy(a: &[String], b: &[String]) -> f64 {
        a.iter().zip(b).filter(|(p, q)| p == q).count() as f64 / a.len() as f64
    }

    #[test]
    fn tree_separable_1d() {
        let x = col(&[0.0, 1.0, 10.0, 11.0]);
        let y = labels(&["a", "a", "b", "b"]);
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &TrainConfig::default()).unwrap();
        let ModelKind::DecisionTree(t) = &m.model else { panic!() };
        match &t.nodes[0] {
            Node::Split { column, threshold, .. } => {
                assert_eq!(*column, 0);
                assert!(*threshold > 1.0 && *threshold < 10.0);
            }
            _ => panic!("expected a root split"),
        }
        assert_eq!(t.depth(), 1);
        assert_eq!(m.predict(&x).unwrap(), y);
        assert!(m.predict(&[]).unwrap().is_empty());
    }

    #[test]
    fn tree_single_class() {
        let x = col(&[0.0, 1.0, 2.0]);
        let y = labels(&["walk", "walk", "walk"]);
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &TrainConfig::default()).unwrap();
        let ModelKind::DecisionTree(t) = &m.model else { panic!() };
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(m.predict(&col(&[100.0])).unwrap(), labels(&["walk"]));
    }

    #[test]
    fn tree_xor_depths() {
        let (x, y) = xor(5);
        let deep = TrainConfig {
            max_depth: 2,
            ..Default::default()
        };
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &deep).unwrap();
        assert_eq!(accuracy(&m.predict(&x).unwrap(), &y), 1.0);
        let shallow = TrainConfig {
            max_depth: 1,
            ..Default::default()
        };
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &shallow).unwrap();
        assert!(accuracy(&m.predict(&x).unwrap(), &y) <= 0.75);
    }

    #[test]
    fn xor_depth_one_brute_force() {
        // every axis-aligned stump on XOR data, with any leaf labelling
        let (x, y) = xor(1);
        let mut best = 0.0f64;
        for col in 0..2 {
            for thr in [-0.5, 0.5, 1.5] {
                for (l, r) in [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")] {
                    let pred: Vec<String> = x
                        .iter()
                        .map(|row| if row[col] <= thr { l } else { r }.to_string())
                        .collect();
                    best = best.max(accuracy(&pred, &y));
                }
            }
        }
        assert!(best <= 0.75);
    }

    #[test]
    fn tie_breaks_to_lowest_column_and_threshold() {
        // both columns separate perfectly; column 0 must win
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let y = labels(&["a", "a", "b", "b"]);
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &TrainConfig::default()).unwrap();
        let ModelKind::DecisionTree(t) = &m.model else { panic!() };
        assert!(matches!(t.nodes[0], Node::Split { column: 0, threshold, .. } if threshold == 1.5));
    }

    #[test]
    fn errors() {
        let cfg = TrainConfig::default();
        assert!(ClassifierModel::fit(ClassifierKind::DecisionTree, &[], &[], &cfg).is_err());
        assert!(ClassifierModel::fit(ClassifierKind::DecisionTree, &col(&[1.0]), &labels(&["a", "b"]), &cfg).is_err());
        let m = ClassifierModel::fit(
            ClassifierKind::GaussianNb,
            &col(&[1.0, 2.0]),
            &labels(&["a", "b"]),
            &cfg,
        )
        .unwrap();
        assert!(matches!(m.predict(&[vec![1.0, 2.0]]), Err(Error::Layout { .. })));
        // vocabulary class with no rows
        let vocab = labels(&["a", "b", "c"]);
        assert!(
            ClassifierModel::fit_encoded(ClassifierKind::GaussianNb, &col(&[1.0, 2.0]), &[0, 1], &vocab, &cfg).is_err()
        );
        let bad = TrainConfig {
            n_trees: 0,
            ..Default::default()
        };
        assert!(ClassifierModel::fit(
            ClassifierKind::RandomForest,
            &col(&[1.0, 2.0]),
            &labels(&["a", "b"]),
            &bad
        )
        .is_err());
    }

    #[test]
    fn gnb_midpoint_boundary() {
        let x = col(&[-2.0, -1.0, 0.0, 0.0, 1.0, 2.0]);
        let y = labels(&["a", "a", "a", "b", "b", "b"]);
        let m = ClassifierModel::fit(ClassifierKind::GaussianNb, &x, &y, &TrainConfig::default()).unwrap();
        assert_eq!(
            m.predict(&col(&[-0.01, 0.01, -5.0, 5.0])).unwrap(),
            labels(&["a", "b", "a", "b"])
        );
    }

    #[test]
    fn gnb_single_row_per_class() {
        let x = vec![vec![0.0, 0.0], vec![10.0, 4.0]];
        let y = labels(&["a", "b"]);
        let m = ClassifierModel::fit(ClassifierKind::GaussianNb, &x, &y, &TrainConfig::default()).unwrap();
        let ModelKind::GaussianNb(nb) = &m.model else { panic!() };
        assert!(nb.variances.iter().flatten().all(|&v| v == nb.epsilon));
        assert_eq!(
            m.predict(&[vec![4.0, 1.0], vec![6.0, 3.0]]).unwrap(),
            labels(&["a", "b"])
        );
    }

    #[test]
    fn gnb_duplicate_rows_same_model() {
        let x = vec![
            vec![0.1, 3.0],
            vec![0.7, 2.0],
            vec![0.2, 9.0],
            vec![5.0, 1.0],
            vec![6.5, 0.5],
        ];
        let y = labels(&["a", "a", "b", "b", "b"]);
        let cfg = TrainConfig::default();
        let m1 = ClassifierModel::fit(ClassifierKind::GaussianNb, &x, &y, &cfg).unwrap();
        let x2: Vec<_> = x.iter().chain(&x).cloned().collect();
        let y2: Vec<_> = y.iter().chain(&y).cloned().collect();
        let m2 = ClassifierModel::fit(ClassifierKind::GaussianNb, &x2, &y2, &cfg).unwrap();
        let (ModelKind::GaussianNb(a), ModelKind::GaussianNb(b)) = (&m1.model, &m2.model) else {
            panic!()
        };
        let close = |p: &[f64], q: &[f64]| p.iter().zip(q).all(|(u, v)| (u - v).abs() <= 1e-12 * u.abs().max(1.0));
        assert!(close(&a.priors, &b.priors));
        for c in 0..2 {
            assert!(close(&a.means[c], &b.means[c]));
            assert!(close(&a.variances[c], &b.variances[c]));
        }
    }

    #[test]
    fn forest_reduces_to_tree() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 7 % 13) as f64, (i * 5 % 11) as f64, i as f64 % 3.0])
            .collect();
        let y: Vec<String> = (0..40)
            .map(|i| ["a", "b", "c"][(i * 7 % 13 + i % 3) % 3].to_string())
            .collect();
        let dt = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &TrainConfig::default()).unwrap();
        let cfg = TrainConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: MaxFeatures::All,
            forest_max_depth: Some(5),
            ..Default::default()
        };
        let rf = ClassifierModel::fit(ClassifierKind::RandomForest, &x, &y, &cfg).unwrap();
        let (ModelKind::DecisionTree(t), ModelKind::RandomForest(f)) = (&dt.model, &rf.model) else {
            panic!()
        };
        assert_eq!(&f.trees[0], t);
        assert_eq!(dt.predict(&x).unwrap(), rf.predict(&x).unwrap());
    }

    #[test]
    fn forest_is_deterministic() {
        let (x, y) = xor(10);
        let cfg = TrainConfig {
            rng_seed: 99,
            n_trees: 20,
            ..Default::default()
        };
        let a = ClassifierModel::fit(ClassifierKind::RandomForest, &x, &y, &cfg).unwrap();
        let b = ClassifierModel::fit(ClassifierKind::RandomForest, &x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        let ModelKind::RandomForest(f) = &a.model else { panic!() };
        assert_eq!(f.trees.len(), 20);
        assert_eq!(f.seeds[3], TreeSeed { seed: 99, stream: 3 });
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(70), 9);
        assert_eq!(MaxFeatures::All.resolve(70), 70);
        assert_eq!(MaxFeatures::Count(100).resolve(70), 70);
        assert_eq!(MaxFeatures::Count(0).resolve(70), 1);
    }

    #[test]
    fn model_document_roundtrip_and_validation() {
        let (x, y) = xor(3);
        for kind in ClassifierKind::ALL {
            let m = ClassifierModel::fit(
                kind,
                &x,
                &y,
                &TrainConfig {
                    n_trees: 3,
                    ..Default::default()
                },
            )
            .unwrap();
            let doc = ModelDocument::new(m, None);
            let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
            assert_eq!(back, doc);
        }
        let m = ClassifierModel::fit(ClassifierKind::DecisionTree, &x, &y, &TrainConfig::default()).unwrap();
        let mut doc = ModelDocument::new(m, None);
        if let ModelKind::DecisionTree(t) = &mut doc.model.model {
            if let Node::Split { left, .. } = &mut t.nodes[0] {
                *left = 0;
            }
        }
        assert!(ModelDocument::from_json(&doc.to_json().unwrap()).is_err());
        assert!(ModelDocument::from_json("{}").is_err());
    }

    #[test]
    fn classifier_names() {
        assert_eq!("RF".parse::<ClassifierKind>().unwrap(), ClassifierKind::RandomForest);
        assert_eq!("nb".parse::<ClassifierKind>().unwrap(), ClassifierKind::GaussianNb);
        assert!("qda".parse::<ClassifierKind>().is_err());
    }
}
