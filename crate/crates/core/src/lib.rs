//! Transportation-mode prediction from GPS trajectories.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`ingest`] parses GeoLife `.plt` logs and `labels.txt` files and groups
//!    labeled fixes into [`TrajectorySample`]s keyed by user, day and mode.
//! 2. [`pointfeat`] derives distance, speed, acceleration, jerk, bearing,
//!    bearing rate and rate of bearing rate between consecutive fixes.
//! 3. [`trajfeat`] reduces those seven series to a 70-value feature vector.
//! 4. [`denoise`] masks samples whose mean speed is a median-filter outlier.
//! 5. [`normalize`] applies min-max scaling.
//!
//! [`classify`] holds the decision tree, random forest and Gaussian naive
//! Bayes learners, [`evaluate`] the cross-validation harness, and
//! [`synthgen`] a seeded trajectory generator used by tests and demos.

pub mod classify;
pub mod denoise;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod normalize;
pub mod pointfeat;
pub mod synthgen;
pub mod trajfeat;

pub use error::{Error, Result};
pub use ingest::{GpsPoint, LabelInterval, Mode, TrajectorySample};
pub use pointfeat::PointFeatureSeries;
pub use trajfeat::{FeatureMatrix, FeatureVector, SampleRef};
