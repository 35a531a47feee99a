//! Clustering of multi-instrument Likert survey respondents.
//!
//! The pipeline runs in this order: [`survey`] parses responses and sums
//! subscale scores, [`preprocess`] standardizes the chosen features, [`pca`]
//! reduces them, [`kmeans`] clusters the projection (with K picked by the
//! elbow of [`evaluate::sweep`] unless fixed), [`evaluate::silhouette`] scores
//! the partition and [`profile`] builds the per-cluster tables. [`pipeline`]
//! ties the stages together behind a JSON config.

pub mod error;
pub mod evaluate;
pub mod kmeans;
pub mod matrix;
pub mod pca;
pub mod pipeline;
pub mod preprocess;
pub mod profile;
pub mod survey;

pub use error::{Error, ErrorKind, Result};
pub use evaluate::{DistortionCurve, SilhouetteReport};
pub use kmeans::{ClusteringResult, KMeansParams};
pub use matrix::FeatureMatrix;
pub use pca::{ComponentSelection, PcaModel};
pub use pipeline::{FeatureMode, PipelineConfig};
pub use preprocess::{ScalerKind, ScalerModel};
pub use profile::{ClusterProfile, Report};
pub use survey::{LikertMatrix, ScaleDefinition, ScoreMatrix, Subscale};
