//! Multidimensional projection with LAMP, a learned visual-quality metric and
//! automatic tuning of the min-max scaling applied before projecting.
//!
//! The pipeline: load a [`LabeledDataset`], scale it with [`minmax_scale`],
//! project it with [`lamp_project`], score it with [`score_projection`]
//! (silhouette, neighborhood preservation, silhouette ratio, combined by
//! [`MetricWeights`]), and let [`sweep`] pick the scale that scores best.
//! [`fit_weights`] learns the weights from graded projections.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod lamp;
pub mod linalg;
pub mod metrics;
pub mod render;
pub mod trainer;
pub mod tuner;

pub use dataset::{
    knn_indices, load_csv, minmax_scale, pairwise_distances, DistanceMatrix, LabelColumn,
    LabeledDataset, ScaleSpec,
};
pub use error::{Error, Result};
pub use lamp::{
    default_control_count, default_controls, lamp_project, project_at_scale,
    seed_control_projection, select_control_points, ControlPointSet, Projection2D,
    ProjectionConfig,
};
pub use linalg::{lu_solve, pca_top2, thin_svd_tall, LinearSystem3, Matrix};
pub use metrics::{
    combined_metric, neighborhood_preservation, score_projection, silhouette, silhouette_ratio,
    MetricVector, MetricWeights,
};
pub use render::{render_scatter, RenderSpec};
pub use trainer::{
    build_normal_system, evaluate, fit_weights, least_squares_weights, split_train_test,
    split_train_test_by_dataset, ErrorStats, GradedProjection,
};
pub use tuner::{best_scale, coarse_to_fine, sweep, uniform_scales, SweepConfig, SweepTable};
