//! Metrics, point-biserial feature correlation, k-means reason clustering
//! with elbow selection, reason distribution tables, and attention-report
//! rendering.

mod correlation;
mod distribution;
mod kmeans;
mod metrics;
mod report;

use std::path::PathBuf;

use thiserror::Error;

use crate::models::ModelError;

pub use correlation::{correlate_features, correlation_to_csv, point_biserial, CorrelationReport};
pub use distribution::{
    distribution_to_csv, reason_distribution, DistributionRow, DistributionTable, GroupBy,
};
pub use kmeans::{
    cluster_reason_texts, elbow_select, kmeans, ClusterReport, ElbowChoice, KmeansResult,
};
pub use metrics::{precision_recall_f1, report_to_csv, ClassMetrics, EvaluationReport};
pub use report::{render_attention_report, ExplainedModel};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("malformed confusion matrix: {0}")]
    BadConfusion(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
