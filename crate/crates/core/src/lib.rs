//! Inference, editing, metrics, correlation and edit history for
//! piecewise-constant generalized additive models.

pub mod correlation;
pub mod data;
pub mod edit;
pub mod history;
pub mod interop;
pub mod isotonic;
pub mod metrics;
pub mod model;

pub use data::{Column, Dataset, EncodedDataset};
pub use edit::{EditDescriptor, EditError, Region, Selection, Target, Tool, ToolName};
pub use history::{Commit, HistoryError, Session};
pub use metrics::{Baseline, MetricReport, ScopeSpec};
pub use model::{FeatureKind, FeatureValue, GamModel, ModelError, Sample, Shape, Task};
