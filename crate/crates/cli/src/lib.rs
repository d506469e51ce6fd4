//! Library side of the `gridnet` command: the analysis pipeline, the
//! serialised bundle and the report writers.

pub mod bundle;
pub mod pipeline;
pub mod report;

pub use bundle::AnalysisBundle;
pub use pipeline::{analyze_graph, analyze_path, AnalyzeError, AnalyzeOptions};
