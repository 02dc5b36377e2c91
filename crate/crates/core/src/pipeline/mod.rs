//! Training, evaluation and extension drivers.

pub mod analysis;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod extend;
pub mod latency;
pub mod train;

pub use analysis::{analyze_telephone, narrowband_from_wide, FrameAnalysis, FrameTargets, TelephoneAnalysis};
pub use config::PipelineConfig;
pub use corpus::{list_wavs, CorpusFrontend, PairedFrame};
pub use eval::{evaluate, EvalReport, FrameScore, HighSource};
pub use extend::{extend_file, ExtendedBands, Extender};
pub use latency::{LatencyBudget, Stage};
pub use train::{train, train_rows, BandReport, Target, TrainingReport};
