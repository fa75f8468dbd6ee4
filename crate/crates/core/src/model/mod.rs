//! Binary choice panel model with a predetermined binary covariate.

pub mod dgp;
pub mod history;
pub mod outcome;
pub mod params;
pub mod sample;

pub use dgp::{dgp_default, normal_percentile_grid, ModelConfig};
pub use history::{enumerate_histories, History, HistoryIndex, MAX_T};
pub use outcome::{compute_q, history_probability, OutcomeVector};
pub use params::{FeedbackProcess, HeterogeneityDist, HeterogeneityGrid};
pub use sample::{sample_panel, PanelDataset};
