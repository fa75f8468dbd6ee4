//! Sharp identified sets for binary choice panels with a predetermined
//! binary covariate.

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod identified;
pub mod links;
pub mod lp;
pub mod model;

pub use error::{Error, Result};
pub use links::Link;
pub use model::{
    compute_q, dgp_default, enumerate_histories, history_probability, sample_panel, FeedbackProcess,
    HeterogeneityDist, HeterogeneityGrid, History, HistoryIndex, ModelConfig, OutcomeVector, PanelDataset,
};
