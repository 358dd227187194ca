//! Local outlier factor scoring with unsupervised selection of the
//! neighborhood size `k` and contamination `c`.

pub mod cli;
pub mod csvio;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod knn;
pub mod lof;
pub mod model;
pub mod nct;
pub mod projection;
pub mod special;
pub mod tuner;

pub use dataset::{validate_dataset, Dataset};
pub use error::{Error, Result};
pub use model::{load_model, save_model, TunedModel};
pub use tuner::{tune, tune_with_projection, TuningGrid};
