//! Budget planning and learning-curve analysis for one-epoch language model
//! training.
//!
//! The crate models a family of transformer language models (parameter and
//! relative-FLOPS accounting), fits power laws to their learning curves,
//! remaps curves from different model sizes onto a common compute axis to
//! find where each size is optimal, plans token budgets under a fixed
//! compute product, and measures the speedup of one-epoch training over
//! multi-epoch training on a smaller dataset.
//!
//! Conventions used throughout:
//! - losses are positive; curve analysis happens in log-log space,
//! - iteration axes are compute-normalized before sizes are compared,
//! - every fallible operation returns [`Error`] with a stable `code()`.

pub mod curves;
pub mod epoch_sim;
mod error;
pub mod fitting;
mod interp;
pub mod model_budget;
pub mod planner;
mod range;
pub mod remap;
pub mod speedup;

pub use error::{Error, Result};
pub use range::{IterRange, RatioRange};
