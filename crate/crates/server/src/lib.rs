//! HTTP service and command line for the GAM workbench.

pub mod api;
pub mod cli;
pub mod error;

pub use api::{router, Workbench};
pub use error::ApiError;
