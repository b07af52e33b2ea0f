//! Configuration, the template store and the command-line front end.

pub mod cli;
mod config;
mod store;

pub use config::{AppConfig, EvaluationConfig, ABLATIONS};
pub use store::{StoreRecord, TemplateStore, STORE_MAGIC, STORE_VERSION};
