// SPDX-License-Identifier: Apache-2.0

//! Demonstrations and reports built on `slplab-core`.

pub mod demo;
pub mod error;
pub mod report;

pub use demo::{run_demo, DemoName, Options};
pub use error::CliError;
pub use report::{parse_json, serialize, Format, Report, SCHEMA_VERSION};
