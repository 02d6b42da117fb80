//! Batch front end for `leakycav-core`: scenario files in, CSV tables and a
//! JSON manifest out.

pub mod output;
pub mod report;
pub mod runners;
pub mod scenario;
pub mod schema;
pub mod units;

pub use scenario::{parse_scenario, Scenario, ScenarioError};
