//! Generating plan-generation and plan-validation questions that localize a
//! teammate's planning model among the candidates of an annotated model.

pub mod annotated_model;
pub mod cli;
pub mod elicitation;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod landmarks;
pub mod oracle;
pub mod planner;
pub mod planning_graph;
pub mod query_gen;
pub mod state;

pub use error::{Error, ParseError, Result};
