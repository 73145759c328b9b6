//! Annotated PDDL: parsing, grounding, and the concrete models built from
//! possible preconditions and effects.

mod domain;
mod ground;
mod models;
mod problem;
pub mod sexpr;

pub use domain::{
    parse_domain, ActionSchema, Atom, Domain, PossibleCondition, PredicateDecl, Slot, TypedName,
    OBJECT,
};
pub use ground::{ground, CondId, GroundAction, GroundPossible, GroundTask};
pub use models::{
    concretize, constrained_minus, enumerate_models, join_model, most_constrained, most_relaxed,
    parse_selection_text, ConcreteAction, ConcreteModel, Selection,
};
pub use problem::{parse_problem, Problem};

use std::sync::Arc;

use crate::error::Result;

/// Parses and grounds a domain/problem pair in one step.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<Arc<GroundTask>> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text, &domain)?;
    Ok(Arc::new(ground(&domain, &problem)))
}
