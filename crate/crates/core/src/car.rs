//! The car configuration example used throughout tests, the CLI and the
//! service registry.

use std::sync::Arc;

use crate::model::{DiagnosisProblem, KnowledgeBase};
use crate::parse::{parse_kb, parse_requirements};

pub const KB: &str = include_str!("../data/car.kb");
pub const REQUIREMENTS: &str = include_str!("../data/car.req");

pub fn knowledge_base() -> KnowledgeBase {
    parse_kb(KB).expect("bundled car knowledge base parses")
}

/// The car problem with requirements ordered `c5 < c6 < c7`.
pub fn problem() -> DiagnosisProblem {
    let kb = Arc::new(knowledge_base());
    let (reqs, _) = parse_requirements(REQUIREMENTS, &kb).expect("bundled requirements parse");
    DiagnosisProblem::new(kb, reqs).expect("car knowledge base is consistent")
}
