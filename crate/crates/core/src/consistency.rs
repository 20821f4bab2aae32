//! Finite-domain consistency checking with metering.
//!
//! The solver is plain chronological backtracking with forward checking,
//! variables in declaration order and values in domain order, so witnesses
//! are reproducible. Every metered check goes through [`check`] (or
//! [`is_consistent`]) and bumps [`CheckStats::consistency_checks`] by one.
//! Nothing is cached between checks.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{Configuration, Constraint, DiagnosisProblem, Expr, ReqSet, Variable};

/// Cost record for one run. `guard_checks` counts the subset of
/// `consistency_checks` spent on algorithm preconditions rather than inside
/// the divide-and-conquer recursions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckStats {
    pub consistency_checks: u64,
    pub guard_checks: u64,
    pub solver_backtracks: u64,
    #[serde(rename = "elapsed_us", serialize_with = "as_micros")]
    pub elapsed: Duration,
}

fn as_micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_micros() as u64)
}

impl CheckStats {
    /// Checks made outside the precondition guards.
    pub fn core_checks(&self) -> u64 {
        self.consistency_checks - self.guard_checks
    }

    pub fn absorb(&mut self, other: &CheckStats) {
        self.consistency_checks += other.consistency_checks;
        self.guard_checks += other.guard_checks;
        self.solver_backtracks += other.solver_backtracks;
        self.elapsed += other.elapsed;
    }
}

/// Result of a single search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub solution: Option<Configuration>,
    pub backtracks: u64,
}

/// Three-valued evaluation under partial domains. `Some(b)` when the value
/// is fixed by the remaining domain values, `None` when still open.
fn eval_partial(e: &Expr, domains: &[u64]) -> Option<bool> {
    match e {
        Expr::Atom { var, cmp, value } => {
            let m = domains[*var];
            let bit = 1u64 << value;
            let eq = if m == bit {
                Some(true)
            } else if m & bit == 0 {
                Some(false)
            } else {
                None
            };
            match cmp {
                crate::model::Comparator::Eq => eq,
                crate::model::Comparator::Ne => eq.map(|b| !b),
            }
        }
        Expr::Not(a) => eval_partial(a, domains).map(|b| !b),
        Expr::And(a, b) => match (eval_partial(a, domains), eval_partial(b, domains)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Expr::Or(a, b) => match (eval_partial(a, domains), eval_partial(b, domains)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Expr::Implies(a, b) => match (eval_partial(a, domains), eval_partial(b, domains)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
    }
}

struct Search<'a> {
    constraints: Vec<&'a Expr>,
    scopes: Vec<Vec<usize>>,
    watching: Vec<Vec<usize>>,
    backtracks: u64,
}

impl<'a> Search<'a> {
    fn new(constraints: &[&'a Constraint], num_vars: usize) -> Self {
        let mut scopes = Vec::with_capacity(constraints.len());
        let mut watching = vec![Vec::new(); num_vars];
        for (ci, c) in constraints.iter().enumerate() {
            let mut vars = Vec::new();
            c.expr.collect_vars(&mut vars);
            vars.sort_unstable();
            vars.dedup();
            for &v in &vars {
                watching[v].push(ci);
            }
            scopes.push(vars);
        }
        Search {
            constraints: constraints.iter().map(|c| &c.expr).collect(),
            scopes,
            watching,
            backtracks: 0,
        }
    }

    /// Prunes or rejects against constraint `ci`, given that variables with
    /// index below `frontier` are assigned.
    fn revise(&self, ci: usize, frontier: usize, domains: &mut [u64]) -> bool {
        let expr = self.constraints[ci];
        let mut open = self.scopes[ci].iter().copied().filter(|&v| v >= frontier);
        match (open.next(), open.next()) {
            (Some(u), None) => {
                let dom = domains[u];
                let mut kept = 0u64;
                let mut rest = dom;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    rest &= rest - 1;
                    domains[u] = bit;
                    if eval_partial(expr, domains) != Some(false) {
                        kept |= bit;
                    }
                }
                domains[u] = kept;
                kept != 0
            }
            _ => eval_partial(expr, domains) != Some(false),
        }
    }

    fn run(&mut self, var: usize, domains: &mut Vec<u64>) -> bool {
        if var == domains.len() {
            return true;
        }
        let mut rest = domains[var];
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            let saved = domains.clone();
            domains[var] = bit;
            let ok = self.watching[var]
                .iter()
                .all(|&ci| self.revise(ci, var + 1, domains));
            if ok && self.run(var + 1, domains) {
                return true;
            }
            self.backtracks += 1;
            *domains = saved;
        }
        false
    }
}

/// Searches for a complete assignment satisfying all `constraints`.
pub fn search(constraints: &[&Constraint], variables: &[Variable]) -> SearchOutcome {
    let mut domains: Vec<u64> = variables
        .iter()
        .map(|v| {
            if v.domain.len() >= 64 {
                u64::MAX
            } else {
                (1u64 << v.domain.len()) - 1
            }
        })
        .collect();
    let mut s = Search::new(constraints, variables.len());
    // Node consistency for unary constraints, and early rejection of
    // constraints that are already false.
    let root_ok = (0..s.constraints.len()).all(|ci| s.revise(ci, 0, &mut domains));
    let solution = if root_ok && s.run(0, &mut domains) {
        Some(Configuration {
            values: domains
                .iter()
                .map(|m| m.trailing_zeros() as usize)
                .collect(),
        })
    } else {
        None
    };
    SearchOutcome {
        solution,
        backtracks: s.backtracks,
    }
}

/// Deterministic witness search. Not metered.
pub fn solve(constraints: &[&Constraint], variables: &[Variable]) -> Option<Configuration> {
    search(constraints, variables).solution
}

/// Metered consistency check over an explicit constraint list.
pub fn is_consistent(
    constraints: &[&Constraint],
    variables: &[Variable],
    stats: &mut CheckStats,
) -> bool {
    let start = Instant::now();
    let out = search(constraints, variables);
    stats.consistency_checks += 1;
    stats.solver_backtracks += out.backtracks;
    stats.elapsed += start.elapsed();
    out.solution.is_some()
}

/// Decides consistency of `C_KB ∪ {requirement i | i ∈ subset}` for a fixed
/// background knowledge base. Implementations do not meter; use [`check`].
pub trait RequirementOracle {
    fn num_requirements(&self) -> usize;

    fn decide(&mut self, subset: &ReqSet, stats: &mut CheckStats) -> bool;
}

impl<O: RequirementOracle + ?Sized> RequirementOracle for &mut O {
    fn num_requirements(&self) -> usize {
        (**self).num_requirements()
    }

    fn decide(&mut self, subset: &ReqSet, stats: &mut CheckStats) -> bool {
        (**self).decide(subset, stats)
    }
}

/// One metered consistency check.
pub fn check<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    subset: &ReqSet,
    stats: &mut CheckStats,
) -> bool {
    let start = Instant::now();
    let r = oracle.decide(subset, stats);
    stats.consistency_checks += 1;
    stats.elapsed += start.elapsed();
    r
}

/// A metered check attributed to a precondition guard.
pub fn guard_check<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    subset: &ReqSet,
    stats: &mut CheckStats,
) -> bool {
    stats.guard_checks += 1;
    check(oracle, subset, stats)
}

/// Oracle backed by the backtracking solver over a [`DiagnosisProblem`].
#[derive(Debug, Clone, Copy)]
pub struct ProblemOracle<'p> {
    problem: &'p DiagnosisProblem,
}

impl<'p> ProblemOracle<'p> {
    pub fn new(problem: &'p DiagnosisProblem) -> Self {
        ProblemOracle { problem }
    }

    pub fn witness(&self, subset: &ReqSet) -> Option<Configuration> {
        solve(
            &self.problem.constraints_with(subset),
            &self.problem.kb().variables,
        )
    }
}

impl RequirementOracle for ProblemOracle<'_> {
    fn num_requirements(&self) -> usize {
        self.problem.len()
    }

    fn decide(&mut self, subset: &ReqSet, stats: &mut CheckStats) -> bool {
        let out = search(
            &self.problem.constraints_with(subset),
            &self.problem.kb().variables,
        );
        stats.solver_backtracks += out.backtracks;
        out.solution.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car;
    use crate::model::{KnowledgeBase, Origin};

    fn kb_refs(kb: &KnowledgeBase) -> Vec<&Constraint> {
        kb.constraints.iter().collect()
    }

    #[test]
    fn car_kb_alone_is_consistent() {
        let kb = car::knowledge_base();
        let mut stats = CheckStats::default();
        assert!(is_consistent(&kb_refs(&kb), &kb.variables, &mut stats));
        assert_eq!(stats.consistency_checks, 1);
    }

    #[test]
    fn car_requirements_are_inconsistent() {
        let p = car::problem();
        let mut stats = CheckStats::default();
        let all = p.constraints_with(&ReqSet::full(3));
        assert!(!is_consistent(&all, &p.kb().variables, &mut stats));
        let c5c6 = p.constraints_with(&[0, 1].into_iter().collect());
        assert!(!is_consistent(&c5c6, &p.kb().variables, &mut stats));
        assert_eq!(stats.consistency_checks, 2);
        assert!(solve(&c5c6, &p.kb().variables).is_none());
    }

    #[test]
    fn car_witness_after_deleting_c5_c6() {
        let p = car::problem();
        let kb = p.kb();
        let cs = p.constraints_with(&[2].into_iter().collect());
        let w = solve(&cs, &kb.variables).expect("consistent");
        assert_eq!(w.value_of(kb, "type"), Some("xdrive"));
        assert_eq!(w.value_of(kb, "4wheel"), Some("yes"));
        assert_eq!(w.value_of(kb, "fuel"), Some("10l"));
        assert!(cs.iter().all(|c| w.satisfies(c)));
        // Deterministic: first values in declaration order everywhere else.
        assert_eq!(w.value_of(kb, "pdc"), Some("yes"));
        assert_eq!(w.value_of(kb, "skibag"), Some("yes"));
    }

    #[test]
    fn empty_set_gives_first_assignment() {
        let kb = car::knowledge_base();
        assert_eq!(
            solve(&[], &kb.variables),
            Some(Configuration { values: vec![0; 5] })
        );
    }

    #[test]
    fn oracle_meters_through_check() {
        let p = car::problem();
        let mut o = ProblemOracle::new(&p);
        let mut stats = CheckStats::default();
        assert!(check(&mut o, &ReqSet::new(), &mut stats));
        assert!(!guard_check(&mut o, &ReqSet::full(3), &mut stats));
        assert_eq!(stats.consistency_checks, 2);
        assert_eq!(stats.guard_checks, 1);
        assert_eq!(stats.core_checks(), 1);
    }

    #[test]
    fn constraint_falsified_at_root() {
        let kb = car::knowledge_base();
        let c = Constraint::new(
            "x",
            crate::model::Expr::and(
                kb.atom("pdc", "yes").unwrap(),
                kb.atom("pdc", "no").unwrap(),
            ),
            Origin::Requirement,
        );
        assert!(solve(&[&c], &kb.variables).is_none());
    }
}
