//! Configuration tasks, requirement sets and preference orderings.
//!
//! A [`KnowledgeBase`] holds finite-domain variables and the domain
//! constraints. A [`DiagnosisProblem`] pairs it with an ordered list of
//! requirement constraints: list position is importance, position 0 being the
//! least important requirement. All algorithms address requirements by that
//! position, collected in a [`ReqSet`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::consistency;
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Ne,
}

/// Boolean expression over `variable = value` atoms. Variables and values are
/// indices into the owning knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom {
        var: usize,
        cmp: Comparator,
        value: usize,
    },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eq(var: usize, value: usize) -> Self {
        Expr::Atom {
            var,
            cmp: Comparator::Eq,
            value,
        }
    }

    pub fn ne(var: usize, value: usize) -> Self {
        Expr::Atom {
            var,
            cmp: Comparator::Ne,
            value,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    /// Evaluates under a complete assignment (`values[var]` is a value index).
    pub fn eval(&self, values: &[usize]) -> bool {
        match self {
            Expr::Atom { var, cmp, value } => match cmp {
                Comparator::Eq => values[*var] == *value,
                Comparator::Ne => values[*var] != *value,
            },
            Expr::Not(e) => !e.eval(values),
            Expr::And(a, b) => a.eval(values) && b.eval(values),
            Expr::Or(a, b) => a.eval(values) || b.eval(values),
            Expr::Implies(a, b) => !a.eval(values) || b.eval(values),
        }
    }

    /// Pushes the variables mentioned by the expression (with repeats).
    pub fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Atom { var, .. } => out.push(*var),
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Renders the expression in the textual grammar accepted by the parser.
    pub fn render(&self, variables: &[Variable]) -> String {
        let mut s = String::new();
        self.render_into(variables, &mut s, 0);
        s
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Implies(..) => 1,
            Expr::Or(..) => 2,
            Expr::And(..) => 3,
            Expr::Not(_) => 4,
            Expr::Atom { .. } => 5,
        }
    }

    fn render_into(&self, variables: &[Variable], out: &mut String, min_prec: u8) {
        let prec = self.precedence();
        let paren = prec < min_prec;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Atom { var, cmp, value } => {
                let v = &variables[*var];
                out.push_str(&v.name);
                out.push_str(match cmp {
                    Comparator::Eq => " = ",
                    Comparator::Ne => " != ",
                });
                out.push_str(&v.domain[*value]);
            }
            Expr::Not(e) => {
                out.push('!');
                e.render_into(variables, out, 4);
            }
            // `&` and `|` are associative; a right-nested operand of the same
            // kind is parenthesized so the tree shape survives a re-parse.
            Expr::And(a, b) => {
                a.render_into(variables, out, 3);
                out.push_str(" & ");
                b.render_into(variables, out, 4);
            }
            Expr::Or(a, b) => {
                a.render_into(variables, out, 2);
                out.push_str(" | ");
                b.render_into(variables, out, 3);
            }
            Expr::Implies(a, b) => {
                a.render_into(variables, out, 2);
                out.push_str(" -> ");
                b.render_into(variables, out, 1);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    KnowledgeBase,
    Requirement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: String,
    pub expr: Expr,
    pub origin: Origin,
}

impl Constraint {
    pub fn new(id: impl Into<String>, expr: Expr, origin: Origin) -> Self {
        Constraint {
            id: id.into(),
            expr,
            origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl KnowledgeBase {
    /// Builds a knowledge base, checking the structural invariants. Whether
    /// the constraints are satisfiable is checked by [`DiagnosisProblem::new`].
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ModelError> {
        let mut names = HashSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateId(v.name.clone()));
            }
            if v.domain.is_empty() {
                return Err(ModelError::EmptyDomain(v.name.clone()));
            }
            if v.domain.len() > 64 {
                return Err(ModelError::DomainTooLarge(v.name.clone()));
            }
            let mut seen = HashSet::new();
            for value in &v.domain {
                if !seen.insert(value.as_str()) {
                    return Err(ModelError::DuplicateValue {
                        variable: v.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        let mut ids = HashSet::new();
        for c in &constraints {
            if !ids.insert(c.id.as_str()) {
                return Err(ModelError::DuplicateId(c.id.clone()));
            }
        }
        Ok(KnowledgeBase {
            name: name.into(),
            variables,
            constraints,
        })
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constraint(&self, id: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// Builds a `var = value` atom by name.
    pub fn atom(&self, var: &str, value: &str) -> Option<Expr> {
        let vi = self.var_index(var)?;
        let val = self.variables[vi].value_index(value)?;
        Some(Expr::eq(vi, val))
    }
}

/// Requirement ids ordered least important first. Position `i` in the order
/// is the subscript used by the lexicographic comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceOrder(Vec<String>);

impl PreferenceOrder {
    pub fn new(ids: Vec<String>) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(ModelError::DuplicateId(id.clone()));
            }
        }
        Ok(PreferenceOrder(ids))
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.0.iter().position(|x| x == id)
    }

    pub fn reversed(&self) -> Self {
        PreferenceOrder(self.0.iter().rev().cloned().collect())
    }

    /// Maps ids to their positions.
    pub fn positions<S: AsRef<str>>(&self, ids: &[S]) -> Result<ReqSet, ModelError> {
        ids.iter()
            .map(|id| {
                self.position(id.as_ref())
                    .ok_or_else(|| ModelError::UnknownId(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ReqSet::from_iter)
    }
}

/// A set of requirement positions, kept sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReqSet(Vec<usize>);

/// A deletion set restoring consistency.
pub type Diagnosis = ReqSet;
/// A set of requirements inconsistent with the knowledge base.
pub type ConflictSet = ReqSet;

impl ReqSet {
    pub fn new() -> Self {
        ReqSet(Vec::new())
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        ReqSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.0.binary_search(&pos).is_ok()
    }

    pub fn insert(&mut self, pos: usize) -> bool {
        match self.0.binary_search(&pos) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, pos);
                true
            }
        }
    }

    pub fn is_subset(&self, other: &ReqSet) -> bool {
        self.0.iter().all(|p| other.contains(*p))
    }

    pub fn is_disjoint(&self, other: &ReqSet) -> bool {
        self.0.iter().all(|p| !other.contains(*p))
    }

    pub fn union(&self, other: &ReqSet) -> ReqSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &ReqSet) -> ReqSet {
        ReqSet(self.iter().filter(|p| !other.contains(*p)).collect())
    }

    pub fn with(&self, pos: usize) -> ReqSet {
        let mut s = self.clone();
        s.insert(pos);
        s
    }

    pub fn without(&self, pos: usize) -> ReqSet {
        ReqSet(self.iter().filter(|&p| p != pos).collect())
    }

    /// Bitmask form; positions must be below 64.
    pub fn to_mask(&self) -> u64 {
        self.iter().fold(0, |m, p| m | (1u64 << p))
    }

    pub fn from_mask(mask: u64) -> ReqSet {
        ReqSet((0..64).filter(|p| mask & (1u64 << p) != 0).collect())
    }
}

impl FromIterator<usize> for ReqSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ReqSet(v)
    }
}

impl fmt::Display for ReqSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Outcome of [`lex_preferred`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    XPreferred,
    YPreferred,
    Equal,
}

/// Lexicographic comparison of two requirement sets by position.
///
/// The highest position on which the sets differ decides: the set *not*
/// containing it is preferred. `X_preferred` corresponds to `X >_lex Y` in
/// the usual notation, i.e. X keeps the more important requirement.
pub fn compare_sets(x: &ReqSet, y: &ReqSet) -> Preference {
    let mut xi = x.0.iter().rev().peekable();
    let mut yi = y.0.iter().rev().peekable();
    loop {
        match (xi.peek(), yi.peek()) {
            (None, None) => return Preference::Equal,
            (Some(_), None) => return Preference::YPreferred,
            (None, Some(_)) => return Preference::XPreferred,
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Equal => {
                    xi.next();
                    yi.next();
                }
                Ordering::Greater => return Preference::YPreferred,
                Ordering::Less => return Preference::XPreferred,
            },
        }
    }
}

/// [`compare_sets`] as an [`Ordering`] where `Less` means "more preferred",
/// so an ascending sort puts the preferred set first.
pub fn preference_ordering(x: &ReqSet, y: &ReqSet) -> Ordering {
    match compare_sets(x, y) {
        Preference::XPreferred => Ordering::Less,
        Preference::YPreferred => Ordering::Greater,
        Preference::Equal => Ordering::Equal,
    }
}

/// Sorts sets most-preferred first.
pub fn sort_by_preference(sets: &mut [ReqSet]) {
    sets.sort_by(preference_ordering);
}

/// Id-based form of [`compare_sets`] against an explicit order.
pub fn lex_preferred<S: AsRef<str>>(
    x: &[S],
    y: &[S],
    order: &PreferenceOrder,
) -> Result<Preference, ModelError> {
    Ok(compare_sets(&order.positions(x)?, &order.positions(y)?))
}

/// A complete assignment: `values[var]` indexes the variable's domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub values: Vec<usize>,
}

impl Configuration {
    pub fn value_of<'a>(&self, kb: &'a KnowledgeBase, var: &str) -> Option<&'a str> {
        let i = kb.var_index(var)?;
        Some(kb.variables[i].domain[self.values[i]].as_str())
    }

    pub fn to_map(&self, kb: &KnowledgeBase) -> BTreeMap<String, String> {
        kb.variables
            .iter()
            .zip(&self.values)
            .map(|(v, &i)| (v.name.clone(), v.domain[i].clone()))
            .collect()
    }

    pub fn satisfies(&self, constraint: &Constraint) -> bool {
        constraint.expr.eval(&self.values)
    }
}

/// Knowledge base plus requirements stored least important first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagnosisProblem {
    kb: Arc<KnowledgeBase>,
    requirements: Vec<Constraint>,
}

impl DiagnosisProblem {
    /// Validates ids and checks that the knowledge base alone is satisfiable.
    pub fn new(kb: Arc<KnowledgeBase>, requirements: Vec<Constraint>) -> Result<Self, ModelError> {
        if requirements.is_empty() {
            return Err(ModelError::EmptyRequirements);
        }
        let mut ids = HashSet::new();
        for r in &requirements {
            if kb.constraint(&r.id).is_some() {
                return Err(ModelError::IdClash(r.id.clone()));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(ModelError::DuplicateId(r.id.clone()));
            }
        }
        let kb_refs: Vec<&Constraint> = kb.constraints.iter().collect();
        if consistency::solve(&kb_refs, &kb.variables).is_none() {
            return Err(ModelError::InconsistentKnowledgeBase);
        }
        Ok(DiagnosisProblem { kb, requirements })
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn kb_arc(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    pub fn requirements(&self) -> &[Constraint] {
        &self.requirements
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn order(&self) -> PreferenceOrder {
        PreferenceOrder(self.requirements.iter().map(|r| r.id.clone()).collect())
    }

    /// The same problem with requirements rearranged into `order`.
    pub fn reordered(&self, order: &PreferenceOrder) -> Result<Self, ModelError> {
        if order.len() != self.requirements.len() {
            return Err(ModelError::InvalidOrder);
        }
        let mut reqs = Vec::with_capacity(order.len());
        for id in order.ids() {
            let r = self
                .requirements
                .iter()
                .find(|r| &r.id == id)
                .ok_or(ModelError::InvalidOrder)?;
            reqs.push(r.clone());
        }
        Ok(DiagnosisProblem {
            kb: self.kb.clone(),
            requirements: reqs,
        })
    }

    pub fn ids(&self, set: &ReqSet) -> Vec<&str> {
        set.iter()
            .map(|p| self.requirements[p].id.as_str())
            .collect()
    }

    pub fn positions<S: AsRef<str>>(&self, ids: &[S]) -> Result<ReqSet, ModelError> {
        ids.iter()
            .map(|id| {
                self.requirements
                    .iter()
                    .position(|r| r.id == id.as_ref())
                    .ok_or_else(|| ModelError::UnknownId(id.as_ref().to_string()))
            })
            .collect()
    }

    /// `C_KB` followed by the requirements at `subset`.
    pub fn constraints_with(&self, subset: &ReqSet) -> Vec<&Constraint> {
        self.kb
            .constraints
            .iter()
            .chain(subset.iter().map(|p| &self.requirements[p]))
            .collect()
    }
}
