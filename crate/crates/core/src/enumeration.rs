//! Enumeration of several minimal diagnoses.
//!
//! Three strategies share one result type:
//!
//! * [`enumerate_fastdiag`] grows a tree whose nodes run the direct
//!   diagnosis on the requirements not yet fixed. A child fixes one element
//!   of its parent's diagnosis (keeps it in the problem but makes it
//!   non-diagnosable), so the child finds the preferred diagnosis avoiding
//!   that element. A node with no diagnosis is closed, and any later path
//!   containing a closed path is closed without a check.
//! * [`enumerate_hsdag`] is the classic hitting-set tree: nodes are labelled
//!   with minimal conflicts, edges delete one conflict element, and a node
//!   whose deletions restore consistency is a diagnosis. Known conflicts
//!   disjoint from a node's path are reused instead of recomputed.
//!   Breadth-first follows the path length; best-first expands the path with
//!   the lowest sum of preference positions (1-based), ties going to the
//!   lexicographically preferred path.
//! * [`all_min_conflicts`] collects the labels of a complete hitting-set
//!   tree.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::consistency::{check, guard_check, CheckStats, ProblemOracle, RequirementOracle};
use crate::fastdiag::{diagnose_within, FastDiagOutcome};
use crate::model::{
    preference_ordering, sort_by_preference, ConflictSet, Diagnosis, DiagnosisProblem, ReqSet,
};
use crate::quickxplain::quick_xplain;

pub const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fastdiag")]
    FastDiagTree,
    #[serde(rename = "hsdag-bfs")]
    HsdagBreadthFirst,
    #[serde(rename = "hsdag-best")]
    HsdagBestFirst,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::FastDiagTree,
        Algorithm::HsdagBreadthFirst,
        Algorithm::HsdagBestFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FastDiagTree => "fastdiag",
            Algorithm::HsdagBreadthFirst => "hsdag-bfs",
            Algorithm::HsdagBestFirst => "hsdag-best",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAlgorithm(pub String);

impl fmt::Display for UnknownAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown algorithm `{}` (expected fastdiag, hsdag-bfs or hsdag-best)",
            self.0
        )
    }
}

impl std::error::Error for UnknownAlgorithm {}

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    BreadthFirst,
    BestFirst,
}

/// How many diagnoses to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Count(usize),
    All,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Count(n) => write!(f, "{n}"),
            Limit::All => f.write_str("all"),
        }
    }
}

impl FromStr for Limit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(Limit::All);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("n must be at least 1".into()),
            Ok(n) => Ok(Limit::Count(n)),
            Err(_) => Err(format!("expected a positive integer or `all`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub limit: Limit,
    /// Upper bound on diagnoses when `limit` is [`Limit::All`].
    pub cap: usize,
}

impl EnumerationOptions {
    pub fn new(limit: Limit) -> Self {
        EnumerationOptions {
            limit,
            cap: DEFAULT_CAP,
        }
    }

    fn max(&self) -> usize {
        match self.limit {
            Limit::Count(n) => n,
            Limit::All => self.cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabel {
    Diagnosis(Diagnosis),
    Conflict(ConflictSet),
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Requirements fixed (diagnosis tree) or deleted (hitting-set tree) on
    /// the way from the root.
    pub path: ReqSet,
    pub label: NodeLabel,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationResult {
    pub algorithm: Algorithm,
    /// Distinct minimal diagnoses in discovery order.
    pub diagnoses: Vec<Diagnosis>,
    /// Minimal conflicts computed or reused (hitting-set trees only).
    pub conflicts: Vec<ConflictSet>,
    pub stats: CheckStats,
    pub nodes: Vec<TreeNode>,
    pub conflict_reuses: u64,
    /// The safety cap stopped an unbounded enumeration.
    pub capped: bool,
}

impl EnumerationResult {
    fn new(algorithm: Algorithm) -> Self {
        EnumerationResult {
            algorithm,
            diagnoses: Vec::new(),
            conflicts: Vec::new(),
            stats: CheckStats::default(),
            nodes: Vec::new(),
            conflict_reuses: 0,
            capped: false,
        }
    }

    pub fn tree_size(&self) -> usize {
        self.nodes.len()
    }

    /// Diagnoses sorted most preferred first.
    pub fn ranked(&self) -> Vec<Diagnosis> {
        let mut v = self.diagnoses.clone();
        sort_by_preference(&mut v);
        v
    }

    fn push_node(&mut self, path: ReqSet, label: NodeLabel, parent: Option<usize>) -> usize {
        self.nodes.push(TreeNode {
            path,
            label,
            parent,
        });
        self.nodes.len() - 1
    }

    fn record(&mut self, d: Diagnosis, options: &EnumerationOptions) -> bool {
        if !self.diagnoses.contains(&d) {
            self.diagnoses.push(d);
        }
        let done = self.diagnoses.len() >= options.max();
        if done && options.limit == Limit::All {
            self.capped = true;
        }
        done
    }
}

/// Runs `algorithm` on `problem` with a solver-backed oracle.
pub fn enumerate(
    problem: &DiagnosisProblem,
    algorithm: Algorithm,
    options: &EnumerationOptions,
) -> EnumerationResult {
    let mut oracle = ProblemOracle::new(problem);
    enumerate_with(&mut oracle, algorithm, options)
}

pub fn enumerate_with<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    algorithm: Algorithm,
    options: &EnumerationOptions,
) -> EnumerationResult {
    match algorithm {
        Algorithm::FastDiagTree => enumerate_fastdiag(oracle, options),
        Algorithm::HsdagBreadthFirst => enumerate_hsdag(oracle, options, Strategy::BreadthFirst),
        Algorithm::HsdagBestFirst => enumerate_hsdag(oracle, options, Strategy::BestFirst),
    }
}

pub fn enumerate_fastdiag<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    options: &EnumerationOptions,
) -> EnumerationResult {
    let mut result = EnumerationResult::new(Algorithm::FastDiagTree);
    let mut stats = CheckStats::default();
    let all = ReqSet::full(oracle.num_requirements());

    if guard_check(oracle, &all, &mut stats) {
        result.push_node(ReqSet::new(), NodeLabel::Diagnosis(ReqSet::new()), None);
        result.record(ReqSet::new(), options);
        result.stats = stats;
        return result;
    }

    let mut queue: VecDeque<(ReqSet, Option<usize>)> = VecDeque::from([(ReqSet::new(), None)]);
    let mut seen: HashSet<ReqSet> = HashSet::from([ReqSet::new()]);
    let mut closed: Vec<ReqSet> = Vec::new();

    while let Some((path, parent)) = queue.pop_front() {
        if closed.iter().any(|c| c.is_subset(&path)) {
            result.push_node(path, NodeLabel::Closed, parent);
            continue;
        }
        let diagnosable: Vec<usize> = all.difference(&path).iter().collect();
        match diagnose_within(oracle, &diagnosable, &all, &mut stats) {
            FastDiagOutcome::Diagnosis(d) => {
                let id = result.push_node(path.clone(), NodeLabel::Diagnosis(d.clone()), parent);
                if result.record(d.clone(), options) {
                    break;
                }
                for p in d.iter() {
                    let child = path.with(p);
                    if seen.insert(child.clone()) {
                        queue.push_back((child, Some(id)));
                    }
                }
            }
            _ => {
                result.push_node(path.clone(), NodeLabel::Closed, parent);
                closed.push(path);
            }
        }
    }
    result.stats = stats;
    result
}

struct Frontier {
    cost: usize,
    path: ReqSet,
    seq: usize,
    parent: Option<usize>,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .cmp(&other.cost)
            .then_with(|| preference_ordering(&self.path, &other.path))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

enum Open {
    Fifo(VecDeque<Frontier>),
    Cheapest(BinaryHeap<Reverse<Frontier>>),
}

impl Open {
    fn push(&mut self, f: Frontier) {
        match self {
            Open::Fifo(q) => q.push_back(f),
            Open::Cheapest(h) => h.push(Reverse(f)),
        }
    }

    fn pop(&mut self) -> Option<Frontier> {
        match self {
            Open::Fifo(q) => q.pop_front(),
            Open::Cheapest(h) => h.pop().map(|Reverse(f)| f),
        }
    }
}

fn path_cost(path: &ReqSet) -> usize {
    path.iter().map(|p| p + 1).sum()
}

pub fn enumerate_hsdag<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    options: &EnumerationOptions,
    strategy: Strategy,
) -> EnumerationResult {
    let algorithm = match strategy {
        Strategy::BreadthFirst => Algorithm::HsdagBreadthFirst,
        Strategy::BestFirst => Algorithm::HsdagBestFirst,
    };
    let mut result = EnumerationResult::new(algorithm);
    let mut stats = CheckStats::default();
    let all = ReqSet::full(oracle.num_requirements());

    if guard_check(oracle, &all, &mut stats) {
        result.push_node(ReqSet::new(), NodeLabel::Diagnosis(ReqSet::new()), None);
        result.record(ReqSet::new(), options);
        result.stats = stats;
        return result;
    }

    let mut open = match strategy {
        Strategy::BreadthFirst => Open::Fifo(VecDeque::new()),
        Strategy::BestFirst => Open::Cheapest(BinaryHeap::new()),
    };
    let mut seq = 0;
    open.push(Frontier {
        cost: 0,
        path: ReqSet::new(),
        seq,
        parent: None,
    });
    let mut seen: HashSet<ReqSet> = HashSet::from([ReqSet::new()]);

    while let Some(Frontier { path, parent, .. }) = open.pop() {
        if result.diagnoses.iter().any(|d| d.is_subset(&path)) {
            result.push_node(path, NodeLabel::Closed, parent);
            continue;
        }
        let remaining = all.difference(&path);
        // The root is already known to be inconsistent.
        if !path.is_empty() && check(oracle, &remaining, &mut stats) {
            result.push_node(path.clone(), NodeLabel::Diagnosis(path.clone()), parent);
            if result.record(path, options) {
                break;
            }
            continue;
        }
        let label = match result.conflicts.iter().find(|cs| cs.is_disjoint(&path)) {
            Some(cs) => {
                result.conflict_reuses += 1;
                cs.clone()
            }
            None => {
                let cs = quick_xplain(oracle, &ReqSet::new(), remaining.as_slice(), &mut stats);
                result.conflicts.push(cs.clone());
                cs
            }
        };
        let id = result.push_node(path.clone(), NodeLabel::Conflict(label.clone()), parent);
        for p in label.iter() {
            let child = path.with(p);
            if seen.insert(child.clone()) {
                seq += 1;
                open.push(Frontier {
                    cost: path_cost(&child),
                    path: child,
                    seq,
                    parent: Some(id),
                });
            }
        }
    }
    result.stats = stats;
    result
}

/// Every minimal conflict among the requirements.
pub fn all_min_conflicts<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    stats: &mut CheckStats,
) -> Vec<ConflictSet> {
    let options = EnumerationOptions {
        limit: Limit::All,
        cap: usize::MAX,
    };
    let r = enumerate_hsdag(oracle, &options, Strategy::BreadthFirst);
    stats.absorb(&r.stats);
    r.conflicts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ConflictFamilyOracle;
    use crate::car;

    fn set(v: &[usize]) -> ReqSet {
        v.iter().copied().collect()
    }

    fn all() -> EnumerationOptions {
        EnumerationOptions::new(Limit::All)
    }

    #[test]
    fn car_fastdiag_tree_discovery_order() {
        let p = car::problem();
        let r = enumerate(&p, Algorithm::FastDiagTree, &all());
        assert_eq!(r.diagnoses, vec![set(&[0, 1]), set(&[1, 2]), set(&[0, 2])]);
        assert_eq!(r.ranked(), vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]);
        assert!(!r.capped);
    }

    #[test]
    fn car_fastdiag_first() {
        let p = car::problem();
        let r = enumerate(
            &p,
            Algorithm::FastDiagTree,
            &EnumerationOptions::new(Limit::Count(1)),
        );
        assert_eq!(r.diagnoses, vec![set(&[0, 1])]);
    }

    #[test]
    fn car_hsdag_bfs() {
        let p = car::problem();
        let r = enumerate(&p, Algorithm::HsdagBreadthFirst, &all());
        assert_eq!(r.diagnoses, vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]);
        assert_eq!(r.conflicts, vec![set(&[0, 1]), set(&[1, 2]), set(&[0, 2])]);
    }

    #[test]
    fn car_hsdag_best_first() {
        let p = car::problem();
        let r = enumerate(&p, Algorithm::HsdagBestFirst, &all());
        let mut got = r.diagnoses.clone();
        got.sort();
        assert_eq!(got, vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]);
        assert_eq!(r.diagnoses[0], set(&[0, 1]));
    }

    #[test]
    fn car_all_conflicts() {
        let p = car::problem();
        let mut o = ProblemOracle::new(&p);
        let mut stats = CheckStats::default();
        let mut cs = all_min_conflicts(&mut o, &mut stats);
        cs.sort();
        assert_eq!(cs, vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])]);
        assert!(stats.consistency_checks > 0);
    }

    #[test]
    fn consistent_requirements() {
        let mut o = ConflictFamilyOracle::new(3, vec![]);
        let mut stats = CheckStats::default();
        assert!(all_min_conflicts(&mut o, &mut stats).is_empty());
        for a in Algorithm::ALL {
            let r = enumerate_with(&mut o, a, &all());
            assert_eq!(r.diagnoses, vec![ReqSet::new()]);
        }
    }

    #[test]
    fn single_conflicting_requirement() {
        let mut o = ConflictFamilyOracle::new(1, vec![set(&[0])]);
        let r = enumerate_with(&mut o, Algorithm::FastDiagTree, &all());
        assert_eq!(r.diagnoses, vec![set(&[0])]);
        // The root plus one closed child.
        assert_eq!(r.diagnoses.len(), 1);
        let mut stats = CheckStats::default();
        assert_eq!(all_min_conflicts(&mut o, &mut stats), vec![set(&[0])]);
    }

    #[test]
    fn cap_stops_enumeration() {
        let p = car::problem();
        let opts = EnumerationOptions {
            limit: Limit::All,
            cap: 2,
        };
        for a in Algorithm::ALL {
            let r = enumerate(&p, a, &opts);
            assert_eq!(r.diagnoses.len(), 2);
            assert!(r.capped);
        }
    }

    #[test]
    fn conflict_reuse_is_counted() {
        // Two disjoint conflicts: after deleting from the first, the second
        // is found once and reused along the sibling branch.
        let mut o = ConflictFamilyOracle::new(4, vec![set(&[0, 1]), set(&[2, 3])]);
        let r = enumerate_with(&mut o, Algorithm::HsdagBreadthFirst, &all());
        assert_eq!(r.conflicts.len(), 2);
        assert!(r.conflict_reuses >= 1);
        assert_eq!(r.diagnoses.len(), 4);
    }

    #[test]
    fn limit_parsing() {
        assert_eq!("all".parse::<Limit>(), Ok(Limit::All));
        assert_eq!("3".parse::<Limit>(), Ok(Limit::Count(3)));
        assert!("0".parse::<Limit>().is_err());
        assert!("x".parse::<Limit>().is_err());
        assert_eq!(
            "hsdag-best".parse::<Algorithm>(),
            Ok(Algorithm::HsdagBestFirst)
        );
        assert!("quick".parse::<Algorithm>().is_err());
    }
}
