//! Brute-force oracles, random instances, benchmarks and ranking metrics.

use std::fmt::Write as _;
use std::io;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::consistency::{solve, CheckStats, RequirementOracle};
use crate::enumeration::{enumerate, Algorithm, EnumerationOptions, Limit};
use crate::error::DiagnosisError;
use crate::model::{
    sort_by_preference, ConflictSet, Constraint, Diagnosis, DiagnosisProblem, Expr, KnowledgeBase,
    Origin, ReqSet, Variable,
};

/// Largest requirement count the exhaustive oracles accept.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Above this many complete assignments the oracle table falls back to the
/// solver, one call per requirement subset.
const ASSIGNMENT_TABLE_LIMIT: u128 = 1 << 22;

/// Oracle whose consistent sets are exactly those containing no member of a
/// given conflict family. Handy for exercising algorithms without a solver.
#[derive(Debug, Clone)]
pub struct ConflictFamilyOracle {
    n: usize,
    conflicts: Vec<ReqSet>,
}

impl ConflictFamilyOracle {
    pub fn new(n: usize, conflicts: Vec<ReqSet>) -> Self {
        ConflictFamilyOracle { n, conflicts }
    }
}

impl RequirementOracle for ConflictFamilyOracle {
    fn num_requirements(&self) -> usize {
        self.n
    }

    fn decide(&mut self, subset: &ReqSet, _stats: &mut CheckStats) -> bool {
        !self.conflicts.iter().any(|c| c.is_subset(subset))
    }
}

/// Consistency of every requirement subset, precomputed.
///
/// For small assignment spaces the table comes from evaluating every
/// complete assignment directly, independent of the search-based solver.
#[derive(Debug, Clone)]
pub struct SubsetTable {
    n: usize,
    consistent: Vec<bool>,
}

impl SubsetTable {
    pub fn build(problem: &DiagnosisProblem) -> Result<Self, DiagnosisError> {
        let n = problem.len();
        if n > BRUTE_FORCE_CAP {
            return Err(DiagnosisError::SizeCapExceeded {
                cap: BRUTE_FORCE_CAP,
                actual: n,
            });
        }
        let kb = problem.kb();
        let space: u128 = kb
            .variables
            .iter()
            .map(|v| v.domain.len() as u128)
            .try_fold(1u128, |acc, d| acc.checked_mul(d))
            .unwrap_or(u128::MAX);
        let mut consistent = vec![false; 1 << n];
        if space <= ASSIGNMENT_TABLE_LIMIT {
            let sizes: Vec<usize> = kb.variables.iter().map(|v| v.domain.len()).collect();
            let mut values = vec![0usize; sizes.len()];
            loop {
                if kb.constraints.iter().all(|c| c.expr.eval(&values)) {
                    let mask = problem
                        .requirements()
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| r.expr.eval(&values))
                        .fold(0usize, |m, (i, _)| m | (1 << i));
                    consistent[mask] = true;
                }
                // Odometer increment.
                let mut i = 0;
                loop {
                    if i == values.len() {
                        break;
                    }
                    values[i] += 1;
                    if values[i] < sizes[i] {
                        break;
                    }
                    values[i] = 0;
                    i += 1;
                }
                if i == values.len() {
                    break;
                }
            }
            // Downward closure: subsets of a satisfiable set are satisfiable.
            for s in (0..consistent.len()).rev() {
                if !consistent[s] {
                    consistent[s] = (0..n).any(|i| s & (1 << i) == 0 && consistent[s | (1 << i)]);
                }
            }
        } else {
            for (s, slot) in consistent.iter_mut().enumerate() {
                let set = ReqSet::from_mask(s as u64);
                *slot = solve(&problem.constraints_with(&set), &kb.variables).is_some();
            }
        }
        Ok(SubsetTable { n, consistent })
    }

    pub fn num_requirements(&self) -> usize {
        self.n
    }

    pub fn is_consistent(&self, set: &ReqSet) -> bool {
        self.consistent[set.to_mask() as usize]
    }

    /// All subset-minimal diagnoses, most preferred first.
    pub fn diagnoses(&self) -> Vec<Diagnosis> {
        let full = (1usize << self.n) - 1;
        let mut out: Vec<Diagnosis> = (0..=full)
            .filter(|&d| {
                self.consistent[full & !d]
                    && (0..self.n)
                        .filter(|i| d & (1 << i) != 0)
                        .all(|i| !self.consistent[full & !(d & !(1 << i))])
            })
            .map(|d| ReqSet::from_mask(d as u64))
            .collect();
        sort_by_preference(&mut out);
        out
    }

    /// All subset-minimal conflicts, most preferred first.
    pub fn conflicts(&self) -> Vec<ConflictSet> {
        let mut out: Vec<ConflictSet> = (0..self.consistent.len())
            .filter(|&s| {
                !self.consistent[s]
                    && (0..self.n)
                        .filter(|i| s & (1 << i) != 0)
                        .all(|i| self.consistent[s & !(1 << i)])
            })
            .map(|s| ReqSet::from_mask(s as u64))
            .collect();
        sort_by_preference(&mut out);
        out
    }
}

impl RequirementOracle for SubsetTable {
    fn num_requirements(&self) -> usize {
        self.n
    }

    fn decide(&mut self, subset: &ReqSet, _stats: &mut CheckStats) -> bool {
        self.is_consistent(subset)
    }
}

pub fn brute_force_diagnoses(problem: &DiagnosisProblem) -> Result<Vec<Diagnosis>, DiagnosisError> {
    Ok(SubsetTable::build(problem)?.diagnoses())
}

pub fn brute_force_conflicts(
    problem: &DiagnosisProblem,
) -> Result<Vec<ConflictSet>, DiagnosisError> {
    Ok(SubsetTable::build(problem)?.conflicts())
}

/// Subset-minimal sets over `0..n` intersecting every member of `family`,
/// most preferred first.
pub fn minimal_hitting_sets(family: &[ReqSet], n: usize) -> Vec<ReqSet> {
    let masks: Vec<u64> = family.iter().map(ReqSet::to_mask).collect();
    let hits = |h: u64| masks.iter().all(|m| m & h != 0);
    let mut out: Vec<ReqSet> = (0..(1u64 << n))
        .filter(|&h| {
            hits(h)
                && (0..n)
                    .filter(|i| h & (1 << i) != 0)
                    .all(|i| !hits(h & !(1 << i)))
        })
        .map(ReqSet::from_mask)
        .collect();
    sort_by_preference(&mut out);
    out
}

/// Root mean square distance of predicted positions from position 1.
pub fn rmsd(predicted_positions: &[usize]) -> Result<f64, DiagnosisError> {
    if predicted_positions.is_empty() {
        return Err(DiagnosisError::InvalidArgument(
            "rmsd needs at least one position".into(),
        ));
    }
    if predicted_positions.contains(&0) {
        return Err(DiagnosisError::InvalidArgument(
            "positions are 1-based".into(),
        ));
    }
    let sum: f64 = predicted_positions
        .iter()
        .map(|&p| {
            let d = (p - 1) as f64;
            d * d
        })
        .sum();
    Ok((sum / predicted_positions.len() as f64).sqrt())
}

/// A ranked prediction and the diagnosis the user actually needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPrediction {
    pub ranking: Vec<Diagnosis>,
    pub target: Diagnosis,
}

impl RankedPrediction {
    /// 1-based position of the target, or `len + 1` when absent.
    pub fn position(&self) -> usize {
        self.ranking
            .iter()
            .position(|d| *d == self.target)
            .map_or(self.ranking.len() + 1, |i| i + 1)
    }
}

/// Fraction of records whose target is among the first `n` predictions.
pub fn precision_at(records: &[RankedPrediction], n: usize) -> Result<f64, DiagnosisError> {
    if n < 1 {
        return Err(DiagnosisError::InvalidArgument(
            "cutoff must be at least 1".into(),
        ));
    }
    if records.is_empty() {
        return Err(DiagnosisError::InvalidArgument("no records".into()));
    }
    let hits = records
        .iter()
        .filter(|r| r.ranking.iter().take(n).any(|d| *d == r.target))
        .count();
    Ok(hits as f64 / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub num_vars: usize,
    pub domain_size: usize,
    pub num_kb_constraints: usize,
    pub num_requirements: usize,
    /// Probability that a value pair of a binary knowledge-base constraint is
    /// forbidden.
    pub tightness: f64,
    pub seed: u64,
}

impl InstanceSpec {
    fn validate(&self) -> Result<(), DiagnosisError> {
        let bad = |m: &str| Err(DiagnosisError::InvalidArgument(m.to_string()));
        if self.num_vars == 0 || self.domain_size == 0 || self.num_requirements == 0 {
            return bad("variables, domain size and requirements must be positive");
        }
        if self.domain_size > 64 {
            return bad("domain size is limited to 64");
        }
        if self.num_requirements > 64 {
            return bad("at most 64 requirements");
        }
        if !(self.tightness > 0.0 && self.tightness <= 1.0) {
            return bad("tightness must lie in (0, 1]");
        }
        Ok(())
    }
}

const GENERATION_RETRIES: usize = 1000;

fn random_kb(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> KnowledgeBase {
    let variables: Vec<Variable> = (0..spec.num_vars)
        .map(|i| Variable {
            name: format!("x{}", i + 1),
            domain: (0..spec.domain_size)
                .map(|v| format!("v{}", v + 1))
                .collect(),
        })
        .collect();
    let mut constraints = Vec::with_capacity(spec.num_kb_constraints);
    for i in 0..spec.num_kb_constraints {
        let x = rng.gen_range(0..spec.num_vars);
        let y = if spec.num_vars > 1 {
            let mut y = rng.gen_range(0..spec.num_vars - 1);
            if y >= x {
                y += 1;
            }
            y
        } else {
            x
        };
        let mut forbidden = Vec::new();
        for a in 0..spec.domain_size {
            for b in 0..spec.domain_size {
                if rng.gen_bool(spec.tightness) {
                    forbidden.push((a, b));
                }
            }
        }
        if forbidden.is_empty() {
            forbidden.push((
                rng.gen_range(0..spec.domain_size),
                rng.gen_range(0..spec.domain_size),
            ));
        }
        // Each forbidden pair becomes `x = a -> y != b`, or the equivalent
        // disjunction, conjoined.
        let expr = forbidden
            .into_iter()
            .map(|(a, b)| {
                if rng.gen_bool(0.5) {
                    Expr::implies(Expr::eq(x, a), Expr::ne(y, b))
                } else {
                    Expr::or(Expr::ne(x, a), Expr::ne(y, b))
                }
            })
            .reduce(Expr::and)
            .expect("at least one forbidden pair");
        constraints.push(Constraint::new(
            format!("k{}", i + 1),
            expr,
            Origin::KnowledgeBase,
        ));
    }
    KnowledgeBase {
        name: format!("random-{}", spec.seed),
        variables,
        constraints,
    }
}

fn random_requirements(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let pairs: Vec<(usize, usize)> = (0..spec.num_vars)
        .flat_map(|v| (0..spec.domain_size).map(move |d| (v, d)))
        .collect();
    let chosen: Vec<(usize, usize)> = if spec.num_requirements <= pairs.len() {
        pairs
            .choose_multiple(rng, spec.num_requirements)
            .copied()
            .collect()
    } else {
        (0..spec.num_requirements)
            .map(|_| *pairs.choose(rng).expect("non-empty"))
            .collect()
    };
    chosen
        .into_iter()
        .enumerate()
        .map(|(i, (v, d))| {
            Constraint::new(format!("r{}", i + 1), Expr::eq(v, d), Origin::Requirement)
        })
        .collect()
}

/// Generates a random problem with a consistent knowledge base and
/// inconsistent requirements. Deterministic in `spec`.
pub fn gen_random_problem(spec: &InstanceSpec) -> Result<DiagnosisProblem, DiagnosisError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 0..GENERATION_RETRIES {
        rng.set_stream(attempt as u64);
        rng.set_word_pos(0);
        let kb = random_kb(spec, &mut rng);
        let kb_refs: Vec<&Constraint> = kb.constraints.iter().collect();
        if solve(&kb_refs, &kb.variables).is_none() {
            continue;
        }
        let reqs = random_requirements(spec, &mut rng);
        let all: Vec<&Constraint> = kb_refs.iter().copied().chain(reqs.iter()).collect();
        if solve(&all, &kb.variables).is_some() {
            continue;
        }
        return Ok(DiagnosisProblem::new(Arc::new(kb), reqs)?);
    }
    Err(DiagnosisError::RetryBudgetExhausted(GENERATION_RETRIES))
}

/// A session whose user ended up deleting `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionRecord {
    pub problem: DiagnosisProblem,
    pub target: Diagnosis,
}

/// Synthetic sessions. The simulated user walks the minimal diagnoses from
/// most to least preferred and accepts each with probability `p_accept`,
/// settling for the last one if none was accepted.
pub fn synthesize_sessions(
    specs: &[InstanceSpec],
    p_accept: f64,
    seed: u64,
) -> Result<Vec<SessionRecord>, DiagnosisError> {
    if !(0.0..=1.0).contains(&p_accept) {
        return Err(DiagnosisError::InvalidArgument(
            "p_accept must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    specs
        .iter()
        .map(|spec| {
            let problem = gen_random_problem(spec)?;
            let ranked = brute_force_diagnoses(&problem)?;
            let target = ranked
                .iter()
                .find(|_| rng.gen_bool(p_accept))
                .unwrap_or_else(|| ranked.last().expect("inconsistent problem has a diagnosis"))
                .clone();
            Ok(SessionRecord { problem, target })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionQuality {
    pub algorithm: Algorithm,
    pub positions: Vec<usize>,
    pub rmsd: f64,
    /// Precision at cutoffs 1, 2 and 3.
    pub precision: [f64; 3],
}

/// Scores an algorithm's discovery order against the session targets.
pub fn evaluate_predictions(
    records: &[SessionRecord],
    algorithm: Algorithm,
    limit: Limit,
) -> Result<PredictionQuality, DiagnosisError> {
    let options = EnumerationOptions::new(limit);
    let predictions: Vec<RankedPrediction> = records
        .iter()
        .map(|r| RankedPrediction {
            ranking: enumerate(&r.problem, algorithm, &options).diagnoses,
            target: r.target.clone(),
        })
        .collect();
    let positions: Vec<usize> = predictions.iter().map(RankedPrediction::position).collect();
    Ok(PredictionQuality {
        algorithm,
        rmsd: rmsd(&positions)?,
        precision: [
            precision_at(&predictions, 1)?,
            precision_at(&predictions, 2)?,
            precision_at(&predictions, 3)?,
        ],
        positions,
    })
}

/// One benchmark cell: an instance, a diagnosis count and an algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub instance: usize,
    pub seed: u64,
    pub num_requirements: usize,
    pub n: String,
    pub algorithm: String,
    pub runtime_us: u64,
    pub consistency_checks: u64,
    pub guard_checks: u64,
    pub solver_backtracks: u64,
    pub diagnoses: usize,
    pub tree_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub num_requirements: usize,
    pub n: String,
    pub algorithm: String,
    pub cells: usize,
    pub median_runtime_us: f64,
    pub median_consistency_checks: f64,
    pub median_diagnoses: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

impl BenchReport {
    /// Medians per (requirement count, n, algorithm), in first-seen order.
    pub fn summary(&self) -> Vec<BenchSummary> {
        let mut keys: Vec<(usize, String, String)> = Vec::new();
        for r in &self.rows {
            let k = (r.num_requirements, r.n.clone(), r.algorithm.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(reqs, n, algorithm)| {
                let cell: Vec<&BenchRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.num_requirements == reqs && r.n == n && r.algorithm == algorithm)
                    .collect();
                let med = |f: &dyn Fn(&BenchRow) -> f64| {
                    let mut v: Vec<f64> = cell.iter().map(|r| f(r)).collect();
                    median(&mut v).unwrap_or(0.0)
                };
                BenchSummary {
                    num_requirements: reqs,
                    cells: cell.len(),
                    median_runtime_us: med(&|r| r.runtime_us as f64),
                    median_consistency_checks: med(&|r| r.consistency_checks as f64),
                    median_diagnoses: med(&|r| r.diagnoses as f64),
                    n,
                    algorithm,
                }
            })
            .collect()
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>5} {:>5} {:<11} {:>6} {:>14} {:>12} {:>10}",
            "reqs", "n", "algorithm", "cells", "median checks", "median us", "diagnoses"
        );
        for row in self.summary() {
            let _ = writeln!(
                s,
                "{:>5} {:>5} {:<11} {:>6} {:>14.1} {:>12.1} {:>10.1}",
                row.num_requirements,
                row.n,
                row.algorithm,
                row.cells,
                row.median_consistency_checks,
                row.median_runtime_us,
                row.median_diagnoses
            );
        }
        s
    }
}

/// Runs every algorithm for every `n` on every generated instance. All
/// algorithms in a row group see the same problem and fresh statistics.
pub fn run_benchmark(
    specs: &[InstanceSpec],
    n_values: &[Limit],
    algorithms: &[Algorithm],
) -> Result<BenchReport, DiagnosisError> {
    let mut report = BenchReport::default();
    if algorithms.is_empty() || n_values.is_empty() {
        return Ok(report);
    }
    for (instance, spec) in specs.iter().enumerate() {
        let problem = gen_random_problem(spec)?;
        for &n in n_values {
            let options = EnumerationOptions::new(n);
            for &algorithm in algorithms {
                let start = Instant::now();
                let r = enumerate(&problem, algorithm, &options);
                let runtime = start.elapsed();
                report.rows.push(BenchRow {
                    instance,
                    seed: spec.seed,
                    num_requirements: problem.len(),
                    n: n.to_string(),
                    algorithm: algorithm.name().to_string(),
                    runtime_us: runtime.as_micros() as u64,
                    consistency_checks: r.stats.consistency_checks,
                    guard_checks: r.stats.guard_checks,
                    solver_backtracks: r.stats.solver_backtracks,
                    diagnoses: r.diagnoses.len(),
                    tree_size: r.tree_size(),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car;

    fn set(v: &[usize]) -> ReqSet {
        v.iter().copied().collect()
    }

    fn spec(seed: u64) -> InstanceSpec {
        InstanceSpec {
            num_vars: 4,
            domain_size: 3,
            num_kb_constraints: 3,
            num_requirements: 5,
            tightness: 0.3,
            seed,
        }
    }

    #[test]
    fn car_oracles() {
        let p = car::problem();
        let expected = vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])];
        assert_eq!(brute_force_diagnoses(&p).unwrap(), expected);
        assert_eq!(brute_force_conflicts(&p).unwrap(), expected);
    }

    #[test]
    fn consistent_problem_has_empty_diagnosis() {
        let kb = Arc::new(car::knowledge_base());
        let r = Constraint::new("r", kb.atom("pdc", "no").unwrap(), Origin::Requirement);
        let p = DiagnosisProblem::new(kb, vec![r]).unwrap();
        assert_eq!(brute_force_diagnoses(&p).unwrap(), vec![ReqSet::new()]);
        assert!(brute_force_conflicts(&p).unwrap().is_empty());
    }

    #[test]
    fn individually_conflicting_requirements() {
        let kb = Arc::new(car::knowledge_base());
        // Each of these clashes with c3 or c1 on its own.
        let mk = |id: &str, e: Expr| Constraint::new(id, e, Origin::Requirement);
        let a = Expr::and(
            kb.atom("fuel", "4l").unwrap(),
            kb.atom("type", "limo").unwrap(),
        );
        let b = Expr::and(
            kb.atom("4wheel", "yes").unwrap(),
            kb.atom("type", "city").unwrap(),
        );
        let p = DiagnosisProblem::new(kb, vec![mk("a", a), mk("b", b)]).unwrap();
        assert_eq!(brute_force_diagnoses(&p).unwrap(), vec![set(&[0, 1])]);
        assert_eq!(
            brute_force_conflicts(&p).unwrap(),
            vec![set(&[0]), set(&[1])]
        );
    }

    #[test]
    fn size_cap() {
        let kb = Arc::new(car::knowledge_base());
        let reqs = (0..21)
            .map(|i| {
                Constraint::new(
                    format!("r{i}"),
                    kb.atom("pdc", "no").unwrap(),
                    Origin::Requirement,
                )
            })
            .collect();
        let p = DiagnosisProblem::new(kb, reqs).unwrap();
        assert_eq!(
            brute_force_diagnoses(&p).unwrap_err(),
            DiagnosisError::SizeCapExceeded {
                cap: 20,
                actual: 21
            }
        );
    }

    #[test]
    fn hitting_sets_of_car_conflicts() {
        let conflicts = brute_force_conflicts(&car::problem()).unwrap();
        assert_eq!(
            minimal_hitting_sets(&conflicts, 3),
            brute_force_diagnoses(&car::problem()).unwrap()
        );
    }

    #[test]
    fn rmsd_examples() {
        assert_eq!(rmsd(&[1, 1, 1]).unwrap(), 0.0);
        assert_eq!(rmsd(&[2]).unwrap(), 1.0);
        assert!((rmsd(&[3, 1]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(rmsd(&[]).is_err());
        for k in 1..20 {
            assert_eq!(rmsd(&[k]).unwrap(), (k - 1) as f64);
        }
    }

    #[test]
    fn precision_examples() {
        let hit = RankedPrediction {
            ranking: vec![set(&[0]), set(&[1])],
            target: set(&[0]),
        };
        let second = RankedPrediction {
            ranking: vec![set(&[0]), set(&[1])],
            target: set(&[1]),
        };
        let miss = RankedPrediction {
            ranking: vec![set(&[0])],
            target: set(&[2]),
        };
        let mut records = vec![hit.clone(); 7];
        records.extend(vec![second.clone(); 3]);
        assert!((precision_at(&records, 1).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(precision_at(&records, 5).unwrap(), 1.0);
        assert_eq!(precision_at(std::slice::from_ref(&miss), 3).unwrap(), 0.0);
        assert!(precision_at(&records, 0).is_err());
        assert_eq!(miss.position(), 2);
        assert_eq!(second.position(), 2);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_random_problem(&spec(11)).unwrap();
        let b = gen_random_problem(&spec(11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(!brute_force_diagnoses(&a).unwrap().is_empty());
    }

    #[test]
    fn generator_rejects_bad_specs() {
        let mut s = spec(1);
        s.num_requirements = 0;
        assert!(matches!(
            gen_random_problem(&s),
            Err(DiagnosisError::InvalidArgument(_))
        ));
        let mut s = spec(1);
        s.tightness = 0.0;
        assert!(gen_random_problem(&s).is_err());
    }

    #[test]
    fn infeasible_spec_exhausts_retries() {
        // A single requirement over one variable can never be inconsistent
        // with a knowledge base that has no constraints.
        let s = InstanceSpec {
            num_vars: 1,
            domain_size: 2,
            num_kb_constraints: 0,
            num_requirements: 1,
            tightness: 0.5,
            seed: 3,
        };
        assert_eq!(
            gen_random_problem(&s).unwrap_err(),
            DiagnosisError::RetryBudgetExhausted(GENERATION_RETRIES)
        );
    }

    #[test]
    fn empty_algorithm_list() {
        assert!(run_benchmark(&[spec(1)], &[Limit::Count(1)], &[])
            .unwrap()
            .rows
            .is_empty());
    }

    #[test]
    fn benchmark_shape() {
        let specs: Vec<_> = (0..3).map(spec).collect();
        let r = run_benchmark(&specs, &[Limit::Count(1), Limit::All], &Algorithm::ALL).unwrap();
        assert_eq!(r.rows.len(), 3 * 2 * 3);
        assert_eq!(r.summary().len(), 2 * 3);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 18);
        assert!(text.starts_with("instance,seed,num_requirements,n,algorithm"));
    }

    #[test]
    fn sessions_and_prediction_quality() {
        let specs: Vec<_> = (0..5).map(spec).collect();
        let records = synthesize_sessions(&specs, 0.6, 9).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            assert!(brute_force_diagnoses(&r.problem)
                .unwrap()
                .contains(&r.target));
        }
        let q = evaluate_predictions(&records, Algorithm::FastDiagTree, Limit::All).unwrap();
        assert_eq!(q.positions.len(), 5);
        assert!(q.precision[0] <= q.precision[1] && q.precision[1] <= q.precision[2]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
