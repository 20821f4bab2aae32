//! Session state and operations, independent of HTTP.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use diag_core::consistency::check;
use diag_core::enumeration::{enumerate, Algorithm, EnumerationOptions, Limit};
use diag_core::parse::parse_expr;
use diag_core::{
    CheckStats, Constraint, DiagnosisProblem, KnowledgeBase, ModelError, Origin, ProblemOracle,
    ReqSet,
};

use crate::error::ServiceError;

/// A requirement as it travels over the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSpec {
    pub id: String,
    pub expression: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl Verdict {
    fn from_bool(consistent: bool) -> Self {
        if consistent {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub stats: CheckStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosesReport {
    pub verdict: Verdict,
    pub algorithm: Algorithm,
    pub n: String,
    /// Requirement ids per diagnosis, most preferred diagnosis first.
    pub diagnoses: Vec<Vec<String>>,
    /// The requirements each diagnosis would delete, parallel to `diagnoses`.
    pub deletions: Vec<Vec<RequirementSpec>>,
    pub stats: CheckStats,
    /// Served from the session cache without new checks.
    pub cached: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub verdict: Verdict,
    pub witness: Option<BTreeMap<String, String>>,
    pub stats: CheckStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub removed: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub id: String,
    pub kb_id: String,
    /// Least important first.
    pub requirements: Vec<RequirementSpec>,
    pub verdict: Verdict,
    pub history: Vec<RepairRecord>,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    kb_id: String,
    kb: Arc<KnowledgeBase>,
    requirements: Vec<Constraint>,
    consistent: bool,
    cache: Option<DiagnosesReport>,
    history: Vec<RepairRecord>,
}

impl Session {
    /// A fresh session has no requirements and is consistent, since
    /// registered knowledge bases are checked when loaded.
    pub fn new(id: String, kb_id: String, kb: Arc<KnowledgeBase>) -> Self {
        Session {
            id,
            kb_id,
            kb,
            requirements: Vec::new(),
            consistent: true,
            cache: None,
            history: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kb_id(&self) -> &str {
        &self.kb_id
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.consistent)
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            kb_id: self.kb_id.clone(),
            requirements: self.requirements.iter().map(|c| self.spec_of(c)).collect(),
            verdict: self.verdict(),
            history: self.history.clone(),
        }
    }

    fn spec_of(&self, c: &Constraint) -> RequirementSpec {
        RequirementSpec {
            id: c.id.clone(),
            expression: c.expr.render(&self.kb.variables),
        }
    }

    fn problem(&self) -> Option<DiagnosisProblem> {
        if self.requirements.is_empty() {
            return None;
        }
        // Ids and the knowledge base were validated on the way in.
        DiagnosisProblem::new(self.kb.clone(), self.requirements.clone()).ok()
    }

    /// Re-checks the full requirement set with one metered check.
    fn recheck(&mut self) -> CheckStats {
        let mut stats = CheckStats::default();
        self.consistent = match self.problem() {
            None => true,
            Some(p) => check(
                &mut ProblemOracle::new(&p),
                &ReqSet::full(p.len()),
                &mut stats,
            ),
        };
        self.cache = None;
        stats
    }

    /// Replaces the requirements. List order is preference order, least
    /// important first.
    pub fn set_requirements(
        &mut self,
        specs: &[RequirementSpec],
    ) -> Result<VerdictReport, ServiceError> {
        let mut seen = HashSet::new();
        let mut reqs = Vec::with_capacity(specs.len());
        for s in specs {
            let invalid = |message: String| ServiceError::InvalidRequirement {
                id: s.id.clone(),
                message,
            };
            if s.id.is_empty() || s.id.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(invalid(
                    "requirement ids must be non-empty without whitespace or commas".into(),
                ));
            }
            if self.kb.constraint(&s.id).is_some() {
                return Err(invalid(ModelError::IdClash(s.id.clone()).to_string()));
            }
            if !seen.insert(s.id.as_str()) {
                return Err(invalid(ModelError::DuplicateId(s.id.clone()).to_string()));
            }
            let expr = parse_expr(&s.expression, &self.kb).map_err(|e| invalid(e.to_string()))?;
            reqs.push(Constraint::new(s.id.clone(), expr, Origin::Requirement));
        }
        self.requirements = reqs;
        let stats = self.recheck();
        Ok(VerdictReport {
            verdict: self.verdict(),
            stats,
        })
    }

    /// Ranked diagnoses, served from cache when the request repeats.
    pub fn diagnoses(&mut self, algorithm: Algorithm, limit: Limit) -> DiagnosesReport {
        if let Some(c) = &self.cache {
            if c.algorithm == algorithm && c.n == limit.to_string() {
                let mut hit = c.clone();
                hit.cached = true;
                return hit;
            }
        }
        let mut report = DiagnosesReport {
            verdict: self.verdict(),
            algorithm,
            n: limit.to_string(),
            diagnoses: Vec::new(),
            deletions: Vec::new(),
            stats: CheckStats::default(),
            cached: false,
        };
        if let (false, Some(p)) = (self.consistent, self.problem()) {
            let r = enumerate(&p, algorithm, &EnumerationOptions::new(limit));
            for d in r.ranked() {
                report
                    .diagnoses
                    .push(p.ids(&d).into_iter().map(String::from).collect());
                report.deletions.push(
                    d.iter()
                        .map(|i| self.spec_of(&p.requirements()[i]))
                        .collect(),
                );
            }
            report.stats = r.stats;
        }
        self.cache = Some(report.clone());
        report
    }

    /// Deletes `ids` and re-checks. Every id must be a current requirement.
    pub fn repair(&mut self, ids: &[String]) -> Result<SolutionReport, ServiceError> {
        let stale: Vec<&String> = ids
            .iter()
            .filter(|id| !self.requirements.iter().any(|c| &c.id == *id))
            .collect();
        if !stale.is_empty() {
            return Err(ServiceError::Stale(format!(
                "not current requirements: {}",
                stale
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let removed: Vec<String> = self
            .requirements
            .iter()
            .filter(|c| ids.contains(&c.id))
            .map(|c| c.id.clone())
            .collect();
        self.requirements.retain(|c| !ids.contains(&c.id));
        self.cache = None;
        let report = self.solution();
        self.consistent = report.verdict == Verdict::Consistent;
        self.history.push(RepairRecord {
            removed,
            verdict: self.verdict(),
        });
        Ok(report)
    }

    /// Verdict plus a witness configuration when consistent.
    pub fn solution(&self) -> SolutionReport {
        let mut stats = CheckStats::default();
        let witness = match self.problem() {
            None => {
                let kb: Vec<&Constraint> = self.kb.constraints.iter().collect();
                diag_core::consistency::solve(&kb, &self.kb.variables)
            }
            Some(p) => {
                let all = ReqSet::full(p.len());
                let mut oracle = ProblemOracle::new(&p);
                if check(&mut oracle, &all, &mut stats) {
                    oracle.witness(&all)
                } else {
                    None
                }
            }
        };
        SolutionReport {
            verdict: Verdict::from_bool(witness.is_some()),
            witness: witness.map(|w| w.to_map(&self.kb)),
            stats,
        }
    }
}
