//! Direct computation of one preferred minimal diagnosis.
//!
//! `fd(D, C, AC)` answers: which part of `C` must go so that `AC` becomes
//! consistent? If the caller already removed something (`D ≠ ∅`) and `AC` is
//! consistent, nothing more is needed. A single remaining candidate must be
//! in the diagnosis. Otherwise `C` is split at `floor(|C| / 2)`: the lower,
//! less important half `C1` is tentatively removed and the upper half
//! searched first, then `C1` is searched with the upper result removed.
//! Removing the less important half first is what makes the result the
//! lexicographically preferred diagnosis.
//!
//! `AC` only ever loses requirements; the knowledge base is implicit in the
//! oracle and never removed.

use serde::Serialize;

use crate::consistency::{check, guard_check, CheckStats, RequirementOracle};
use crate::model::{Diagnosis, ReqSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", content = "diagnosis", rename_all = "snake_case")]
pub enum FastDiagOutcome {
    /// `AC` is consistent, there is nothing to diagnose.
    AlreadyConsistent,
    /// `C` is empty or `AC − C` is inconsistent: no diagnosis within `C`.
    NoDiagnosis,
    Diagnosis(Diagnosis),
}

impl FastDiagOutcome {
    pub fn diagnosis(&self) -> Option<&Diagnosis> {
        match self {
            FastDiagOutcome::Diagnosis(d) => Some(d),
            _ => None,
        }
    }
}

/// Computes the preferred minimal diagnosis of `ac` within `c`.
///
/// `c` lists diagnosable requirement positions least important first and
/// must be contained in `ac`. Both guard checks (is `AC` inconsistent, is
/// `AC − C` consistent) are metered as [`CheckStats::guard_checks`].
pub fn fast_diag<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    c: &[usize],
    ac: &ReqSet,
    stats: &mut CheckStats,
) -> FastDiagOutcome {
    if guard_check(oracle, ac, stats) {
        return FastDiagOutcome::AlreadyConsistent;
    }
    diagnose_within(oracle, c, ac, stats)
}

/// [`fast_diag`] for a caller that already knows `ac` is inconsistent.
pub fn diagnose_within<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    c: &[usize],
    ac: &ReqSet,
    stats: &mut CheckStats,
) -> FastDiagOutcome {
    if c.is_empty() {
        return FastDiagOutcome::NoDiagnosis;
    }
    let rest = ac.difference(&c.iter().copied().collect());
    if !guard_check(oracle, &rest, stats) {
        return FastDiagOutcome::NoDiagnosis;
    }
    FastDiagOutcome::Diagnosis(fd(oracle, &ReqSet::new(), c, ac, stats))
}

/// The bare recursion, without guards.
pub fn fd<O: RequirementOracle + ?Sized>(
    oracle: &mut O,
    d: &ReqSet,
    c: &[usize],
    ac: &ReqSet,
    stats: &mut CheckStats,
) -> ReqSet {
    if !d.is_empty() && check(oracle, ac, stats) {
        return ReqSet::new();
    }
    if c.len() == 1 {
        return ReqSet::from_iter([c[0]]);
    }
    let k = c.len() / 2;
    let (c1, c2) = c.split_at(k);
    let c1: ReqSet = c1.iter().copied().collect();
    let d1 = fd(oracle, &c1, c2, &ac.difference(&c1), stats);
    let d2 = fd(oracle, &d1, c1.as_slice(), &ac.difference(&d1), stats);
    d1.union(&d2)
}
